"""
src/dsim/core/utils.py
Validation helpers shared by the estimation, model and simulation layers.
"""
from typing import Any, Callable

import numpy as np

from dsim.exceptions import DsimArgumentError

UNIT_NORM_TOL = 1e-9


def validate_instance_type(param_name: str, value: Any, expected_type: type) -> None:
    """Ensures that the given value is an instance of the expected type.

    Args:
        param_name (str): The name of the parameter being checked.
        value: The actual value being passed.
        expected_type (type): The expected type for the parameter.

    Raises:
        DsimArgumentError: If the value is not an instance of the expected type.
    """
    if not isinstance(value, expected_type):
        raise DsimArgumentError(
            f"{param_name} expects an instance of {expected_type.__name__}, "
            f"but got {type(value).__name__}"
        )


def validate_non_empty_string(param_name: str, value: str) -> None:
    """Ensures that the given value is a non-empty string.

    Raises:
        DsimArgumentError: If the value is not a string or is an empty string.
    """
    if not isinstance(value, str):
        raise DsimArgumentError(
            f"{param_name} expects a non-empty string, but got {type(value).__name__}"
        )
    if not value.strip():
        raise DsimArgumentError(f"{param_name} expects a non-empty string, but got an empty string")


def validate_callback(name: str, callback: Callable[..., Any]) -> None:
    if not callable(callback):
        raise DsimArgumentError(f"Callback for '{name}' must be callable")


def validate_positive(param_name: str, value: float) -> None:
    """Ensures that the given value is a finite, strictly positive number."""
    if not np.isfinite(value) or value <= 0:
        raise DsimArgumentError(f"{param_name} expects a positive finite number, but got {value}")


def validate_finite_array(param_name: str, values: Any, ndim: int = 1) -> np.ndarray:
    """Converts values to a float array of the given rank and rejects NaN or infinity.

    Args:
        param_name (str): The name of the parameter being checked.
        values: Array-like input.
        ndim (int): Required number of dimensions.

    Returns:
        np.ndarray: The input as a float64 array.

    Raises:
        DsimArgumentError: On a rank mismatch or non-finite entries.
    """
    try:
        array = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as e:
        raise DsimArgumentError(f"{param_name} expects numeric values, but got {e}") from e
    if array.ndim != ndim:
        raise DsimArgumentError(
            f"{param_name} expects an array with {ndim} dimension(s), but got {array.ndim}"
        )
    if not np.all(np.isfinite(array)):
        raise DsimArgumentError(f"{param_name} expects finite values, but got NaN or infinity")
    return array


def validate_unit_vector(param_name: str, values: Any, tol: float = UNIT_NORM_TOL) -> np.ndarray:
    """Ensures that the given vector has Euclidean norm one within tol."""
    vector = validate_finite_array(param_name, values)
    norm = float(np.linalg.norm(vector))
    if abs(norm - 1.0) > tol:
        raise DsimArgumentError(f"{param_name} expects a unit vector, but got norm {norm!r}")
    return vector
