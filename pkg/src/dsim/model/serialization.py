"""
src/dsim/model/serialization.py
Versioned JSON documents for fitted models.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import numpy as np

from dsim.core.utils import validate_instance_type
from dsim.estimation.criterion import CriterionValue
from dsim.estimation.idr import IdrFit
from dsim.estimation.index_opt import DsimFit, SphericalPoint
from dsim.estimation.weighting import weighting_from_config
from dsim.exceptions import DsimError, DsimDataError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
ALPHA_NORM_TOL = 1e-12
THETA_ALPHA_TOL = 1e-9


def fit_to_dict(fit: DsimFit, metadata: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Document form {version, alpha, theta, z, thresholds, cdf, q_descriptor, ...}."""
    validate_instance_type("fit", fit, DsimFit)
    document: Dict[str, Any] = {
        "version": FORMAT_VERSION,
        "alpha": fit.alpha.tolist(),
        "theta": list(fit.theta.theta),
        "z": fit.idr.z.tolist(),
        "thresholds": fit.idr.thresholds.tolist(),
        "cdf": fit.idr.cdf.tolist(),
        "q_descriptor": fit.q.descriptor(),
        "criterion": {"value": fit.criterion.value, "n": fit.criterion.n, "q_mass": fit.criterion.q_mass},
        "tie_tol": fit.tie_tol,
    }
    if fit.tie_tol > 0:
        document["z_lower"] = fit.idr.z_lower.tolist()
        document["z_upper"] = fit.idr.z_upper.tolist()
    if metadata:
        document["metadata"] = dict(metadata)
    return document


def fit_from_dict(document: Mapping[str, Any]) -> DsimFit:
    """
    Rebuilds a DsimFit and checks its invariants.

    Raises:
        DsimDataError: If the document is malformed, of another version, or violates an
            invariant of the fit.
    """
    if not isinstance(document, Mapping):
        raise DsimDataError(f"model document expects a JSON object, but got {type(document).__name__}")
    version = document.get("version")
    if version != FORMAT_VERSION:
        raise DsimDataError(f"model document version expects {FORMAT_VERSION}, but got {version!r}")
    try:
        alpha = np.asarray(document["alpha"], dtype=float)
        if alpha.ndim != 1 or abs(float(np.linalg.norm(alpha)) - 1.0) > ALPHA_NORM_TOL:
            raise DsimDataError("model alpha expects a unit vector")
        theta = SphericalPoint(tuple(document["theta"]), alpha.size)
        if np.max(np.abs(theta.to_cartesian() - alpha)) > THETA_ALPHA_TOL:
            raise DsimDataError("model theta and alpha expect to describe the same direction")
        fitted = IdrFit(
            np.asarray(document["z"], dtype=float),
            np.asarray(document["thresholds"], dtype=float),
            np.asarray(document["cdf"], dtype=float),
            None if "z_lower" not in document else np.asarray(document["z_lower"], dtype=float),
            None if "z_upper" not in document else np.asarray(document["z_upper"], dtype=float),
        )
        summary = document["criterion"]
        value = CriterionValue(float(summary["value"]), int(summary["n"]), float(summary["q_mass"]))
        q = weighting_from_config(document["q_descriptor"])
        return DsimFit(alpha, theta, fitted, value, q, float(document.get("tie_tol", 0.0)))
    except KeyError as e:
        raise DsimDataError(f"model document is missing key {e}") from e
    except (TypeError, ValueError) as e:
        raise DsimDataError(f"model document is malformed: {e}") from e
    except DsimDataError:
        raise
    except DsimError as e:
        raise DsimDataError(f"model document is invalid: {e}") from e


def save_fit(fit: DsimFit, path: Union[str, Path], metadata: Optional[Mapping[str, Any]] = None) -> Path:
    """Writes the model document to path."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(fit_to_dict(fit, metadata), indent=2))
    logger.info(f"Wrote model to {target}")
    return target


def load_fit(path: Union[str, Path]) -> DsimFit:
    """Reads a model document written by save_fit."""
    source = Path(path)
    try:
        document = json.loads(source.read_text())
    except OSError as e:
        raise DsimDataError(f"cannot read model file {source}: {e}") from e
    except json.JSONDecodeError as e:
        raise DsimDataError(f"model file {source} is not valid JSON: {e}") from e
    return fit_from_dict(document)
