"""
src/dsim/estimation/criterion.py
The weighted least squares criterion and its profile over the index direction.
"""

from dataclasses import dataclass
from typing import Callable, Protocol, Tuple, Union, runtime_checkable

import numpy as np

from dsim.core.sample import Sample
from dsim.core.utils import validate_unit_vector
from dsim.estimation import idr
from dsim.estimation.weighting import ResolvedAtoms, WeightingMeasure
from dsim.exceptions import DsimArgumentError

CDF_SLACK = 1e-9


@runtime_checkable
class ConditionalCdf(Protocol):
    """Anything that evaluates F(z_i, t_j) on a grid of index values and thresholds."""

    def cdf_matrix(self, z: np.ndarray, t: np.ndarray) -> np.ndarray:
        ...


CdfLike = Union[ConditionalCdf, Callable[[np.ndarray, np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class CriterionValue:
    """
    Value of L_n(Q; F, alpha).

    :ivar value: The criterion, non-negative and finite.
    :ivar n: Sample size.
    :ivar q_mass: Total weight of the atoms used.
    """

    value: float
    n: int
    q_mass: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.value) or self.value < 0:
            raise DsimArgumentError(f"criterion value expects a finite non-negative number, but got {self.value}")


def _cdf_values(F: CdfLike, z: np.ndarray, t: np.ndarray) -> np.ndarray:
    if isinstance(F, ConditionalCdf):
        values = F.cdf_matrix(z, t)
    else:
        values = F(z[:, None], t[None, :])
    return np.broadcast_to(np.asarray(values, dtype=float), (z.size, t.size))


def _residual_sum(responses: np.ndarray, fitted: np.ndarray, thresholds: np.ndarray, weights: np.ndarray) -> float:
    residuals = (responses[:, None] <= thresholds[None, :]) - fitted
    return float(np.sum((residuals * residuals) @ weights))


def weighted_residual(
    responses: np.ndarray, fitted: np.ndarray, atoms: ResolvedAtoms, block: int = idr.COLUMN_BLOCK
) -> float:
    """(1/n) sum_i sum_j w_j (1{Y_i <= t_j} - fitted_ij)^2, accumulated over blocks of thresholds."""
    total = 0.0
    for start, stop in idr.column_blocks(atoms.thresholds.size, block):
        total += _residual_sum(
            responses, fitted[:, start:stop], atoms.thresholds[start:stop], atoms.weights[start:stop]
        )
    return total / responses.size


def evaluate(sample: Sample, F: CdfLike, alpha: np.ndarray, q: ResolvedAtoms) -> CriterionValue:
    """
    Evaluates L_n(Q; F, alpha) = (1/n) sum_i sum_j w_j (1{Y_i <= t_j} - F(alpha'X_i, t_j))^2.

    Args:
        sample: The data.
        F: An object with ``cdf_matrix(z, t)`` or a broadcasting callable ``F(z, t)``.
        alpha: Unit index direction.
        q: Resolved atoms of the weighting measure.

    Raises:
        DsimArgumentError: If alpha is not a unit vector or F leaves [0, 1].
    """
    alpha = validate_unit_vector("alpha", alpha)
    z = sample.project(alpha)
    total = 0.0
    for start, stop in idr.column_blocks(q.thresholds.size):
        thresholds = q.thresholds[start:stop]
        fitted = _cdf_values(F, z, thresholds)
        if not np.all(np.isfinite(fitted)):
            raise DsimArgumentError("F returned non-finite values")
        if np.any(fitted < -CDF_SLACK) or np.any(fitted > 1 + CDF_SLACK):
            raise DsimArgumentError("F expects values in [0, 1]")
        total += _residual_sum(sample.responses, fitted, thresholds, q.weights[start:stop])
    return CriterionValue(total / sample.n, sample.n, q.total_mass)


def profiled(
    sample: Sample,
    alpha: np.ndarray,
    q: Union[WeightingMeasure, ResolvedAtoms],
    tie_tol: float = 0.0,
) -> Tuple[CriterionValue, idr.IdrFit]:
    """
    Evaluates alpha -> L_n(Q; F_hat_{n,alpha}, alpha).

    The isotonic distributional regression is fitted at the atoms of Q and read off
    the grid without interpolation.
    """
    alpha = validate_unit_vector("alpha", alpha)
    atoms = q if isinstance(q, ResolvedAtoms) else q.resolve(sample.responses)
    groups = idr.group(sample.project(alpha), tie_tol)
    fitted = idr.fit(groups, sample.responses, atoms.thresholds)
    total = 0.0
    for start, stop in idr.column_blocks(atoms.thresholds.size):
        total += _residual_sum(
            sample.responses,
            fitted.cdf[groups.labels, start:stop],
            atoms.thresholds[start:stop],
            atoms.weights[start:stop],
        )
    return CriterionValue(total / sample.n, sample.n, atoms.total_mass), fitted


def profiled_value(
    sample: Sample,
    alpha: np.ndarray,
    q: Union[WeightingMeasure, ResolvedAtoms],
    tie_tol: float = 0.0,
    block: int = idr.COLUMN_BLOCK,
) -> CriterionValue:
    """
    The value of ``profiled`` without keeping the fitted grid: the regression is
    computed and scored one block of thresholds at a time.
    """
    alpha = validate_unit_vector("alpha", alpha)
    atoms = q if isinstance(q, ResolvedAtoms) else q.resolve(sample.responses)
    groups = idr.group(sample.project(alpha), tie_tol)
    total = 0.0
    for start, stop, cdf in idr.fitted_blocks(groups, sample.responses, atoms.thresholds, block):
        total += _residual_sum(
            sample.responses, cdf[groups.labels], atoms.thresholds[start:stop], atoms.weights[start:stop]
        )
    return CriterionValue(total / sample.n, sample.n, atoms.total_mass)
