"""
src/dsim/model/predictor.py
Predictions from a fitted distributional single index model.

Off the fitted grid the CDFs are extended as a right-continuous step function in y
(0 below the first threshold, 1 from the last threshold on) and linearly in the index
between neighbouring fitted values, with constant extension outside [z_1, z_m].
"""

import logging
from typing import Sequence

import numpy as np
import pandas as pd
from scipy import stats

from dsim.core.utils import validate_finite_array, validate_instance_type
from dsim.estimation.index_opt import DsimFit
from dsim.exceptions import DsimArgumentError, DsimDimensionError

logger = logging.getLogger(__name__)


_PAIR_BLOCK = 1024


def _interpolate(upper: np.ndarray, lower: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """upper - weight * (upper - lower), kept inside [lower, upper]; non-increasing in weight."""
    values = upper - weight * (upper - lower)
    return np.minimum(np.maximum(values, lower), upper)


class Predictor:
    """
    Immutable predictor built from a DsimFit.

    All query methods are read-only and may be called concurrently.

    :ivar fit: The fitted model.
    """

    def __init__(self, fit: DsimFit):
        validate_instance_type("fit", fit, DsimFit)
        self._fit = fit

    @property
    def fit(self) -> DsimFit:
        return self._fit

    @property
    def alpha(self) -> np.ndarray:
        return self._fit.alpha

    @property
    def z(self) -> np.ndarray:
        return self._fit.idr.z

    @property
    def thresholds(self) -> np.ndarray:
        return self._fit.idr.thresholds

    def index(self, covariates: Sequence[Sequence[float]]) -> np.ndarray:
        """Index values alpha'x for a matrix of covariate rows."""
        rows = validate_finite_array("covariates", covariates, ndim=2)
        if rows.shape[1] != self._fit.dim:
            raise DsimDimensionError(
                f"covariates expects {self._fit.dim} columns, but got {rows.shape[1]}"
            )
        return rows @ self.alpha

    def _point_index(self, x: Sequence[float]) -> float:
        point = validate_finite_array("x", x)
        return float(self.index(point[None, :])[0])

    def extrapolated(self, z: np.ndarray) -> np.ndarray:
        """True where the index lies outside [z_1, z_m]."""
        z = np.asarray(z, dtype=float)
        return (z < self.z[0]) | (z > self.z[-1])

    def _neighbours(self, z: np.ndarray):
        positions = np.searchsorted(self.z, z, side="right")
        lo = np.clip(positions - 1, 0, self.z.size - 1)
        hi = np.clip(positions, 0, self.z.size - 1)
        span = self.z[hi] - self.z[lo]
        weight = np.where(span > 0, (z - self.z[lo]) / np.where(span > 0, span, 1.0), 0.0)
        return lo, hi, np.clip(weight, 0.0, 1.0)

    def cdf_rows(self, z: Sequence[float]) -> np.ndarray:
        """CDF values at every threshold for each index value, shape (len(z), k)."""
        z = validate_finite_array("z", z)
        lo, hi, weight = self._neighbours(z)
        grid = self._fit.idr.cdf
        rows = _interpolate(grid[lo], grid[hi], weight[:, None])
        rows = np.maximum.accumulate(rows, axis=1)
        rows[:, -1] = 1.0
        return rows

    def cdf_pairs(self, z: Sequence[float], y: Sequence[float]) -> np.ndarray:
        """F(z_i, y_i) for paired index values and responses."""
        z = validate_finite_array("z", z)
        y = validate_finite_array("y", y)
        if z.shape != y.shape:
            raise DsimArgumentError(f"z and y expect equal lengths, but got {z.size} and {y.size}")
        columns = np.searchsorted(self.thresholds, y, side="right") - 1
        safe = np.maximum(columns, 0)
        values = np.empty(z.size)
        # Same rows as cdf_rows, so quantiles and CDF values invert each other exactly.
        for start in range(0, z.size, _PAIR_BLOCK):
            block = slice(start, start + _PAIR_BLOCK)
            rows = self.cdf_rows(z[block])
            values[block] = rows[np.arange(rows.shape[0]), safe[block]]
        values[columns < 0] = 0.0
        return values

    def cdf_matrix(self, z: np.ndarray, t: np.ndarray) -> np.ndarray:
        """F(z_i, t_j) for all pairs."""
        rows = self.cdf_rows(z)
        columns = np.searchsorted(self.thresholds, np.asarray(t, dtype=float), side="right") - 1
        values = rows[:, np.maximum(columns, 0)]
        values[:, columns < 0] = 0.0
        return values

    def cdf(self, x: Sequence[float], y: float) -> float:
        """Predicted P(Y <= y | X = x)."""
        if not np.isfinite(y):
            raise DsimArgumentError(f"y expects a finite number, but got {y}")
        z = self._point_index(x)
        return float(self.cdf_pairs([z], [y])[0])

    def quantiles_at(self, z: Sequence[float], taus: Sequence[float]) -> np.ndarray:
        """Generalised inverses inf{y : F(z, y) >= tau}, shape (len(z), len(taus))."""
        levels = validate_finite_array("taus", taus)
        if np.any(levels <= 0) or np.any(levels >= 1):
            raise DsimArgumentError("tau expects values strictly between 0 and 1")
        rows = self.cdf_rows(z)
        result = np.empty((rows.shape[0], levels.size))
        for i, row in enumerate(rows):
            result[i] = self.thresholds[np.searchsorted(row, levels, side="left")]
        return result

    def quantile(self, x: Sequence[float], tau: float) -> float:
        """Predicted tau-quantile at covariates x."""
        return float(self.quantiles_at([self._point_index(x)], [tau])[0, 0])

    def means_at(self, z: Sequence[float]) -> np.ndarray:
        """Means of the step CDFs, sum_j y_j * (jump at y_j)."""
        rows = self.cdf_rows(z)
        jumps = np.diff(rows, axis=1, prepend=0.0)
        return jumps @ self.thresholds

    def mean(self, x: Sequence[float]) -> float:
        """Predicted conditional mean at covariates x."""
        return float(self.means_at([self._point_index(x)])[0])

    def predict(
        self,
        covariates: Sequence[Sequence[float]],
        taus: Sequence[float] = (),
        ys: Sequence[float] = (),
    ) -> pd.DataFrame:
        """
        Batch prediction with one row per covariate vector.

        Columns: ``index``, ``extrapolated``, one ``q_<tau>`` column per quantile level
        and one ``cdf_<y>`` column per requested CDF evaluation.
        """
        z = self.index(covariates)
        table = pd.DataFrame({"index": z, "extrapolated": self.extrapolated(z)})
        if len(taus):
            values = self.quantiles_at(z, taus)
            for j, tau in enumerate(taus):
                table[f"q_{tau:g}"] = values[:, j]
        for y in ys:
            table[f"cdf_{y:g}"] = self.cdf_pairs(z, np.full(z.size, float(y)))
        outside = int(table["extrapolated"].sum())
        if outside:
            logger.warning(f"{outside} of {z.size} index values lie outside the fitted range")
        return table


def index_agreement(first: Predictor, second: Predictor, covariates: Sequence[Sequence[float]]) -> float:
    """Spearman rank correlation between the index values of two fits."""
    result = stats.spearmanr(first.index(covariates), second.index(covariates))
    return float(result[0])
