"""
src/dsim/estimation/idr.py
Isotonic distributional regression for a fixed index direction.

For fixed alpha the least squares minimiser over stochastically ordered CDF families
is computed column by column: at every threshold t the group means of 1{Y <= t} are
projected onto non-increasing sequences in z with weights equal to the group sizes.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np
from sklearn.isotonic import isotonic_regression

from dsim.core.utils import validate_finite_array
from dsim.exceptions import DsimArgumentError

logger = logging.getLogger(__name__)

# Threshold columns processed at once; working memory is O((n + m) * COLUMN_BLOCK).
COLUMN_BLOCK = 256


@dataclass(frozen=True, eq=False)
class GroupedProjections:
    """
    Distinct index values z_1 < ... < z_m with their multiplicities.

    :ivar z: Group keys, strictly increasing.
    :ivar counts: Group sizes n_1..n_m, summing to n.
    :ivar labels: Group index of every observation, shape (n,).
    :ivar lower: Smallest projection in each group.
    :ivar upper: Largest projection in each group.
    """

    z: np.ndarray
    counts: np.ndarray
    labels: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def m(self) -> int:
        return int(self.z.size)

    @property
    def n(self) -> int:
        return int(self.labels.size)


def group(projections: Sequence[float], tie_tol: float = 0.0) -> GroupedProjections:
    """
    Groups index values that lie within tie_tol of their sorted neighbour.

    With tie_tol = 0 only exact ties are merged and each key is the common value;
    otherwise chains of values closer than tie_tol collapse to one group keyed by
    their mean.

    Raises:
        DsimArgumentError: On empty or non-finite projections or a negative tolerance.
    """
    values = validate_finite_array("projections", projections)
    if values.size == 0:
        raise DsimArgumentError("projections expects at least one value, but got none")
    if not np.isfinite(tie_tol) or tie_tol < 0:
        raise DsimArgumentError(f"tie_tol expects a non-negative number, but got {tie_tol}")

    order = np.argsort(values, kind="stable")
    ordered = values[order]
    breaks = np.diff(ordered) > tie_tol
    ids = np.concatenate(([0], np.cumsum(breaks)))
    labels = np.empty(values.size, dtype=np.intp)
    labels[order] = ids

    counts = np.bincount(ids)
    starts = np.concatenate(([0], np.flatnonzero(breaks) + 1))
    ends = np.concatenate((starts[1:], [values.size])) - 1
    lower = ordered[starts]
    upper = ordered[ends]
    if tie_tol == 0:
        z = lower.copy()
    else:
        z = np.bincount(ids, weights=ordered) / counts
    return GroupedProjections(z, counts, labels, lower, upper)


@dataclass(frozen=True, eq=False)
class IdrFit:
    """
    The fitted conditional CDFs on the grid of index values and thresholds.

    :ivar z: Strictly increasing index values z_1 < ... < z_m.
    :ivar thresholds: Strictly increasing thresholds y_1 < ... < y_k.
    :ivar cdf: Matrix of shape (m, k); rows are CDFs in y, columns non-increasing in z.
    :ivar z_lower: Smallest projection mapped to each row (defaults to z).
    :ivar z_upper: Largest projection mapped to each row (defaults to z).
    """

    z: np.ndarray
    thresholds: np.ndarray
    cdf: np.ndarray
    z_lower: Optional[np.ndarray] = None
    z_upper: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        z = validate_finite_array("z", self.z).copy()
        thresholds = validate_finite_array("thresholds", self.thresholds).copy()
        cdf = validate_finite_array("cdf", self.cdf, ndim=2).copy()
        if z.size == 0 or thresholds.size == 0:
            raise DsimArgumentError("IdrFit expects a non-empty grid")
        if cdf.shape != (z.size, thresholds.size):
            raise DsimArgumentError(
                f"cdf expects shape {(z.size, thresholds.size)}, but got {cdf.shape}"
            )
        if np.any(np.diff(z) <= 0):
            raise DsimArgumentError("z expects strictly increasing values")
        if np.any(np.diff(thresholds) <= 0):
            raise DsimArgumentError("thresholds expects strictly increasing values")
        if np.any(cdf < 0) or np.any(cdf > 1):
            raise DsimArgumentError("cdf expects values in [0, 1]")
        if np.any(np.diff(cdf, axis=1) < 0):
            raise DsimArgumentError("cdf rows expect non-decreasing values in the threshold")
        if np.any(np.diff(cdf, axis=0) > 0):
            raise DsimArgumentError("cdf columns expect non-increasing values in the index")
        lower = z if self.z_lower is None else validate_finite_array("z_lower", self.z_lower).copy()
        upper = z if self.z_upper is None else validate_finite_array("z_upper", self.z_upper).copy()
        if lower.shape != z.shape or upper.shape != z.shape:
            raise DsimArgumentError(
                f"z_lower and z_upper expect {z.size} entries, but got {lower.size} and {upper.size}"
            )
        if np.any(lower > upper) or np.any(upper[:-1] >= lower[1:]):
            raise DsimArgumentError("z_lower and z_upper expect disjoint increasing group ranges")
        for array in (z, thresholds, cdf, lower, upper):
            array.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "cdf", cdf)
        object.__setattr__(self, "z_lower", lower)
        object.__setattr__(self, "z_upper", upper)

    @property
    def m(self) -> int:
        return int(self.z.size)

    @property
    def k(self) -> int:
        return int(self.thresholds.size)

    def rows_for(self, z: np.ndarray) -> np.ndarray:
        """Maps index values onto grid rows; every value must belong to a fitted group."""
        z = np.asarray(z, dtype=float)
        rows = np.searchsorted(self.z_upper, z, side="left")
        inside = rows < self.m
        clipped = np.minimum(rows, self.m - 1)
        inside &= (self.z_lower[clipped] <= z) & (z <= self.z_upper[clipped])
        if not np.all(inside):
            raise DsimArgumentError(
                "index values expect to lie on the fitted grid; use a Predictor to interpolate"
            )
        return clipped

    def columns_for(self, t: np.ndarray) -> np.ndarray:
        """Step lookup in y: index of the largest threshold <= t, or -1 below y_1."""
        return np.searchsorted(self.thresholds, np.asarray(t, dtype=float), side="right") - 1

    def cdf_matrix(self, z: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Fitted CDF values for every pair (z_i, t_j), read off the grid."""
        rows = self.rows_for(z)
        columns = self.columns_for(t)
        values = self.cdf[np.ix_(rows, np.maximum(columns, 0))]
        values[:, columns < 0] = 0.0
        return values


def column_blocks(k: int, block: int = COLUMN_BLOCK) -> Iterator[Tuple[int, int]]:
    """Consecutive (start, stop) ranges covering k threshold columns."""
    if block < 1:
        raise DsimArgumentError(f"block expects a positive integer, but got {block}")
    for start in range(0, k, block):
        yield start, min(start + block, k)


def indicator_blocks(
    groups: GroupedProjections, responses: np.ndarray, thresholds: np.ndarray, block: int = COLUMN_BLOCK
) -> Iterator[Tuple[int, int, np.ndarray]]:
    """
    Group means of 1{Y_s <= t_j} for consecutive blocks of thresholds.

    Yields (start, stop, means) with means of shape (m, stop - start). Hit counts below
    the block are carried over, so the blocks agree exactly with a single pass.
    """
    positions = np.searchsorted(thresholds, responses, side="left")
    below = np.zeros(groups.m)
    for start, stop in column_blocks(thresholds.size, block):
        inside = (positions >= start) & (positions < stop)
        hits = np.zeros((groups.m, stop - start))
        np.add.at(hits, (groups.labels[inside], positions[inside] - start), 1.0)
        sums = below[:, None] + np.cumsum(hits, axis=1)
        below = sums[:, -1]
        yield start, stop, sums / groups.counts[:, None]


def fitted_blocks(
    groups: GroupedProjections, responses: Sequence[float], thresholds: Sequence[float], block: int = COLUMN_BLOCK
) -> Iterator[Tuple[int, int, np.ndarray]]:
    """
    The fitted CDF grid in consecutive blocks of threshold columns.

    Each column is the weighted antitonic regression of the group means of the
    indicators, which coincides with the min-max formula
    min_{k<=i} max_{l>=i} of the pooled means of groups k..l.

    Raises:
        DsimArgumentError: On empty or unsorted thresholds or inconsistent sizes.
    """
    y = validate_finite_array("responses", responses)
    t = validate_finite_array("thresholds", thresholds)
    if t.size == 0:
        raise DsimArgumentError("thresholds expects at least one value, but got none")
    if np.any(np.diff(t) <= 0):
        raise DsimArgumentError("thresholds expects strictly increasing values")
    if y.size != groups.n:
        raise DsimArgumentError(
            f"responses has {y.size} entries but the grouping covers {groups.n} observations"
        )

    weights = groups.counts.astype(float)
    row_max = np.zeros(groups.m)
    for start, stop, means in indicator_blocks(groups, y, t, block):
        cdf = means.copy()
        for j in range(stop - start):
            column = means[:, j]
            if np.all(np.diff(column) <= 0):
                continue
            cdf[:, j] = isotonic_regression(column, sample_weight=weights, increasing=False)

        # Rounding in the pooled means must not break either ordering.
        cdf = np.clip(cdf, 0.0, 1.0)
        cdf = np.minimum.accumulate(cdf, axis=0)
        cdf[:, 0] = np.maximum(cdf[:, 0], row_max)
        cdf = np.maximum.accumulate(cdf, axis=1)
        row_max = cdf[:, -1].copy()
        yield start, stop, cdf


def fit(
    groups: GroupedProjections, responses: Sequence[float], thresholds: Sequence[float], block: int = COLUMN_BLOCK
) -> IdrFit:
    """
    Computes the isotonic distributional regression on the grid z x thresholds.

    Raises:
        DsimArgumentError: On empty or unsorted thresholds or inconsistent sizes.
    """
    t = validate_finite_array("thresholds", thresholds)
    cdf = np.empty((groups.m, t.size))
    blocks = 0
    for start, stop, values in fitted_blocks(groups, responses, t, block):
        cdf[:, start:stop] = values
        blocks += 1
    logger.debug(f"IDR fit on {groups.m} groups x {t.size} thresholds in {blocks} block(s)")
    return IdrFit(groups.z, t, cdf, groups.lower, groups.upper)
