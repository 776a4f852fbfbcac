"""
src/dsim/estimation/index_opt.py
Minimisation of the profiled criterion over unit index directions.

Directions are parameterised by hyperspherical angles: for d >= 3 the first d - 2
angles are polar angles in [0, pi] measured from the last axis downwards, and the
final angle is the azimuth in [0, 2 pi) of the first two coordinates. For d = 2 this
is alpha = (cos theta, sin theta); for d = 1 the sphere is {-1, +1}, reached with the
single angle 0 or pi.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np

from dsim.core.sample import Sample
from dsim.estimation import criterion, idr
from dsim.estimation.criterion import CriterionValue
from dsim.estimation.optimize import bounded_simplex, golden_section
from dsim.estimation.weighting import EmpiricalMeasure, ResolvedAtoms, WeightingMeasure
from dsim.exceptions import DsimConfigurationError, DsimDegenerateDataError, DsimArgumentError

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class SphericalPoint:
    """
    Angles of a unit vector in R^dim.

    :ivar theta: dim - 1 angles (one angle in {0, pi} when dim = 1).
    :ivar dim: Dimension of the unit vector.
    """

    theta: Tuple[float, ...]
    dim: int

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise DsimArgumentError(f"dim expects a positive integer, but got {self.dim}")
        theta = tuple(float(angle) for angle in self.theta)
        if len(theta) != max(self.dim - 1, 1):
            raise DsimArgumentError(
                f"theta expects {max(self.dim - 1, 1)} angle(s) for dim {self.dim}, but got {len(theta)}"
            )
        if not all(math.isfinite(angle) for angle in theta):
            raise DsimArgumentError("theta expects finite angles")
        object.__setattr__(self, "theta", theta)

    def wrapped(self) -> "SphericalPoint":
        """Folds the azimuth into [0, 2 pi); polar angles are left as they are."""
        if self.dim == 1:
            return self
        *polar, azimuth = self.theta
        return SphericalPoint((*polar, azimuth % TWO_PI), self.dim)

    def to_cartesian(self) -> np.ndarray:
        return to_cartesian(self)


def to_cartesian(point: SphericalPoint) -> np.ndarray:
    """Unit vector for the given angles; any real angles are accepted."""
    if point.dim == 1:
        return np.array([1.0 if math.cos(point.theta[0]) >= 0 else -1.0])
    alpha = np.empty(point.dim)
    radius = 1.0
    *polar, azimuth = point.theta
    for i, angle in enumerate(polar):
        alpha[point.dim - 1 - i] = radius * math.cos(angle)
        radius *= math.sin(angle)
    alpha[0] = radius * math.cos(azimuth)
    alpha[1] = radius * math.sin(azimuth)
    return alpha


def to_spherical(alpha: Sequence[float]) -> SphericalPoint:
    """Angles of a non-zero vector, inverse of to_cartesian on the canonical ranges."""
    vector = np.asarray(alpha, dtype=float)
    norm = float(np.linalg.norm(vector))
    if vector.ndim != 1 or vector.size == 0 or norm == 0:
        raise DsimArgumentError("alpha expects a non-zero vector")
    vector = vector / norm
    d = vector.size
    if d == 1:
        return SphericalPoint((0.0 if vector[0] > 0 else math.pi,), 1)
    polar = []
    for i in range(d - 2):
        tail = float(np.linalg.norm(vector[: d - i]))
        polar.append(math.acos(max(-1.0, min(1.0, vector[d - 1 - i] / tail))) if tail > 0 else 0.0)
    azimuth = math.atan2(vector[1], vector[0]) % TWO_PI
    return SphericalPoint((*polar, azimuth), d)


def default_grid_sizes(dim: int) -> Tuple[int, ...]:
    if dim == 1:
        return (2,)
    return (20,) * (dim - 2) + (40,)


@dataclass(frozen=True)
class SearchConfig:
    """
    Settings of the grid search and the local refinement.

    :ivar grid_sizes: Points per angle; defaults to 40 for d = 2 and (20, 40) for d = 3.
    :ivar refine: Whether to refine the best grid nodes locally.
    :ivar refine_max_iter: Evaluation budget of one local search.
    :ivar refine_tol: Bracket width (d = 2) or simplex diameter (d >= 3) at which to stop.
    :ivar n_starts: Number of best grid nodes refined; the best result is kept.
    :ivar tie_tol: Tolerance for merging index values into one group.
    :ivar workers: Threads used to evaluate grid nodes and refinements.
    """

    grid_sizes: Optional[Tuple[int, ...]] = None
    refine: bool = True
    refine_max_iter: int = 200
    refine_tol: float = 1e-6
    n_starts: int = 3
    tie_tol: float = 0.0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.grid_sizes is not None:
            sizes = tuple(int(size) for size in self.grid_sizes)
            if not sizes or any(size < 2 for size in sizes):
                raise DsimConfigurationError(f"grid_sizes expects sizes of at least 2, but got {sizes}")
            object.__setattr__(self, "grid_sizes", sizes)
        if self.refine_max_iter < 1:
            raise DsimConfigurationError(f"refine_max_iter expects a positive integer, but got {self.refine_max_iter}")
        if not self.refine_tol > 0:
            raise DsimConfigurationError(f"refine_tol expects a positive number, but got {self.refine_tol}")
        if self.n_starts < 1:
            raise DsimConfigurationError(f"n_starts expects a positive integer, but got {self.n_starts}")
        if self.tie_tol < 0:
            raise DsimConfigurationError(f"tie_tol expects a non-negative number, but got {self.tie_tol}")
        if self.workers < 1:
            raise DsimConfigurationError(f"workers expects a positive integer, but got {self.workers}")

    def sizes_for(self, dim: int) -> Tuple[int, ...]:
        sizes = self.grid_sizes or default_grid_sizes(dim)
        if len(sizes) != max(dim - 1, 1):
            raise DsimConfigurationError(
                f"grid_sizes expects {max(dim - 1, 1)} entries for dimension {dim}, but got {len(sizes)}"
            )
        if dim == 1 and sizes != (2,):
            raise DsimConfigurationError("grid_sizes for dimension 1 must be (2,)")
        return sizes


def grid_steps(dim: int, sizes: Sequence[int]) -> Tuple[float, ...]:
    """Spacing between neighbouring grid nodes along every angle."""
    if dim == 1:
        return (math.pi,)
    *polar, azimuth = sizes
    return tuple(math.pi / (size - 1) for size in polar) + (TWO_PI / azimuth,)


def angle_grid(dim: int, sizes: Sequence[int]) -> List[SphericalPoint]:
    """
    All grid nodes in lexicographic order. Polar angles cover [0, pi] with both ends;
    the azimuth covers [0, 2 pi) without the duplicate endpoint.
    """
    if dim == 1:
        return [SphericalPoint((0.0,), 1), SphericalPoint((math.pi,), 1)]
    *polar, azimuth = sizes
    axes = [np.linspace(0.0, math.pi, size) for size in polar]
    axes.append(np.arange(azimuth) * (TWO_PI / azimuth))
    return [SphericalPoint(tuple(node), dim) for node in itertools.product(*axes)]


@dataclass(frozen=True)
class GridNode:
    theta: SphericalPoint
    criterion: CriterionValue

    @property
    def rank_key(self) -> Tuple[float, Tuple[float, ...]]:
        return (self.criterion.value, self.theta.theta)


@dataclass(frozen=True, eq=False)
class DsimFit:
    """
    The estimated index direction with the isotonic distributional regression refit there.

    :ivar alpha: Unit index direction.
    :ivar theta: Angles of alpha.
    :ivar idr: Fitted conditional CDFs; thresholds include all distinct responses and
        all atoms of Q.
    :ivar criterion: Criterion value at alpha.
    :ivar q: The weighting measure used.
    :ivar tie_tol: Grouping tolerance used for the index values.
    """

    alpha: np.ndarray
    theta: SphericalPoint
    idr: idr.IdrFit
    criterion: CriterionValue
    q: WeightingMeasure
    tie_tol: float = 0.0

    @property
    def dim(self) -> int:
        return int(self.alpha.size)


def _map(workers: int, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


def _atoms(sample: Sample, q: Union[WeightingMeasure, ResolvedAtoms]) -> ResolvedAtoms:
    return q if isinstance(q, ResolvedAtoms) else q.resolve(sample.responses)


def _objective(sample: Sample, atoms: ResolvedAtoms, dim: int, tie_tol: float) -> Callable[[Sequence[float]], CriterionValue]:
    def evaluate(theta: Sequence[float]) -> CriterionValue:
        alpha = to_cartesian(SphericalPoint(tuple(theta), dim))
        return criterion.profiled_value(sample, alpha, atoms, tie_tol)

    return evaluate


def grid_search(
    sample: Sample, q: Union[WeightingMeasure, ResolvedAtoms], cfg: SearchConfig = SearchConfig()
) -> List[GridNode]:
    """
    Evaluates the profiled criterion at every grid node.

    Returns:
        Nodes sorted by criterion value, ties broken by the lexicographically smallest
        angles.

    Raises:
        DsimDegenerateDataError: If the sample has fewer than two observations.
    """
    if sample.n < 2:
        raise DsimDegenerateDataError(f"grid search expects at least 2 observations, but got {sample.n}")
    atoms = _atoms(sample, q)
    nodes = angle_grid(sample.dim, cfg.sizes_for(sample.dim))
    objective = _objective(sample, atoms, sample.dim, cfg.tie_tol)
    values = _map(cfg.workers, lambda node: objective(node.theta), nodes)
    ranked = sorted((GridNode(node, value) for node, value in zip(nodes, values)), key=lambda g: g.rank_key)
    logger.debug(
        f"Grid search over {len(nodes)} nodes: best theta={ranked[0].theta.theta}, "
        f"criterion={ranked[0].criterion.value:.6g}"
    )
    return ranked


def refine(
    sample: Sample,
    q: Union[WeightingMeasure, ResolvedAtoms],
    start: SphericalPoint,
    cfg: SearchConfig = SearchConfig(),
    start_value: Optional[CriterionValue] = None,
) -> Tuple[SphericalPoint, CriterionValue]:
    """
    Local derivative-free refinement around a grid node.

    For d = 2 a golden-section search runs between the two neighbouring grid nodes; for
    d >= 3 a bounded Nelder-Mead simplex runs in the box of one grid step around start.
    The refined point replaces start only if it strictly improves the criterion.
    """
    atoms = _atoms(sample, q)
    objective = _objective(sample, atoms, start.dim, cfg.tie_tol)
    if start_value is None:
        start_value = objective(start.theta)
    if start.dim == 1:
        return start, start_value

    steps = grid_steps(start.dim, cfg.sizes_for(start.dim))
    if start.dim == 2:
        (theta,) = start.theta
        local = golden_section(
            lambda angle: objective((angle,)).value,
            theta - steps[0],
            theta + steps[0],
            cfg.refine_tol,
            cfg.refine_max_iter,
        )
    else:
        bounds = [
            (max(0.0, angle - step), min(math.pi, angle + step))
            for angle, step in zip(start.theta[:-1], steps[:-1])
        ]
        bounds.append((start.theta[-1] - steps[-1], start.theta[-1] + steps[-1]))
        local = bounded_simplex(
            lambda theta: objective(tuple(theta)).value,
            start.theta,
            bounds,
            cfg.refine_tol,
            cfg.refine_max_iter,
        )
    logger.debug(
        f"Refined theta={start.theta} in {local.evaluations} evaluations: "
        f"{start_value.value:.6g} -> {local.value:.6g}"
    )
    if local.value < start_value.value:
        refined = SphericalPoint(tuple(local.x), start.dim).wrapped()
        refined_value = objective(refined.theta)
        if refined_value.value < start_value.value:
            return refined, refined_value
    return start, start_value


def fit_dsim(
    sample: Sample, q: WeightingMeasure = EmpiricalMeasure(), cfg: SearchConfig = SearchConfig()
) -> DsimFit:
    """
    Jointly estimates the index direction and the conditional CDFs.

    Runs the grid search, refines the best n_starts nodes, keeps the best result and
    refits the isotonic distributional regression at the final direction on the union
    of the distinct responses and the atoms of Q.
    """
    atoms = _atoms(sample, q)
    ranked = grid_search(sample, atoms, cfg)
    best_theta, best_value = ranked[0].theta, ranked[0].criterion
    if cfg.refine and sample.dim > 1:
        starts = ranked[: cfg.n_starts]
        results = _map(
            cfg.workers, lambda node: refine(sample, atoms, node.theta, cfg, node.criterion), starts
        )
        best_theta, best_value = min(results, key=lambda r: (r[1].value, r[0].theta))

    alpha = to_cartesian(best_theta)
    groups = idr.group(sample.project(alpha), cfg.tie_tol)
    thresholds = np.union1d(np.unique(sample.responses), atoms.thresholds)
    fitted = idr.fit(groups, sample.responses, thresholds)
    value = criterion.evaluate(sample, fitted, alpha, atoms)
    logger.info(
        f"Fitted index alpha={np.round(alpha, 6).tolist()} theta={tuple(round(a, 6) for a in best_theta.theta)} "
        f"criterion={value.value:.6g} (n={sample.n}, m={fitted.m}, k={fitted.k})"
    )
    return DsimFit(alpha, best_theta, fitted, value, q, cfg.tie_tol)
