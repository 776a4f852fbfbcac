"""
src/dsim/estimation/weighting.py
Weighting measures Q for the least squares criterion.

Every supported measure is reduced to a finite list of (threshold, weight) atoms.
Continuous measures on an interval are discretised with the midpoint rule; their
densities are not normalised, since scaling Q scales the criterion uniformly and
leaves the minimiser unchanged.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from dsim.core.utils import validate_finite_array, validate_positive
from dsim.exceptions import DsimArgumentError, DsimConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_QUAD_POINTS = 512
DENSITY_NAMES = ("uniform", "truncated_normal", "truncated_gamma")

Density = Callable[[np.ndarray], Any]


@dataclass(frozen=True, eq=False)
class ResolvedAtoms:
    """
    Discrete reduction of a weighting measure.

    :ivar thresholds: Strictly increasing threshold values t_1 < ... < t_k.
    :ivar weights: Positive weights, one per threshold.
    """

    thresholds: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        thresholds = validate_finite_array("thresholds", self.thresholds).copy()
        weights = validate_finite_array("weights", self.weights).copy()
        if thresholds.shape != weights.shape:
            raise DsimArgumentError(
                f"thresholds has {thresholds.size} entries but weights has {weights.size}"
            )
        if thresholds.size == 0:
            raise DsimArgumentError("ResolvedAtoms expects at least one atom, but got none")
        if np.any(np.diff(thresholds) <= 0):
            raise DsimArgumentError("thresholds expects strictly increasing values")
        if np.any(weights <= 0):
            raise DsimArgumentError("weights expects strictly positive values")
        thresholds.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "weights", weights)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def __len__(self) -> int:
        return int(self.thresholds.size)


class WeightingMeasure(ABC):
    """A Borel measure Q that can be reduced to finitely many weighted thresholds."""

    @abstractmethod
    def resolve(self, responses: Sequence[float]) -> ResolvedAtoms:
        """Reduces the measure to atoms; responses are used only by the empirical measure."""

    @abstractmethod
    def scaled(self, factor: float) -> "WeightingMeasure":
        """Returns the measure multiplied by factor > 0."""

    @abstractmethod
    def descriptor(self) -> Dict[str, Any]:
        """Returns the JSON configuration form of the measure."""


@dataclass(frozen=True)
class EmpiricalMeasure(WeightingMeasure):
    """The empirical distribution of the responses, optionally scaled."""

    scale: float = 1.0

    def __post_init__(self) -> None:
        validate_positive("scale", self.scale)

    def resolve(self, responses: Sequence[float]) -> ResolvedAtoms:
        values = validate_finite_array("responses", responses)
        if values.size == 0:
            raise DsimArgumentError("responses expects at least one value for the empirical measure")
        thresholds, counts = np.unique(values, return_counts=True)
        weights = counts / values.size
        if self.scale != 1.0:
            weights = weights * self.scale
        return ResolvedAtoms(thresholds, weights)

    def scaled(self, factor: float) -> "EmpiricalMeasure":
        validate_positive("factor", factor)
        return EmpiricalMeasure(scale=self.scale * factor)

    def descriptor(self) -> Dict[str, Any]:
        descriptor: Dict[str, Any] = {"type": "empirical"}
        if self.scale != 1.0:
            descriptor["scale"] = self.scale
        return descriptor


@dataclass(frozen=True)
class FiniteSupportMeasure(WeightingMeasure):
    """A measure putting mass w on finitely many points t."""

    atoms: Tuple[Tuple[float, float], ...]

    def __post_init__(self) -> None:
        try:
            atoms = tuple((float(t), float(w)) for t, w in self.atoms)
        except (TypeError, ValueError) as e:
            raise DsimConfigurationError(f"atoms expects (threshold, weight) pairs, but got {e}") from e
        if not atoms:
            raise DsimConfigurationError("atoms expects at least one (threshold, weight) pair")
        thresholds = np.array([t for t, _ in atoms])
        weights = np.array([w for _, w in atoms])
        if not (np.all(np.isfinite(thresholds)) and np.all(np.isfinite(weights))):
            raise DsimConfigurationError("atoms expects finite thresholds and weights")
        if np.any(np.diff(thresholds) <= 0):
            raise DsimConfigurationError("atoms expects strictly increasing thresholds")
        if np.any(weights <= 0):
            raise DsimConfigurationError("atoms expects strictly positive weights")
        object.__setattr__(self, "atoms", atoms)

    def resolve(self, responses: Sequence[float]) -> ResolvedAtoms:
        return ResolvedAtoms(
            np.array([t for t, _ in self.atoms]), np.array([w for _, w in self.atoms])
        )

    def scaled(self, factor: float) -> "FiniteSupportMeasure":
        validate_positive("factor", factor)
        return FiniteSupportMeasure(tuple((t, w * factor) for t, w in self.atoms))

    def descriptor(self) -> Dict[str, Any]:
        return {"type": "finite", "atoms": [[t, w] for t, w in self.atoms]}


@dataclass(frozen=True)
class DensityMeasure(WeightingMeasure):
    """
    A measure on [a, b] with a Lebesgue density, discretised by the midpoint rule.

    :ivar a: Left end of the support.
    :ivar b: Right end of the support.
    :ivar density: Vectorised non-negative density; need not integrate to one.
    :ivar quad_points: Number of equal subintervals of [a, b].
    :ivar name: Name of a built-in density, recorded for serialization.
    :ivar params: Parameters of the built-in density.
    :ivar scale: Multiplier applied to every weight.
    """

    a: float
    b: float
    density: Density
    quad_points: int = DEFAULT_QUAD_POINTS
    name: Optional[str] = None
    params: Mapping[str, float] = field(default_factory=dict)
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.a < self.b:
            raise DsimConfigurationError(
                f"density support expects finite a < b, but got a={self.a}, b={self.b}"
            )
        if isinstance(self.quad_points, bool) or not isinstance(self.quad_points, (int, np.integer)):
            raise DsimConfigurationError(
                f"quad_points expects an integer, but got {type(self.quad_points).__name__}"
            )
        if self.quad_points < 2:
            raise DsimConfigurationError(f"quad_points expects at least 2, but got {self.quad_points}")
        if not callable(self.density):
            raise DsimConfigurationError("density expects a callable")
        validate_positive("scale", self.scale)

    def resolve(self, responses: Sequence[float]) -> ResolvedAtoms:
        width = (self.b - self.a) / self.quad_points
        midpoints = self.a + (np.arange(self.quad_points) + 0.5) * width
        values = np.broadcast_to(np.asarray(self.density(midpoints), dtype=float), midpoints.shape)
        if not np.all(np.isfinite(values)):
            raise DsimConfigurationError("density returned a non-finite value on the quadrature grid")
        if np.any(values < 0):
            raise DsimConfigurationError("density returned a negative value on the quadrature grid")
        weights = values * width * self.scale
        keep = weights > 0
        if not np.any(keep):
            raise DsimConfigurationError("density measure has zero total mass")
        logger.debug(f"Resolved density measure to {int(keep.sum())} of {self.quad_points} atoms")
        # Q-null midpoints carry no weight and are left out of the atom list.
        return ResolvedAtoms(midpoints[keep], weights[keep])

    def scaled(self, factor: float) -> "DensityMeasure":
        validate_positive("factor", factor)
        return DensityMeasure(
            self.a, self.b, self.density, self.quad_points, self.name, dict(self.params),
            self.scale * factor,
        )

    def descriptor(self) -> Dict[str, Any]:
        if self.name is None:
            raise DsimConfigurationError("a density measure with a custom density has no JSON form")
        descriptor: Dict[str, Any] = {
            "type": "density",
            "a": self.a,
            "b": self.b,
            "name": self.name,
            "params": dict(self.params),
            "quad_points": int(self.quad_points),
        }
        if self.scale != 1.0:
            descriptor["scale"] = self.scale
        return descriptor


def named_density(name: str, params: Mapping[str, float]) -> Density:
    """
    Returns the un-normalised density of a built-in family.

    ``uniform`` has density 1 / (b - a) once bound to an interval, so the caller passes
    the interval through params ``a`` and ``b``; the other families take their own
    parameters with the defaults used in the simulation study.
    """
    if name == "uniform":
        width = float(params["b"]) - float(params["a"])
        return lambda t: np.full(np.shape(t), 1.0 / width)
    if name == "truncated_normal":
        dist = stats.norm(loc=float(params.get("mean", 0.0)), scale=float(params.get("sd", 2.0)))
        return dist.pdf
    if name == "truncated_gamma":
        dist = stats.gamma(a=float(params.get("shape", 3.0)), scale=float(params.get("scale", 1.0)))
        return dist.pdf
    raise DsimConfigurationError(f"density name expects one of {DENSITY_NAMES}, but got {name!r}")


def density_measure(
    name: str,
    a: float,
    b: float,
    params: Optional[Mapping[str, float]] = None,
    quad_points: int = DEFAULT_QUAD_POINTS,
) -> DensityMeasure:
    """Builds a DensityMeasure for one of the built-in density families."""
    params = dict(params or {})
    bound = dict(params, a=a, b=b) if name == "uniform" else params
    try:
        density = named_density(name, bound)
    except (TypeError, ValueError) as e:
        raise DsimConfigurationError(f"invalid parameters for density {name!r}: {e}") from e
    return DensityMeasure(float(a), float(b), density, quad_points, name, params)


def weighting_from_config(config: Mapping[str, Any]) -> WeightingMeasure:
    """
    Parses the JSON configuration form of a weighting measure.

    Accepted forms::

        {"type": "empirical"}
        {"type": "finite", "atoms": [[t, w], ...]}
        {"type": "density", "a": ..., "b": ..., "name": "uniform|truncated_normal|truncated_gamma",
         "params": {...}, "quad_points": ...}

    An optional ``scale`` multiplies all weights.
    """
    if not isinstance(config, Mapping):
        raise DsimConfigurationError(
            f"weighting config expects a JSON object, but got {type(config).__name__}"
        )
    kind = config.get("type")
    scale = config.get("scale", 1.0)
    try:
        if kind == "empirical":
            measure: WeightingMeasure = EmpiricalMeasure()
        elif kind == "finite":
            measure = FiniteSupportMeasure(tuple(tuple(atom) for atom in config["atoms"]))
        elif kind == "density":
            measure = density_measure(
                str(config["name"]),
                float(config["a"]),
                float(config["b"]),
                config.get("params", {}),
                int(config.get("quad_points", DEFAULT_QUAD_POINTS)),
            )
        else:
            raise DsimConfigurationError(
                f"weighting type expects 'empirical', 'finite' or 'density', but got {kind!r}"
            )
        return measure if scale == 1.0 else measure.scaled(float(scale))
    except KeyError as e:
        raise DsimConfigurationError(f"weighting config of type {kind!r} is missing key {e}") from e
    except (TypeError, ValueError, DsimArgumentError) as e:
        raise DsimConfigurationError(f"invalid weighting config: {e}") from e
