"""
src/dsim/simulate/scenarios.py
Synthetic data for the convergence rate experiments.

Covariates are iid Uniform(0, 1) in every coordinate and the response is
Y = (alpha_0'X)^3 * eps with standard normal or standard exponential noise eps.
"""

import hashlib
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from dsim.core.sample import Sample
from dsim.core.utils import validate_finite_array
from dsim.estimation.index_opt import SphericalPoint, to_cartesian
from dsim.estimation.weighting import EmpiricalMeasure, WeightingMeasure, density_measure
from dsim.exceptions import DsimArgumentError, DsimConfigurationError, DsimDimensionError

NOISE_KINDS = ("gaussian", "exponential")
Q_CHOICES = ("empirical", "uniform", "truncated")

STUDY_THETAS: Dict[int, Tuple[Tuple[float, ...], ...]] = {
    2: ((math.pi / 4,), (math.pi / 3,), (math.pi / 2,)),
    3: ((math.pi / 4, math.pi / 2), (math.pi / 3, math.pi / 3), (math.pi / 2, math.pi / 4)),
}

# (density name, a, b, params) of the compactly supported weighting measures per noise.
_WEIGHTING_PRESETS: Dict[Tuple[str, str], Tuple[str, float, float, Dict[str, float]]] = {
    ("gaussian", "uniform"): ("uniform", -10.0, 10.0, {}),
    ("gaussian", "truncated"): ("truncated_normal", -4.0, 10.0, {"mean": 0.0, "sd": 2.0}),
    ("exponential", "uniform"): ("uniform", 0.0, 50.0, {}),
    ("exponential", "truncated"): ("truncated_gamma", 0.0, 50.0, {"shape": 3.0, "scale": 1.0}),
}


@dataclass(frozen=True)
class SimScenario:
    """
    One simulation setting.

    :ivar dim: Number of covariates.
    :ivar theta0: Angles of the true index direction.
    :ivar noise: ``gaussian`` or ``exponential``.
    :ivar q_choice: ``empirical``, ``uniform`` or ``truncated`` weighting.
    :ivar seed: Root seed; together with the setting, n and the replicate it fixes all draws.
    """

    dim: int
    theta0: SphericalPoint
    noise: str = "gaussian"
    q_choice: str = "empirical"
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.theta0, SphericalPoint):
            object.__setattr__(self, "theta0", SphericalPoint(tuple(self.theta0), self.dim))
        if self.theta0.dim != self.dim:
            raise DsimConfigurationError(
                f"theta0 expects angles for dimension {self.dim}, but got dimension {self.theta0.dim}"
            )
        if self.dim > 1:
            *polar, azimuth = self.theta0.theta
            if any(not 0.0 <= angle <= math.pi for angle in polar) or not 0.0 <= azimuth <= 2 * math.pi:
                raise DsimConfigurationError(f"theta0 expects angles in range, but got {self.theta0.theta}")
        if self.noise not in NOISE_KINDS:
            raise DsimConfigurationError(f"noise expects one of {NOISE_KINDS}, but got {self.noise!r}")
        if self.q_choice not in Q_CHOICES:
            raise DsimConfigurationError(f"q_choice expects one of {Q_CHOICES}, but got {self.q_choice!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise DsimConfigurationError(f"seed expects a non-negative integer, but got {self.seed!r}")

    @classmethod
    def from_angles(cls, theta0: Sequence[float], **kwargs: Any) -> "SimScenario":
        """Scenario in dimension len(theta0) + 1."""
        angles = tuple(float(angle) for angle in theta0)
        dim = len(angles) + 1
        return cls(dim, SphericalPoint(angles, dim), **kwargs)

    @property
    def alpha0(self) -> np.ndarray:
        return to_cartesian(self.theta0)

    @property
    def theta_label(self) -> str:
        return ";".join(f"{angle:.6f}" for angle in self.theta0.theta)

    @property
    def index_range(self) -> Tuple[float, float]:
        """Smallest and largest value of alpha_0'x over the unit cube."""
        alpha = self.alpha0
        return float(np.minimum(alpha, 0).sum()), float(np.maximum(alpha, 0).sum())

    def weighting(self) -> WeightingMeasure:
        """The weighting measure used in the experiments for this noise and q_choice."""
        if self.q_choice == "empirical":
            return EmpiricalMeasure()
        name, a, b, params = _WEIGHTING_PRESETS[(self.noise, self.q_choice)]
        return density_measure(name, a, b, params)

    def rng(self, *key: Any) -> np.random.Generator:
        """
        Independent Philox stream for this setting and the given key.

        The weighting choice is not part of the stream id, so all weighting measures are
        compared on the same data.
        """
        label = "|".join(str(part) for part in (self.dim, self.theta_label, self.noise, *key))
        stream_id = int.from_bytes(hashlib.blake2b(label.encode(), digest_size=8).digest(), "little")
        return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(self.seed), stream_id])))

    def draw_noise(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.noise == "gaussian":
            return rng.standard_normal(size)
        return rng.standard_exponential(size)


def generate(
    scn: SimScenario,
    n: int,
    rep: int = 0,
    frozen_noise: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
) -> Sample:
    """
    Draws n observations from the scenario.

    :param rep: Replicate number; selects an independent stream.
    :param frozen_noise: If given, every eps equals this value.
    :param rng: Overrides the scenario stream for (n, rep).
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise DsimArgumentError(f"n expects a positive integer, but got {n!r}")
    rng = rng if rng is not None else scn.rng("sample", n, rep)
    covariates = rng.uniform(0.0, 1.0, size=(n, scn.dim))
    eps = np.full(n, float(frozen_noise)) if frozen_noise is not None else scn.draw_noise(rng, n)
    responses = (covariates @ scn.alpha0) ** 3 * eps
    return Sample(covariates, responses)


class TrueModel:
    """
    Closed-form conditional CDFs of a scenario.

    Exposes the same evaluation interface as the fitted predictor so that both can be
    scored by the same error measures.
    """

    def __init__(self, scn: SimScenario):
        self._scenario = scn
        self._alpha = scn.alpha0

    @property
    def alpha(self) -> np.ndarray:
        return self._alpha

    def index(self, covariates: Sequence[Sequence[float]]) -> np.ndarray:
        rows = validate_finite_array("covariates", covariates, ndim=2)
        if rows.shape[1] != self._alpha.size:
            raise DsimDimensionError(f"covariates expects {self._alpha.size} columns, but got {rows.shape[1]}")
        return rows @ self._alpha

    def cdf_pairs(self, z: Sequence[float], y: Sequence[float]) -> np.ndarray:
        """P(Y <= y_i | alpha_0'X = z_i)."""
        z = validate_finite_array("z", z)
        y = validate_finite_array("y", y)
        if z.shape != y.shape:
            raise DsimArgumentError(f"z and y expect equal lengths, but got {z.size} and {y.size}")
        scale = z ** 3
        degenerate = (y >= 0).astype(float)
        safe = np.where(scale != 0, scale, 1.0)
        with np.errstate(over="ignore"):
            ratio = y / safe
            if self._scenario.noise == "gaussian":
                values = stats.norm.cdf(y / np.abs(safe))
            else:
                positive = np.where(y >= 0, -np.expm1(-np.maximum(ratio, 0.0)), 0.0)
                negative = np.where(y <= 0, np.exp(-np.maximum(ratio, 0.0)), 1.0)
                values = np.where(scale > 0, positive, negative)
        # At z = 0 the response is 0 almost surely.
        return np.where(scale == 0, degenerate, values)
