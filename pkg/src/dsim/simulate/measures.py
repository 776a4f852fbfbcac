"""
src/dsim/simulate/measures.py
Error measures of a fitted model against the true scenario.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Protocol, Sequence, Union, runtime_checkable

import numpy as np

from dsim.estimation.index_opt import DsimFit
from dsim.exceptions import DsimArgumentError, DsimDimensionError
from dsim.model.predictor import Predictor
from dsim.simulate.scenarios import SimScenario, TrueModel, generate

MEASURES = ("index", "cdf", "bundled")
DEFAULT_MC_DRAWS = 5000


@runtime_checkable
class CdfModel(Protocol):
    """Anything with an index direction and paired CDF evaluation."""

    @property
    def alpha(self) -> np.ndarray: ...

    def cdf_pairs(self, z: Sequence[float], y: Sequence[float]) -> np.ndarray: ...


@dataclass(frozen=True)
class ErrorTriple:
    """
    :ivar index_err: Euclidean distance between the estimated and the true direction.
    :ivar cdf_err: Root mean squared CDF error over uniform index values and responses.
    :ivar bundled_err: Root mean squared error of x -> F(alpha'x, .) over covariates and responses.
    """

    index_err: float
    cdf_err: float
    bundled_err: float

    def __post_init__(self) -> None:
        for name in ("index_err", "cdf_err", "bundled_err"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise DsimArgumentError(f"{name} expects a finite non-negative number, but got {value}")

    def as_dict(self) -> Dict[str, float]:
        return {"index": self.index_err, "cdf": self.cdf_err, "bundled": self.bundled_err}


def errors(
    model: Union[DsimFit, CdfModel],
    scn: SimScenario,
    mc_draws: int = DEFAULT_MC_DRAWS,
    rng: Optional[np.random.Generator] = None,
) -> ErrorTriple:
    """
    Scores a model against the closed-form truth of the scenario.

    Responses are drawn from P^Y through a fresh sample of the scenario; covariates for
    the bundled error are drawn from P^X independently of them, and index values for the
    CDF error uniformly on the range of alpha_0'x over the unit cube.

    Raises:
        DsimArgumentError: If mc_draws is not a positive integer.
        DsimDimensionError: If the model and the scenario differ in dimension.
    """
    if isinstance(mc_draws, bool) or not isinstance(mc_draws, (int, np.integer)) or mc_draws < 1:
        raise DsimArgumentError(f"mc_draws expects a positive integer, but got {mc_draws!r}")
    estimate = Predictor(model) if isinstance(model, DsimFit) else model
    alpha = np.asarray(estimate.alpha, dtype=float)
    if alpha.shape != (scn.dim,):
        raise DsimDimensionError(f"model has dimension {alpha.size} but the scenario has dimension {scn.dim}")
    truth = TrueModel(scn)
    rng = rng if rng is not None else scn.rng("errors")

    y = generate(scn, mc_draws, rng=rng).responses
    x = rng.uniform(0.0, 1.0, size=(mc_draws, scn.dim))
    low, high = scn.index_range
    z = rng.uniform(low, high, size=mc_draws)

    bundled = estimate.cdf_pairs(x @ alpha, y) - truth.cdf_pairs(truth.index(x), y)
    cdf = estimate.cdf_pairs(z, y) - truth.cdf_pairs(z, y)
    return ErrorTriple(
        index_err=float(np.linalg.norm(alpha - truth.alpha)),
        cdf_err=float(np.sqrt(np.mean(cdf ** 2))),
        bundled_err=float(np.sqrt(np.mean(bundled ** 2))),
    )
