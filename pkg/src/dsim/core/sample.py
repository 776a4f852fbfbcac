"""
src/dsim/core/sample.py
The observed data (X_i, Y_i), i = 1..n.
"""
from dataclasses import dataclass

import numpy as np

from dsim.core.utils import validate_finite_array
from dsim.exceptions import DsimArgumentError, DsimDimensionError


@dataclass(frozen=True, eq=False)
class Sample:
    """
    n covariate rows paired with scalar responses.

    :ivar covariates: Array of shape (n, d).
    :ivar responses: Array of shape (n,).
    """

    covariates: np.ndarray
    responses: np.ndarray

    def __post_init__(self) -> None:
        covariates = validate_finite_array("covariates", self.covariates, ndim=2).copy()
        responses = validate_finite_array("responses", self.responses, ndim=1).copy()
        if covariates.shape[0] != responses.shape[0]:
            raise DsimArgumentError(
                f"covariates has {covariates.shape[0]} rows but responses has "
                f"{responses.shape[0]} entries"
            )
        if covariates.shape[0] == 0:
            raise DsimArgumentError("Sample expects at least one observation, but got none")
        covariates.setflags(write=False)
        responses.setflags(write=False)
        object.__setattr__(self, "covariates", covariates)
        object.__setattr__(self, "responses", responses)

    @property
    def n(self) -> int:
        return int(self.responses.shape[0])

    @property
    def dim(self) -> int:
        return int(self.covariates.shape[1])

    def project(self, alpha: np.ndarray) -> np.ndarray:
        """Index values alpha'X_i for every observation."""
        alpha = np.asarray(alpha, dtype=float)
        if alpha.shape != (self.dim,):
            raise DsimDimensionError(
                f"alpha expects {self.dim} components, but got shape {alpha.shape}"
            )
        return self.covariates @ alpha

    def with_responses(self, responses: np.ndarray) -> "Sample":
        """Returns a sample with the same covariates and new responses."""
        return Sample(np.array(self.covariates), np.asarray(responses, dtype=float))
