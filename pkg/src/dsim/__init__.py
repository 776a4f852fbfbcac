"""
dsim - Distributional single index model estimator.

This package estimates the index direction and the conditional distribution functions
of a distributional single index model by weighted least squares, predicts conditional
CDFs, quantiles and means, and reruns the convergence rate simulation study.
"""

from dsim.core.events import Event, EventDispatcher
from dsim.core.sample import Sample
from dsim.estimation import (
    DensityMeasure,
    DsimFit,
    EmpiricalMeasure,
    FiniteSupportMeasure,
    SearchConfig,
    WeightingMeasure,
    density_measure,
    fit_dsim,
    weighting_from_config,
)
from dsim.exceptions import (
    DsimError,
    DsimArgumentError,
    DsimConfigurationError,
    DsimDataError,
    DsimDegenerateDataError,
    DsimDimensionError,
    DsimInsufficientDataError,
    ExperimentEventError,
)
from dsim.model import Predictor, load_fit, save_fit

__version__ = "1.0.0"

__all__ = [
    # Core
    "Event",
    "EventDispatcher",
    "Sample",

    # Exceptions
    "DsimError",
    "DsimArgumentError",
    "DsimConfigurationError",
    "DsimDataError",
    "DsimDegenerateDataError",
    "DsimDimensionError",
    "DsimInsufficientDataError",
    "ExperimentEventError",

    # Estimation
    "DensityMeasure",
    "DsimFit",
    "EmpiricalMeasure",
    "FiniteSupportMeasure",
    "SearchConfig",
    "WeightingMeasure",
    "density_measure",
    "fit_dsim",
    "weighting_from_config",

    # Model
    "Predictor",
    "load_fit",
    "save_fit",
]
