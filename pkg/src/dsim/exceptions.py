"""
src/dsim/exceptions.py
Custom exceptions for the dsim estimator.
"""


class DsimError(Exception):
    """Base exception class for all dsim errors."""
    pass


class DsimArgumentError(DsimError):
    """Exception raised when an operation is performed with an invalid argument."""
    pass


class DsimConfigurationError(DsimError):
    """Exception raised when a weighting, search or experiment configuration is invalid."""
    pass


class DsimDataError(DsimError):
    """Exception raised when a dataset or model file cannot be parsed."""
    pass


class DsimDegenerateDataError(DsimDataError):
    """Exception raised when the data cannot support a fit (n < 2 or constant response)."""
    pass


class DsimDimensionError(DsimArgumentError):
    """Exception raised when covariates do not match the dimension of a fit."""
    pass


class DsimInsufficientDataError(DsimError):
    """Exception raised when a rate regression has fewer than two usable sample sizes."""
    pass


class ExperimentEventError(DsimError):
    """Base exception class for progress event errors."""
    pass
