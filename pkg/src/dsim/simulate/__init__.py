"""
src/dsim/simulate/__init__.py
Simulation study of the convergence rates of the estimator.
"""
from dsim.simulate.measures import ErrorTriple, errors
from dsim.simulate.rates import RateEstimate, rate_regression
from dsim.simulate.runner import ExperimentConfig, RateReport, RateRow, run_table
from dsim.simulate.scenarios import STUDY_THETAS, SimScenario, TrueModel, generate

__all__ = [
    "ErrorTriple",
    "errors",
    "RateEstimate",
    "rate_regression",
    "ExperimentConfig",
    "RateReport",
    "RateRow",
    "run_table",
    "STUDY_THETAS",
    "SimScenario",
    "TrueModel",
    "generate",
]
