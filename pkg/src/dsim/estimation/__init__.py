"""
src/dsim/estimation/__init__.py
Estimation components of the distributional single index model.

This package provides the weighting measures, the isotonic distributional regression
for a fixed index, the least squares criterion and the search over index directions.
"""
from dsim.estimation.criterion import CriterionValue, evaluate, profiled, profiled_value
from dsim.estimation.idr import GroupedProjections, IdrFit, fit, group
from dsim.estimation.index_opt import (
    DsimFit,
    GridNode,
    SearchConfig,
    SphericalPoint,
    fit_dsim,
    grid_search,
    refine,
    to_cartesian,
    to_spherical,
)
from dsim.estimation.weighting import (
    DensityMeasure,
    EmpiricalMeasure,
    FiniteSupportMeasure,
    ResolvedAtoms,
    WeightingMeasure,
    density_measure,
    weighting_from_config,
)

__all__ = [
    "CriterionValue",
    "evaluate",
    "profiled",
    "profiled_value",
    "GroupedProjections",
    "IdrFit",
    "fit",
    "group",
    "DsimFit",
    "GridNode",
    "SearchConfig",
    "SphericalPoint",
    "fit_dsim",
    "grid_search",
    "refine",
    "to_cartesian",
    "to_spherical",
    "DensityMeasure",
    "EmpiricalMeasure",
    "FiniteSupportMeasure",
    "ResolvedAtoms",
    "WeightingMeasure",
    "density_measure",
    "weighting_from_config",
]
