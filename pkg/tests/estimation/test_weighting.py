import numpy as np
import pytest
from scipy import stats
from dsim.estimation.weighting import (
    DensityMeasure,
    EmpiricalMeasure,
    FiniteSupportMeasure,
    ResolvedAtoms,
    density_measure,
    weighting_from_config,
)
from dsim.exceptions import DsimArgumentError, DsimConfigurationError


class TestResolvedAtoms:
    def test_total_mass(self):
        atoms = ResolvedAtoms(np.array([0.0, 1.0, 2.0]), np.array([0.5, 0.25, 0.25]))
        assert len(atoms) == 3
        assert atoms.total_mass == pytest.approx(1.0)

    @pytest.mark.parametrize(
        "thresholds, weights",
        [
            ([1.0, 0.0], [1.0, 1.0]),
            ([0.0, 0.0], [1.0, 1.0]),
            ([0.0, 1.0], [1.0, 0.0]),
            ([0.0, 1.0], [1.0]),
            ([], []),
        ],
    )
    def test_invalid_atoms(self, thresholds, weights):
        with pytest.raises(DsimArgumentError):
            ResolvedAtoms(np.array(thresholds), np.array(weights))


class TestEmpiricalMeasure:
    def test_resolve_merges_ties(self):
        atoms = EmpiricalMeasure().resolve([3.0, 1.0, 3.0, 2.0])
        np.testing.assert_array_equal(atoms.thresholds, [1.0, 2.0, 3.0])
        np.testing.assert_allclose(atoms.weights, [0.25, 0.25, 0.5])

    def test_scaled(self):
        atoms = EmpiricalMeasure().scaled(4.0).resolve([1.0, 2.0])
        np.testing.assert_allclose(atoms.weights, [2.0, 2.0])
        assert EmpiricalMeasure().scaled(4.0).descriptor() == {"type": "empirical", "scale": 4.0}

    def test_resolve_empty(self):
        with pytest.raises(DsimArgumentError):
            EmpiricalMeasure().resolve([])


class TestFiniteSupportMeasure:
    def test_resolve_ignores_responses(self):
        measure = FiniteSupportMeasure(((0.0, 1.0), (2.0, 3.0)))
        atoms = measure.resolve([100.0])
        np.testing.assert_array_equal(atoms.thresholds, [0.0, 2.0])
        np.testing.assert_array_equal(atoms.weights, [1.0, 3.0])

    def test_invalid_atoms(self):
        with pytest.raises(DsimConfigurationError):
            FiniteSupportMeasure(((1.0, 1.0), (0.0, 1.0)))
        with pytest.raises(DsimConfigurationError):
            FiniteSupportMeasure(((0.0, -1.0),))
        with pytest.raises(DsimConfigurationError):
            FiniteSupportMeasure(())


class TestDensityMeasure:
    def test_uniform_midpoints(self):
        atoms = density_measure("uniform", 0.0, 1.0, quad_points=4).resolve([])
        np.testing.assert_allclose(atoms.thresholds, [0.125, 0.375, 0.625, 0.875])
        np.testing.assert_allclose(atoms.weights, [0.25] * 4)

    def test_default_quadrature_mass(self):
        atoms = density_measure("truncated_normal", -4.0, 10.0, {"mean": 0.0, "sd": 2.0}).resolve([])
        assert len(atoms) == 512
        expected = stats.norm(0, 2).cdf(10.0) - stats.norm(0, 2).cdf(-4.0)
        assert atoms.total_mass == pytest.approx(expected, rel=1e-4)

    def test_zero_density_atoms_are_dropped(self):
        measure = DensityMeasure(-1.0, 1.0, lambda t: (t > 0).astype(float), quad_points=4)
        atoms = measure.resolve([])
        np.testing.assert_allclose(atoms.thresholds, [0.25, 0.75])

    def test_invalid_density(self):
        with pytest.raises(DsimConfigurationError):
            DensityMeasure(0.0, 1.0, lambda t: -np.ones_like(t)).resolve([])
        with pytest.raises(DsimConfigurationError):
            DensityMeasure(0.0, 1.0, lambda t: np.zeros_like(t)).resolve([])
        with pytest.raises(DsimConfigurationError):
            DensityMeasure(1.0, 0.0, lambda t: np.ones_like(t))
        with pytest.raises(DsimConfigurationError):
            DensityMeasure(0.0, 1.0, lambda t: np.ones_like(t), quad_points=1)

    def test_custom_density_has_no_descriptor(self):
        with pytest.raises(DsimConfigurationError):
            DensityMeasure(0.0, 1.0, lambda t: np.ones_like(t)).descriptor()


class TestWeightingFromConfig:
    @pytest.mark.parametrize(
        "config",
        [
            {"type": "empirical"},
            {"type": "finite", "atoms": [[0.0, 1.0], [1.0, 2.0]]},
            {"type": "density", "a": 0.0, "b": 50.0, "name": "truncated_gamma",
             "params": {"shape": 3.0, "scale": 1.0}, "quad_points": 64},
            {"type": "density", "a": -10.0, "b": 10.0, "name": "uniform", "params": {},
             "quad_points": 512, "scale": 2.0},
        ],
    )
    def test_descriptor_reproduces_config(self, config):
        assert weighting_from_config(config).descriptor() == config

    @pytest.mark.parametrize(
        "config",
        [
            {"type": "lebesgue"},
            {"type": "finite"},
            {"type": "finite", "atoms": [[0.0]]},
            {"type": "density", "a": 0.0, "b": 1.0, "name": "cauchy"},
            {"type": "density", "a": 0.0, "name": "uniform"},
            {"type": "empirical", "scale": -1.0},
            ["empirical"],
        ],
    )
    def test_invalid_config(self, config):
        with pytest.raises(DsimConfigurationError):
            weighting_from_config(config)
