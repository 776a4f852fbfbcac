import math

import numpy as np
import pytest
from scipy import stats
from dsim.estimation.index_opt import SearchConfig, fit_dsim
from dsim.exceptions import DsimArgumentError, DsimDimensionError
from dsim.simulate.measures import CdfModel, ErrorTriple, errors
from dsim.simulate.scenarios import SimScenario, TrueModel, generate


class ShiftedModel:
    """The true CDFs of a scenario, reported under another index direction."""

    def __init__(self, scn, alpha):
        self._truth = TrueModel(scn)
        self.alpha = np.asarray(alpha, dtype=float)

    def cdf_pairs(self, z, y):
        return self._truth.cdf_pairs(z, y)


class TestErrorTriple:
    def test_as_dict(self):
        assert ErrorTriple(0.1, 0.2, 0.3).as_dict() == {"index": 0.1, "cdf": 0.2, "bundled": 0.3}

    @pytest.mark.parametrize("values", [(-0.1, 0.0, 0.0), (0.0, math.nan, 0.0), (0.0, 0.0, math.inf)])
    def test_invalid_values(self, values):
        with pytest.raises(DsimArgumentError):
            ErrorTriple(*values)


class TestErrors:
    @pytest.mark.parametrize("noise", ["gaussian", "exponential"])
    def test_truth_has_zero_errors(self, noise):
        scn = SimScenario.from_angles((math.pi / 3,), noise=noise)
        model = TrueModel(scn)
        assert isinstance(model, CdfModel)
        assert errors(model, scn, mc_draws=2000) == ErrorTriple(0.0, 0.0, 0.0)

    def test_antipodal_direction(self):
        scn = SimScenario.from_angles((math.pi / 4,), noise="exponential")
        result = errors(ShiftedModel(scn, -scn.alpha0), scn, mc_draws=2000)
        assert result.index_err == pytest.approx(2.0)
        assert result.cdf_err == 0.0
        assert result.bundled_err > 0.1

    def test_fitted_model_errors_are_bounded(self):
        scn = SimScenario.from_angles((math.pi / 3,), noise="gaussian", seed=4)
        fit = fit_dsim(generate(scn, 200), scn.weighting(), SearchConfig(grid_sizes=(24,)))
        result = errors(fit, scn, mc_draws=1000)
        assert 0.0 <= result.index_err <= 2.0
        assert 0.0 < result.cdf_err < 0.5
        assert 0.0 < result.bundled_err < 0.5

    def test_default_stream_is_deterministic(self):
        scn = SimScenario.from_angles((math.pi / 3,), noise="gaussian")
        model = ShiftedModel(scn, [1.0, 0.0])
        assert errors(model, scn, mc_draws=500) == errors(model, scn, mc_draws=500)

    def test_bundled_error_matches_a_riemann_sum(self):
        scn = SimScenario.from_angles((math.pi / 4,), noise="exponential")
        model = ShiftedModel(scn, [0.5, math.sqrt(3) / 2])
        truth = TrueModel(scn)

        def midpoints(count):
            return (np.arange(count) + 0.5) / count

        def square_nodes(count):
            return np.array(np.meshgrid(midpoints(count), midpoints(count))).reshape(2, -1).T

        # P^Y on a grid of covariates times a grid of noise quantiles; P^X on a finer grid.
        y = np.outer((square_nodes(20) @ scn.alpha0) ** 3, stats.expon.ppf(midpoints(50))).ravel()
        first = second = 0.0
        nodes = square_nodes(40)
        for row in nodes:
            estimate = model.cdf_pairs(np.full(y.size, row @ model.alpha), y)
            exact = truth.cdf_pairs(np.full(y.size, row @ scn.alpha0), y)
            squares = (estimate - exact) ** 2
            first += squares.sum()
            second += (squares * squares).sum()
        count = nodes.shape[0] * y.size
        mean = first / count
        variance = second / count - mean * mean

        mc_draws = 5000
        stderr = math.sqrt(variance / mc_draws) / (2 * math.sqrt(mean))
        result = errors(model, scn, mc_draws=mc_draws)
        assert abs(result.bundled_err - math.sqrt(mean)) <= 3 * stderr

    def test_dimension_mismatch(self):
        scn = SimScenario.from_angles((math.pi / 3,))
        other = TrueModel(SimScenario.from_angles((1.0, 1.0)))
        with pytest.raises(DsimDimensionError):
            errors(other, scn, mc_draws=10)

    @pytest.mark.parametrize("mc_draws", [0, -5, 1.5, True])
    def test_invalid_mc_draws(self, mc_draws):
        scn = SimScenario.from_angles((math.pi / 3,))
        with pytest.raises(DsimArgumentError):
            errors(TrueModel(scn), scn, mc_draws=mc_draws)
