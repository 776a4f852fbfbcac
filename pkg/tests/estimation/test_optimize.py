import numpy as np
import pytest
from dsim.estimation.optimize import bounded_simplex, golden_section


class TestGoldenSection:
    def test_smooth_minimum(self):
        result = golden_section(lambda x: (x - 1.0) ** 2, 0.0, 3.0, tol=1e-9, max_iter=200)
        assert result.x[0] == pytest.approx(1.0, abs=1e-6)
        assert result.value == pytest.approx(0.0, abs=1e-12)

    def test_reversed_bracket(self):
        result = golden_section(lambda x: (x - 1.0) ** 2, 3.0, 0.0, tol=1e-9, max_iter=200)
        assert result.x[0] == pytest.approx(1.0, abs=1e-6)

    def test_minimum_at_an_endpoint(self):
        result = golden_section(lambda x: x, 0.0, 1.0, tol=1e-6, max_iter=100)
        assert result.x[0] == 0.0
        assert result.value == 0.0

    def test_step_function_keeps_the_best_point(self):
        values = []

        def f(x):
            value = 0.0 if 0.4 <= x <= 0.45 else 1.0
            values.append(value)
            return value

        result = golden_section(f, 0.0, 1.0, tol=1e-4, max_iter=100)
        assert result.value == min(values)

    def test_evaluation_budget(self):
        calls = []
        result = golden_section(lambda x: calls.append(x) or (x - 0.3) ** 2, 0.0, 1.0, tol=0.0, max_iter=10)
        assert result.evaluations == 10
        assert len(calls) == 10


class TestBoundedSimplex:
    def test_interior_minimum(self):
        f = lambda x: (x[0] - 1.0) ** 2 + (x[1] - 2.0) ** 2
        result = bounded_simplex(f, [0.5, 0.5], [(0.0, 3.0), (0.0, 3.0)], tol=1e-8, max_evaluations=1000)
        np.testing.assert_allclose(result.x, [1.0, 2.0], atol=1e-4)

    def test_minimum_outside_the_box(self):
        f = lambda x: (x[0] - 5.0) ** 2 + (x[1] + 1.0) ** 2
        result = bounded_simplex(f, [1.5, 1.5], [(0.0, 3.0), (0.0, 3.0)], tol=1e-8, max_evaluations=1000)
        np.testing.assert_allclose(result.x, [3.0, 0.0], atol=1e-3)
        assert np.all((result.x >= 0.0) & (result.x <= 3.0))

    def test_never_worse_than_the_start(self):
        f = lambda x: float(np.floor(4 * x[0]) + np.floor(4 * x[1]))
        start = [2.9, 2.9]
        result = bounded_simplex(f, start, [(0.0, 3.0), (0.0, 3.0)], tol=1e-6, max_evaluations=60)
        assert result.value <= f(np.array(start))
        assert result.value == f(result.x)

    def test_start_at_the_upper_bound(self):
        f = lambda x: (x[0] - 2.0) ** 2
        result = bounded_simplex(f, [3.0], [(0.0, 3.0)], tol=1e-8, max_evaluations=500)
        assert result.x[0] == pytest.approx(2.0, abs=1e-4)
