import numpy as np
import pytest

from cobb_bench.regressors.svr import LinearSVR, best_intercept, svr_primal_objective

from oracles import svr_dual_reference, svr_primal


def tiny_instances(count, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n, d = int(rng.integers(2, 7)), int(rng.integers(1, 3))
        X = rng.normal(size=(n, d))
        y = X @ rng.normal(size=d) + rng.normal(size=n)
        yield X, y


class TestHandCases:
    def test_symmetric_pair(self):
        m = LinearSVR(C=100, epsilon=0.1).fit([[-1.0], [1.0]], [-1.0, 1.0])
        assert m.coef[0] == pytest.approx(0.9, abs=1e-9)
        assert m.intercept == pytest.approx(0.0, abs=1e-9)

    def test_data_inside_tube(self):
        X = np.random.default_rng(0).normal(size=(8, 2))
        y = np.linspace(-0.05, 0.05, 8)
        m = LinearSVR(epsilon=0.1).fit(X, y)
        np.testing.assert_array_equal(m.coef, 0.0)
        p = m.predict(X)
        assert np.ptp(p) == 0.0 and np.all(np.abs(y - p) <= 0.1)

    def test_single_row(self):
        m = LinearSVR().fit([[2.0, 1.0]], [5.0])
        np.testing.assert_array_equal(m.coef, 0.0)
        assert abs(m.predict([[2.0, 1.0]])[0] - 5.0) <= 0.1

    def test_best_intercept_midpoint(self):
        assert best_intercept(np.array([0.0, 1.0]), 1.0) == pytest.approx(0.5)

    def test_primal_helpers_agree(self):
        rng = np.random.default_rng(1)
        X, y, w = rng.normal(size=(5, 2)), rng.normal(size=5), rng.normal(size=2)
        assert svr_primal_objective(w, 0.3, X, y, 10, 0.1) == pytest.approx(svr_primal(w, 0.3, X, y, 10, 0.1))

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            LinearSVR(C=0)


class TestOptimality:
    def test_primal_close_to_reference_optimum(self):
        for X, y in tiny_instances(50):
            m = LinearSVR(C=100, epsilon=0.1).fit(X, y)
            primal = svr_primal(m.coef, m.intercept, X, y, 100, 0.1)
            # weak duality: primal >= -dual_min for every feasible pair
            gap = primal + svr_dual_reference(X, y, 100, 0.1)
            assert -1e-6 <= gap < 1e-3

    def test_dual_feasible(self):
        for X, y in tiny_instances(20, seed=3):
            m = LinearSVR(C=5.0).fit(X, y)
            assert abs(m.dual_coef.sum()) < 1e-9
            assert np.all(np.abs(m.dual_coef) <= 5.0 + 1e-12)
            np.testing.assert_allclose(m.coef, X.T @ m.dual_coef, atol=1e-9)

    def test_converges_on_collinear_columns(self):
        rng = np.random.default_rng(2)
        base = rng.normal(size=(30, 2))
        X = np.column_stack([base, base @ [1.0, -1.0] + 1e-6 * rng.normal(size=30)])
        y = 10 * base[:, 0] + rng.normal(size=30)
        m = LinearSVR().fit(X, y)
        assert m.converged

    def test_deterministic(self):
        X, y = next(tiny_instances(1, seed=9))
        a, b = LinearSVR().fit(X, y), LinearSVR().fit(X, y)
        np.testing.assert_array_equal(a.coef, b.coef)
        assert a.intercept == b.intercept
