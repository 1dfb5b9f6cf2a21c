import numpy as np
import pytest

from cobb_bench.regressors import FitError
from cobb_bench.regressors.mlp import PARAM_NAMES, MLPRegressor, forward, init_params, logistic, loss_and_grad
from cobb_bench.rng import SplitMix64

from oracles import central_differences, mlp_loss


def random_network(rng, d=2, hidden=3):
    return {
        "W1": rng.normal(size=(d, hidden)),
        "b1": rng.normal(size=hidden),
        "W2": rng.normal(size=(hidden, 1)),
        "b2": rng.normal(size=1),
    }


class TestForward:
    def test_logistic_at_zero(self):
        assert logistic(0.0) == 0.5

    def test_zero_weights(self):
        params = {k: np.zeros_like(v) for k, v in random_network(np.random.default_rng(0)).items()}
        hidden, out = forward(params, np.random.default_rng(1).normal(size=(5, 2)))
        np.testing.assert_array_equal(hidden, 0.5)
        np.testing.assert_array_equal(out, 0.0)

    def test_init_bounds(self):
        p = init_params(18, 60, SplitMix64(0))
        assert p["W1"].shape == (18, 60) and p["W2"].shape == (60, 1)
        assert np.abs(p["W1"]).max() <= np.sqrt(6 / 78)
        assert np.abs(p["W2"]).max() <= np.sqrt(6 / 61)


class TestGradient:
    def test_matches_central_differences(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            params = random_network(rng)
            X, y = rng.normal(size=(4, 2)), rng.normal(size=4)
            l2 = float(rng.uniform(0, 1))
            loss, grads = loss_and_grad(params, X, y, l2)
            assert loss == pytest.approx(mlp_loss(params["W1"], params["b1"], params["W2"], params["b2"], X, y, l2), rel=1e-12)
            numeric = central_differences(lambda p: mlp_loss(p["W1"], p["b1"], p["W2"], p["b2"], X, y, l2), params, 1e-5)
            for name in PARAM_NAMES:
                scale = np.maximum(np.abs(numeric[name]), 1e-8)
                err = np.abs(grads[name] - numeric[name]) / np.maximum(scale, np.abs(grads[name]))
                assert np.all((err < 1e-5) | (np.abs(grads[name] - numeric[name]) < 1e-10)), name


class TestTraining:
    def test_loss_decreases(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(20, 3))
        y = X[:, 0] - 0.5 * X[:, 1]
        m = MLPRegressor(hidden=5, max_iter=300).fit(X, y, seed=1)
        assert m.loss_curve[-1] < m.loss_curve[0]
        assert m.n_iter == len(m.loss_curve) <= 300

    def test_early_stop_on_plateau(self):
        X = np.zeros((4, 2))
        m = MLPRegressor(hidden=2, max_iter=1000, improvement_tol=10.0).fit(X, np.zeros(4))
        assert m.n_iter == 11

    def test_seeded(self):
        rng = np.random.default_rng(4)
        X, y = rng.normal(size=(10, 2)), rng.normal(size=10)
        a = MLPRegressor(hidden=4, max_iter=50).fit(X, y, seed=5)
        b = MLPRegressor(hidden=4, max_iter=50).fit(X, y, seed=5)
        c = MLPRegressor(hidden=4, max_iter=50).fit(X, y, seed=6)
        np.testing.assert_array_equal(a.predict(X), b.predict(X))
        assert not np.array_equal(a.predict(X), c.predict(X))

    def test_divergence_is_fit_error(self):
        X = np.array([[1e200, 1.0], [1.0, 1e200]])
        with pytest.raises(FitError), np.errstate(over="ignore", invalid="ignore"):
            MLPRegressor(hidden=2).fit(X, np.array([1e300, -1e300]))

    def test_activation_restricted(self):
        with pytest.raises(ValueError):
            MLPRegressor(activation="relu")
