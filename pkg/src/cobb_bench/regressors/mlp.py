"""One-hidden-layer perceptron with logistic units, trained full-batch with Adam."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..rng import SplitMix64
from .base import FitError
from .linear import _check_xy

PARAM_NAMES = ("W1", "b1", "W2", "b2")


def logistic(x):
    return expit(x)


def init_params(n_in: int, n_hidden: int, rng: SplitMix64) -> dict[str, np.ndarray]:
    """Uniform in +-sqrt(6 / (fan_in + fan_out)) per layer, drawn W1, b1, W2, b2."""
    out = {}
    for (w, b), (fan_in, fan_out) in zip((("W1", "b1"), ("W2", "b2")), ((n_in, n_hidden), (n_hidden, 1))):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        out[w] = rng.uniform(-bound, bound, fan_in * fan_out).reshape(fan_in, fan_out)
        out[b] = rng.uniform(-bound, bound, fan_out)
    return out


def forward(params: dict, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    hidden = logistic(X @ params["W1"] + params["b1"])
    return hidden, hidden @ params["W2"][:, 0] + params["b2"][0]


def loss_and_grad(params: dict, X: np.ndarray, y: np.ndarray, l2_alpha: float):
    """``mean((out - y)^2) / 2 + l2_alpha * (|W1|^2 + |W2|^2) / (2n)`` and its gradient."""
    n = X.shape[0]
    hidden, out = forward(params, X)
    err = out - y
    loss = 0.5 * np.mean(err**2) + 0.5 * l2_alpha * (np.sum(params["W1"] ** 2) + np.sum(params["W2"] ** 2)) / n
    d_out = err / n
    grads = {
        "W2": hidden.T @ d_out[:, None] + l2_alpha * params["W2"] / n,
        "b2": np.array([d_out.sum()]),
    }
    d_z = np.outer(d_out, params["W2"][:, 0]) * hidden * (1.0 - hidden)
    grads["W1"] = X.T @ d_z + l2_alpha * params["W1"] / n
    grads["b1"] = d_z.sum(axis=0)
    return float(loss), grads


class MLPRegressor:
    def __init__(
        self,
        hidden: int = 60,
        activation: str = "logistic",
        learning_rate_init: float = 0.003,
        max_iter: int = 1000,
        n_iter_no_change: int = 10,
        improvement_tol: float = 1e-4,
        l2_alpha: float = 1e-4,
        beta_1: float = 0.9,
        beta_2: float = 0.999,
        adam_epsilon: float = 1e-8,
    ):
        if activation != "logistic":
            raise ValueError("only the logistic activation is supported")
        self.hidden = int(hidden)
        self.learning_rate_init = float(learning_rate_init)
        self.max_iter = int(max_iter)
        self.n_iter_no_change = int(n_iter_no_change)
        self.improvement_tol = float(improvement_tol)
        self.l2_alpha = float(l2_alpha)
        self.beta_1 = float(beta_1)
        self.beta_2 = float(beta_2)
        self.adam_epsilon = float(adam_epsilon)

    def fit(self, X, y, seed: int = 0) -> "MLPRegressor":
        X, y = _check_xy(X, y)
        params = init_params(X.shape[1], self.hidden, SplitMix64(seed))
        m = {k: np.zeros_like(v) for k, v in params.items()}
        v = {k: np.zeros_like(p) for k, p in params.items()}
        best = np.inf
        stale = 0
        self.loss_curve = []
        for t in range(1, self.max_iter + 1):
            loss, grads = loss_and_grad(params, X, y, self.l2_alpha)
            if not np.isfinite(loss):
                raise FitError(f"MLP loss diverged at epoch {t}")
            self.loss_curve.append(loss)
            step = self.learning_rate_init * np.sqrt(1 - self.beta_2**t) / (1 - self.beta_1**t)
            for k in PARAM_NAMES:
                m[k] = self.beta_1 * m[k] + (1 - self.beta_1) * grads[k]
                v[k] = self.beta_2 * v[k] + (1 - self.beta_2) * grads[k] ** 2
                params[k] = params[k] - step * m[k] / (np.sqrt(v[k]) + self.adam_epsilon)
            stale = stale + 1 if loss > best - self.improvement_tol else 0
            best = min(best, loss)
            if stale >= self.n_iter_no_change:
                break
        self.n_iter = len(self.loss_curve)
        self.params = params
        self.n_features = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        return forward(self.params, np.asarray(X, dtype=float))[1]

    def to_state(self) -> dict:
        return {
            "params": {k: p.tolist() for k, p in self.params.items()},
            "n_iter": self.n_iter,
            "n_features": self.n_features,
        }

    def load_state(self, s: dict) -> None:
        self.params = {k: np.array(p, dtype=float) for k, p in s["params"].items()}
        self.n_iter = s["n_iter"]
        self.n_features = s["n_features"]
