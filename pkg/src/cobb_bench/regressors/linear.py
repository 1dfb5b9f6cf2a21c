"""Least squares, ridge, and coordinate-descent lasso.  The intercept is never penalised."""

from __future__ import annotations

import warnings

import numpy as np

from ..rng import SplitMix64
from .base import ConvergenceWarning


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
        raise ValueError(f"X shape {X.shape} does not match {y.shape[0]} targets")
    return X, y


def soft_threshold(x: float, t: float) -> float:
    return float(np.sign(x) * max(abs(x) - t, 0.0))


class LinearModel:
    """Minimises ``||y - Xw - b||^2 + alpha ||w||^2``.

    ``alpha = 0`` is ordinary least squares; rank-deficient problems get the
    minimum-norm ``w``.
    """

    def __init__(self, alpha: float = 0.0):
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        self.alpha = float(alpha)

    def fit(self, X, y, seed: int = 0) -> "LinearModel":
        X, y = _check_xy(X, y)
        x_mean = X.mean(axis=0)
        y_mean = y.mean()
        Xc = X - x_mean
        yc = y - y_mean
        if self.alpha > 0:
            d = X.shape[1]
            A = np.vstack([Xc, np.sqrt(self.alpha) * np.eye(d)])
            rhs = np.concatenate([yc, np.zeros(d)])
        else:
            A, rhs = Xc, yc
        self.coef = np.linalg.lstsq(A, rhs, rcond=None)[0]
        self.intercept = float(y_mean - x_mean @ self.coef)
        self.n_features = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef + self.intercept

    def to_state(self) -> dict:
        return {"coef": self.coef.tolist(), "intercept": self.intercept, "n_features": self.n_features}

    def load_state(self, s: dict) -> None:
        self.coef = np.array(s["coef"], dtype=float)
        self.intercept = float(s["intercept"])
        self.n_features = s["n_features"]


class Lasso:
    """Minimises ``(1/2n)||y - Xw - b||^2 + alpha ||w||_1`` by coordinate descent.

    Each sweep visits every coordinate once; with ``selection="random"`` the
    visiting order is a fresh permutation drawn from the model seed.  Fitting
    stops when the largest coordinate change in a sweep is below ``tol``.
    """

    def __init__(self, alpha: float = 0.1, max_iter: int = 10000, selection: str = "random", tol: float = 1e-4):
        if selection not in ("random", "cyclic"):
            raise ValueError(f"unknown selection {selection!r}")
        self.alpha = float(alpha)
        self.max_iter = int(max_iter)
        self.selection = selection
        self.tol = float(tol)

    def fit(self, X, y, seed: int = 0) -> "Lasso":
        X, y = _check_xy(X, y)
        n, d = X.shape
        x_mean = X.mean(axis=0)
        y_mean = y.mean()
        Xc = X - x_mean
        resid = y - y_mean
        col_sq = np.sum(Xc**2, axis=0) / n
        w = np.zeros(d)
        rng = SplitMix64(seed)

        self.converged = False
        self.n_iter = 0
        for sweep in range(1, self.max_iter + 1):
            order = rng.permutation(d) if self.selection == "random" else range(d)
            max_change = 0.0
            for j in order:
                if col_sq[j] == 0.0:
                    continue
                old = w[j]
                rho = Xc[:, j] @ resid / n + col_sq[j] * old
                new = soft_threshold(rho, self.alpha) / col_sq[j]
                if new != old:
                    resid -= Xc[:, j] * (new - old)
                    w[j] = new
                    max_change = max(max_change, abs(new - old))
            self.n_iter = sweep
            if max_change < self.tol:
                self.converged = True
                break
        if not self.converged:
            warnings.warn(
                f"lasso did not converge in {self.max_iter} sweeps (last change {max_change:.3g})",
                ConvergenceWarning,
                stacklevel=2,
            )
        self.coef = w
        self.intercept = float(y_mean - x_mean @ w)
        self.n_features = d
        return self

    def predict(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef + self.intercept

    def to_state(self) -> dict:
        return {
            "coef": self.coef.tolist(),
            "intercept": self.intercept,
            "n_features": self.n_features,
            "converged": self.converged,
            "n_iter": self.n_iter,
        }

    def load_state(self, s: dict) -> None:
        self.coef = np.array(s["coef"], dtype=float)
        self.intercept = float(s["intercept"])
        self.n_features = s["n_features"]
        self.converged = s["converged"]
        self.n_iter = s["n_iter"]
