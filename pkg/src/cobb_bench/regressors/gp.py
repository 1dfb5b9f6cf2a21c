"""Gaussian-process regression with a dot-product plus white-noise kernel.

``k(a, b) = sigma0_sq + a.b`` and ``noise`` on the diagonal.  Only the
predictive mean ``k*' (K + noise I)^-1 y`` is produced.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve, cholesky

from .base import FitError
from .linear import _check_xy

GRID = np.logspace(-2, 2, 13)


def dot_product_kernel(A, B, sigma0_sq: float) -> np.ndarray:
    return sigma0_sq + np.asarray(A, dtype=float) @ np.asarray(B, dtype=float).T


def _cholesky_with_jitter(K: np.ndarray) -> np.ndarray:
    try:
        return cholesky(K, lower=True)
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-10 * np.trace(K) / K.shape[0]
    for _ in range(3):
        try:
            return cholesky(K + jitter * np.eye(K.shape[0]), lower=True)
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise FitError("kernel matrix is not positive definite even with jitter")


def log_marginal_likelihood(X, y, sigma0_sq: float, noise: float) -> float:
    K = dot_product_kernel(X, X, sigma0_sq) + noise * np.eye(len(y))
    L = _cholesky_with_jitter(K)
    alpha = cho_solve((L, True), y)
    return float(-0.5 * y @ alpha - np.log(np.diag(L)).sum() - 0.5 * len(y) * np.log(2 * np.pi))


class GaussianProcess:
    def __init__(self, sigma0_sq: float = 1.0, noise: float = 1.0, optimize: str = "coarse-grid"):
        if optimize not in ("coarse-grid", "fixed"):
            raise ValueError(f"unknown optimize mode {optimize!r}")
        if sigma0_sq <= 0 or noise <= 0:
            raise ValueError("sigma0_sq and noise must be positive")
        self.sigma0_sq = float(sigma0_sq)
        self.noise = float(noise)
        self.optimize = optimize

    def fit(self, X, y, seed: int = 0) -> "GaussianProcess":
        X, y = _check_xy(X, y)
        s0, nz = self.sigma0_sq, self.noise
        if self.optimize == "coarse-grid":
            # first maximiser in (sigma0_sq, noise) row-major order
            best = -np.inf
            for a in GRID:
                for b in GRID:
                    lml = log_marginal_likelihood(X, y, a, b)
                    if lml > best:
                        best, s0, nz = lml, float(a), float(b)
        self.sigma0_sq_, self.noise_ = s0, nz
        K = dot_product_kernel(X, X, s0) + nz * np.eye(len(y))
        L = _cholesky_with_jitter(K)
        self.alpha_ = cho_solve((L, True), y)
        self.X_train_ = X
        self.log_marginal_likelihood_ = float(
            -0.5 * y @ self.alpha_ - np.log(np.diag(L)).sum() - 0.5 * len(y) * np.log(2 * np.pi)
        )
        self.n_features = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        return dot_product_kernel(X, self.X_train_, self.sigma0_sq_) @ self.alpha_

    def to_state(self) -> dict:
        return {
            "sigma0_sq": self.sigma0_sq_,
            "noise": self.noise_,
            "alpha": self.alpha_.tolist(),
            "X_train": self.X_train_.tolist(),
            "log_marginal_likelihood": self.log_marginal_likelihood_,
            "n_features": self.n_features,
        }

    def load_state(self, s: dict) -> None:
        self.sigma0_sq_ = float(s["sigma0_sq"])
        self.noise_ = float(s["noise"])
        self.alpha_ = np.array(s["alpha"], dtype=float)
        self.X_train_ = np.array(s["X_train"], dtype=float).reshape(len(self.alpha_), s["n_features"])
        self.log_marginal_likelihood_ = s["log_marginal_likelihood"]
        self.n_features = s["n_features"]
