"""k-nearest neighbours, a single decision tree, and the mean baseline."""

from __future__ import annotations

import numpy as np

from .linear import _check_xy
from .tree import RegressionTree


class KNeighbors:
    """Mean target of the ``k`` nearest training rows (Euclidean); ties go to the lower index."""

    def __init__(self, k: int = 3):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = int(k)

    def fit(self, X, y, seed: int = 0):
        X, y = _check_xy(X, y)
        if X.shape[0] < self.k:
            raise ValueError(f"knn needs at least k={self.k} training rows, got {X.shape[0]}")
        self.X_train_, self.y_train_ = X, y
        self.n_features = X.shape[1]
        return self

    def neighbors(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        d2 = np.sum((X[:, None, :] - self.X_train_[None, :, :]) ** 2, axis=2)
        return np.argsort(d2, axis=1, kind="stable")[:, : self.k]

    def predict(self, X) -> np.ndarray:
        return self.y_train_[self.neighbors(X)].mean(axis=1)

    def to_state(self) -> dict:
        return {"X_train": self.X_train_.tolist(), "y_train": self.y_train_.tolist(), "n_features": self.n_features}

    def load_state(self, s: dict) -> None:
        self.y_train_ = np.array(s["y_train"], dtype=float)
        self.X_train_ = np.array(s["X_train"], dtype=float).reshape(len(self.y_train_), s["n_features"])
        self.n_features = s["n_features"]


class DecisionTree:
    def __init__(self, max_depth: int | None = 4, criterion: str = "mse"):
        self.max_depth = max_depth
        self.criterion = criterion

    def fit(self, X, y, seed: int = 0):
        self.tree = RegressionTree(self.criterion, self.max_depth).fit(X, y)
        self.n_features = self.tree.n_features
        return self

    def predict(self, X) -> np.ndarray:
        return self.tree.predict(X)

    def to_state(self) -> dict:
        return {"tree": self.tree.to_state(), "n_features": self.n_features}

    def load_state(self, s: dict) -> None:
        self.tree = RegressionTree.from_state(s["tree"])
        self.n_features = s["n_features"]


class MeanBaseline:
    def fit(self, X, y, seed: int = 0):
        X, y = _check_xy(X, y)
        self.mean_ = float(y.mean())
        self.n_features = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        return np.full(np.asarray(X).shape[0], self.mean_)

    def to_state(self) -> dict:
        return {"mean": self.mean_, "n_features": self.n_features}

    def load_state(self, s: dict) -> None:
        self.mean_ = float(s["mean"])
        self.n_features = s["n_features"]
