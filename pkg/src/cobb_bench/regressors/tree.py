"""Greedy CART regression trees with variance (mse) or median-deviation (mae) impurity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import SplitMix64

CRITERIA = ("mse", "mae")


def impurity(targets, criterion: str = "mse") -> float:
    """Population variance (``mse``) or mean absolute deviation from the median (``mae``)."""
    y = np.asarray(targets, dtype=float).ravel()
    if y.size == 0:
        raise ValueError("impurity of an empty target set")
    if criterion == "mse":
        return float(np.mean((y - y.mean()) ** 2))
    if criterion == "mae":
        return float(np.mean(np.abs(y - np.median(y))))
    raise ValueError(f"unknown criterion {criterion!r}")


def gain_tolerance(parent_impurity: float) -> float:
    """Gains closer than this count as ties; gains at or below it are not positive."""
    return 1e-12 * max(1.0, parent_impurity)


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    gain: float
    position: int  # left child size in sorted order


def _child_impurity_sums(Y: np.ndarray, criterion: str) -> np.ndarray:
    """For each row of ``Y`` (one feature's targets in that feature's sorted order)
    and each left size ``L = 1..m-1``, the summed child impurity
    ``L * imp(left) + (m - L) * imp(right)``.  Shape ``(d, m - 1)``.
    """
    d, m = Y.shape
    sizes = np.arange(1, m)
    left = np.arange(m)[None, :] < sizes[:, None]  # (m-1, m)
    A = Y[:, None, :]
    if criterion == "mse":
        csum = np.cumsum(Y, axis=1)[:, :-1]
        mean_l = csum / sizes
        mean_r = (Y.sum(axis=1, keepdims=True) - csum) / (m - sizes)
        centre = np.where(left, mean_l[..., None], mean_r[..., None])
        return np.sum((A - centre) ** 2, axis=2)

    sorted_l = np.sort(np.where(left, A, np.inf), axis=2)
    sorted_r = np.sort(np.where(left, np.inf, A), axis=2)

    def median(sorted_vals, count):
        lo = np.broadcast_to(((count - 1) // 2)[None, :, None], (d, m - 1, 1))
        hi = np.broadcast_to((count // 2)[None, :, None], (d, m - 1, 1))
        return 0.5 * (np.take_along_axis(sorted_vals, lo, 2) + np.take_along_axis(sorted_vals, hi, 2))

    centre = np.where(left, median(sorted_l, sizes), median(sorted_r, m - sizes))
    return np.sum(np.abs(A - centre), axis=2)


def best_split(X, y, criterion: str = "mse", features=None) -> Split | None:
    """Highest-gain axis-aligned split, or ``None`` if no split has positive gain.

    Candidate thresholds sit midway between consecutive distinct sorted values.
    Ties (within :func:`gain_tolerance`) go to the lowest feature index, then
    the smallest left size.  ``features`` restricts the search to a subset.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"X shape {X.shape} does not match {y.shape[0]} targets")
    m = X.shape[0]
    if m < 2:
        return None
    cols = np.arange(X.shape[1]) if features is None else np.sort(np.asarray(features, dtype=np.intp))
    if cols.size == 0:
        return None
    Xs = X[:, cols]
    order = np.argsort(Xs, axis=0, kind="stable")
    xs = np.take_along_axis(Xs, order, axis=0)
    valid = (xs[1:] > xs[:-1]).T  # (d, m-1)
    if not valid.any():
        return None

    parent = impurity(y, criterion)
    gains = parent - _child_impurity_sums(y[order].T, criterion) / m
    gains = np.where(valid, gains, -np.inf)
    tol = gain_tolerance(parent)
    best = gains.max()
    if not best > tol:
        return None
    flat = int(np.flatnonzero(gains.ravel() >= best - tol)[0])
    j, pos = divmod(flat, m - 1)
    lo, hi = xs[pos, j], xs[pos + 1, j]
    threshold = 0.5 * (lo + hi)
    if threshold >= hi:  # adjacent floats
        threshold = lo
    return Split(int(cols[j]), float(threshold), float(gains[j, pos]), pos + 1)


class RegressionTree:
    """Array-backed binary tree.  ``feature[i] == -1`` marks a leaf.

    Samples with ``x[feature] <= threshold`` go left.
    """

    def __init__(self, criterion: str = "mse", max_depth: int | None = None, max_features: int | None = None):
        if criterion not in CRITERIA:
            raise ValueError(f"unknown criterion {criterion!r}")
        if max_depth is not None and max_depth < 0:
            raise ValueError("max_depth must be >= 0 or None")
        self.criterion = criterion
        self.max_depth = max_depth
        self.max_features = max_features

    def fit(self, X, y, rng: SplitMix64 | None = None) -> "RegressionTree":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
            raise ValueError(f"X shape {X.shape} does not match {y.shape[0]} targets")
        d = X.shape[1]
        if self.max_features is not None and self.max_features < d and rng is None:
            raise ValueError("feature subsampling needs an rng")
        self.n_features = d
        self._feature: list[int] = []
        self._threshold: list[float] = []
        self._left: list[int] = []
        self._right: list[int] = []
        self._value: list[float] = []
        self._grow(X, y, np.arange(X.shape[0]), 0, rng)
        self.feature = np.array(self._feature, dtype=np.intp)
        self.threshold = np.array(self._threshold, dtype=float)
        self.left = np.array(self._left, dtype=np.intp)
        self.right = np.array(self._right, dtype=np.intp)
        self.value = np.array(self._value, dtype=float)
        del self._feature, self._threshold, self._left, self._right, self._value
        return self

    def _leaf_value(self, y: np.ndarray) -> float:
        return float(np.median(y)) if self.criterion == "mae" else float(np.mean(y))

    def _new_node(self, value: float) -> int:
        self._feature.append(-1)
        self._threshold.append(0.0)
        self._left.append(-1)
        self._right.append(-1)
        self._value.append(value)
        return len(self._value) - 1

    def _grow(self, X, y, idx, depth, rng) -> int:
        yn = y[idx]
        node = self._new_node(self._leaf_value(yn))
        if len(idx) < 2 or (self.max_depth is not None and depth >= self.max_depth):
            return node
        features = None
        if self.max_features is not None and self.max_features < self.n_features:
            features = rng.sample_without_replacement(self.n_features, max(1, self.max_features))
        split = best_split(X[idx], yn, self.criterion, features)
        if split is None:
            return node
        goes_left = X[idx, split.feature] <= split.threshold
        self._feature[node] = split.feature
        self._threshold[node] = split.threshold
        left = self._grow(X, y, idx[goes_left], depth + 1, rng)
        right = self._grow(X, y, idx[~goes_left], depth + 1, rng)
        self._left[node] = left
        self._right[node] = right
        return node

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got shape {X.shape}")
        node = np.zeros(X.shape[0], dtype=np.intp)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            active = f >= 0
            if not active.any():
                return node
            a = rows[active]
            na = node[active]
            go_left = X[a, self.feature[na]] <= self.threshold[na]
            node[active] = np.where(go_left, self.left[na], self.right[na])

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    @property
    def depth(self) -> int:
        def walk(i):
            if self.feature[i] < 0:
                return 0
            return 1 + max(walk(self.left[i]), walk(self.right[i]))

        return walk(0)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def to_state(self) -> dict:
        return {
            "criterion": self.criterion,
            "max_depth": self.max_depth,
            "max_features": self.max_features,
            "n_features": self.n_features,
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_state(cls, s: dict) -> "RegressionTree":
        t = cls(s["criterion"], s["max_depth"], s["max_features"])
        t.n_features = s["n_features"]
        t.feature = np.array(s["feature"], dtype=np.intp)
        t.threshold = np.array(s["threshold"], dtype=float)
        t.left = np.array(s["left"], dtype=np.intp)
        t.right = np.array(s["right"], dtype=np.intp)
        t.value = np.array(s["value"], dtype=float)
        return t
