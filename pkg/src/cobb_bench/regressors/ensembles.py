"""Tree ensembles: random forest, bagging, AdaBoost.R2 and Huber gradient boosting."""

from __future__ import annotations

import math

import numpy as np

from ..rng import SplitMix64, member_seed
from .linear import _check_xy
from .tree import RegressionTree


def resolve_max_features(max_features, d: int) -> int | None:
    if max_features is None:
        return None
    if max_features == "log2":
        return max(1, int(math.floor(math.log2(d))))
    if isinstance(max_features, int) and max_features >= 1:
        return min(max_features, d)
    raise ValueError(f"bad max_features {max_features!r}")


class TreeEnsemble:
    """Bootstrap-resampled trees averaged with equal weight.

    Member ``i`` draws its bootstrap sample and its per-split feature subsets
    from ``SplitMix64(member_seed(seed, i))``.
    """

    def __init__(
        self,
        n_estimators: int,
        criterion: str = "mse",
        max_depth: int | None = None,
        max_features=None,
        bootstrap: bool = True,
    ):
        if n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        self.n_estimators = int(n_estimators)
        self.criterion = criterion
        self.max_depth = max_depth
        self.max_features = max_features
        self.bootstrap = bool(bootstrap)

    def fit(self, X, y, seed: int = 0):
        X, y = _check_xy(X, y)
        n, d = X.shape
        k = resolve_max_features(self.max_features, d)
        self.trees = []
        for i in range(self.n_estimators):
            rng = SplitMix64(member_seed(seed, i))
            idx = rng.bootstrap(n) if self.bootstrap else np.arange(n)
            tree = RegressionTree(self.criterion, self.max_depth, k)
            self.trees.append(tree.fit(X[idx], y[idx], rng))
        self.n_features = d
        return self

    def predict(self, X) -> np.ndarray:
        return np.mean([t.predict(X) for t in self.trees], axis=0)

    def to_state(self) -> dict:
        return {"trees": [t.to_state() for t in self.trees], "n_features": self.n_features}

    def load_state(self, s: dict) -> None:
        self.trees = [RegressionTree.from_state(t) for t in s["trees"]]
        self.n_features = s["n_features"]


class RandomForest(TreeEnsemble):
    def __init__(self, n_estimators=100, criterion="mae", max_depth=15, max_features="log2", bootstrap=True):
        super().__init__(n_estimators, criterion, max_depth, max_features, bootstrap)


class Bagging(TreeEnsemble):
    def __init__(self, n_estimators=20, base_max_depth=None, bootstrap=True):
        super().__init__(n_estimators, "mse", base_max_depth, None, bootstrap)


def weighted_median(predictions: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Per column of ``predictions`` (estimators x samples): the smallest
    prediction whose cumulative weight reaches half the total."""
    order = np.argsort(predictions, axis=0, kind="stable")
    cdf = np.cumsum(weights[order], axis=0)
    pick = np.argmax(cdf >= 0.5 * cdf[-1], axis=0)
    cols = np.arange(predictions.shape[1])
    return predictions[order[pick, cols], cols]


class AdaBoostR2:
    """Drucker's AdaBoost.R2 with depth-limited regression trees.

    Round ``r`` (seed ``member_seed(seed, r)``) draws a weighted bootstrap
    sample, fits a tree and scores every training point with the linear loss
    ``L_i = |y_i - f(x_i)| / max_i |y_i - f(x_i)|``.  With ``Lbar = sum w_i
    L_i`` and ``beta = Lbar / (1 - Lbar)`` the estimator weight is
    ``learning_rate * ln(1 / beta)`` and sample weights are multiplied by
    ``beta ** (learning_rate * (1 - L_i))`` then renormalised.

    A perfect round (zero residuals) ends boosting with that tree at weight 1.
    A round with ``Lbar >= 0.5`` ends boosting and is discarded, unless it is
    the first round, in which case it is kept at weight 1.
    """

    def __init__(self, n_estimators=250, learning_rate=1.1, loss="linear", base_max_depth=3):
        if loss != "linear":
            raise ValueError("only the linear loss is supported")
        self.n_estimators = int(n_estimators)
        self.learning_rate = float(learning_rate)
        self.loss = loss
        self.base_max_depth = base_max_depth

    def fit(self, X, y, seed: int = 0):
        X, y = _check_xy(X, y)
        n = X.shape[0]
        w = np.full(n, 1.0 / n)
        self.trees, self.estimator_weights = [], []
        self.weight_history = [w.copy()]
        for r in range(self.n_estimators):
            rng = SplitMix64(member_seed(seed, r))
            idx = rng.weighted_indices(w, n)
            tree = RegressionTree("mse", self.base_max_depth).fit(X[idx], y[idx])
            err = np.abs(tree.predict(X) - y)
            err_max = err.max()
            if err_max == 0.0:
                self.trees.append(tree)
                self.estimator_weights.append(1.0)
                break
            loss = err / err_max
            avg = float(np.sum(w * loss))
            if avg >= 0.5:
                if not self.trees:
                    self.trees.append(tree)
                    self.estimator_weights.append(1.0)
                break
            beta = avg / (1.0 - avg)
            self.trees.append(tree)
            self.estimator_weights.append(self.learning_rate * math.log(1.0 / beta))
            w = w * beta ** (self.learning_rate * (1.0 - loss))
            total = w.sum()
            if not total > 0:
                break
            w = w / total
            self.weight_history.append(w.copy())
        self.estimator_weights = np.array(self.estimator_weights)
        self.n_features = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        preds = np.array([t.predict(X) for t in self.trees])
        return weighted_median(preds, self.estimator_weights)

    def to_state(self) -> dict:
        return {
            "trees": [t.to_state() for t in self.trees],
            "estimator_weights": self.estimator_weights.tolist(),
            "n_features": self.n_features,
        }

    def load_state(self, s: dict) -> None:
        self.trees = [RegressionTree.from_state(t) for t in s["trees"]]
        self.estimator_weights = np.array(s["estimator_weights"], dtype=float)
        self.n_features = s["n_features"]


def huber_loss(residuals, delta: float) -> float:
    a = np.abs(residuals)
    return float(np.mean(np.where(a <= delta, 0.5 * a * a, delta * (a - 0.5 * delta))))


class GradientBoosting:
    """Gradient boosting with Huber loss (or squared error).

    Starts from the median of ``y`` (mean for squared error).  Each round
    takes ``delta`` as the ``huber_alpha`` quantile of the absolute residuals,
    fits a tree to the residuals clipped at ``+-delta`` and then resets every
    leaf to ``median(r) + mean(clip(r - median(r), -delta, delta))`` over the
    residuals ``r`` that fall in it.  Rounds stop early once all residuals
    are zero.
    """

    def __init__(
        self,
        loss="huber",
        huber_alpha=0.85,
        learning_rate=1.0,
        max_depth=3,
        n_estimators=100,
        tree_criterion="mae",
    ):
        if loss not in ("huber", "squared_error"):
            raise ValueError(f"unknown loss {loss!r}")
        if not 0 < huber_alpha < 1:
            raise ValueError("huber_alpha must lie in (0, 1)")
        self.loss = loss
        self.huber_alpha = float(huber_alpha)
        self.learning_rate = float(learning_rate)
        self.max_depth = max_depth
        self.n_estimators = int(n_estimators)
        self.tree_criterion = tree_criterion

    def fit(self, X, y, seed: int = 0):
        X, y = _check_xy(X, y)
        self.init_ = float(np.median(y) if self.loss == "huber" else np.mean(y))
        F = np.full(len(y), self.init_)
        self.trees, self.deltas = [], []
        for _ in range(self.n_estimators):
            resid = y - F
            if not np.any(resid):
                break
            tree = RegressionTree(self.tree_criterion, self.max_depth)
            if self.loss == "huber":
                delta = float(np.quantile(np.abs(resid), self.huber_alpha))
                tree.fit(X, np.clip(resid, -delta, delta))
                leaves = tree.apply(X)
                for leaf in np.unique(leaves):
                    r = resid[leaves == leaf]
                    med = np.median(r)
                    tree.value[leaf] = med + np.mean(np.clip(r - med, -delta, delta))
                self.deltas.append(delta)
            else:
                tree.fit(X, resid)
            F = F + self.learning_rate * tree.predict(X)
            self.trees.append(tree)
        self.n_features = X.shape[1]
        return self

    def staged_predict(self, X):
        F = np.full(np.asarray(X).shape[0], self.init_)
        yield F.copy()
        for tree in self.trees:
            F = F + self.learning_rate * tree.predict(X)
            yield F.copy()

    def predict(self, X) -> np.ndarray:
        F = np.full(np.asarray(X).shape[0], self.init_)
        for tree in self.trees:
            F = F + self.learning_rate * tree.predict(X)
        return F

    def to_state(self) -> dict:
        return {
            "init": self.init_,
            "trees": [t.to_state() for t in self.trees],
            "deltas": list(self.deltas),
            "n_features": self.n_features,
        }

    def load_state(self, s: dict) -> None:
        self.init_ = float(s["init"])
        self.trees = [RegressionTree.from_state(t) for t in s["trees"]]
        self.deltas = list(s["deltas"])
        self.n_features = s["n_features"]
