"""Uniform fit / predict / save / load over every algorithm."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .ensembles import AdaBoostR2, Bagging, GradientBoosting, RandomForest
from .gp import GaussianProcess
from .linear import Lasso, LinearModel
from .mlp import MLPRegressor
from .simple import DecisionTree, KNeighbors, MeanBaseline
from .spec import RegressorSpec
from .svr import LinearSVR

MODEL_FORMAT = "cobb-bench-model"
MODEL_VERSION = 1


def _build(spec: RegressorSpec):
    p = dict(spec.params)
    a = spec.algorithm
    if a == "knn":
        return KNeighbors(**p)
    if a == "svr_linear":
        return LinearSVR(**p)
    if a == "random_forest":
        return RandomForest(**p)
    if a == "linear":
        return LinearModel(alpha=0.0)
    if a == "ridge":
        return LinearModel(alpha=p["alpha"])
    if a == "lasso":
        return Lasso(**p)
    if a == "gaussian_process":
        return GaussianProcess(**p)
    if a == "mlp":
        return MLPRegressor(**p)
    if a == "adaboost":
        return AdaBoostR2(**p)
    if a == "decision_tree":
        return DecisionTree(**p)
    if a == "bagging":
        return Bagging(**p)
    if a == "gradient_boosting":
        return GradientBoosting(**p)
    if a == "mean_baseline":
        return MeanBaseline()
    raise ValueError(f"unknown algorithm {a!r}")


@dataclass
class TrainedModel:
    spec: RegressorSpec
    seed: int
    n_features: int
    estimator: Any

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 2 and X.shape[0] == 0:
            return np.zeros(0)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"model expects {self.n_features} features, got shape {X.shape}")
        return np.asarray(self.estimator.predict(X), dtype=float)


def fit(spec: RegressorSpec | str, X, y, seed: int = 0) -> TrainedModel:
    """Fit ``spec`` on ``(X, y)``.  ``seed`` feeds every random choice the algorithm makes."""
    if isinstance(spec, str):
        spec = RegressorSpec(spec)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"X shape {X.shape} does not match {y.shape[0]} targets")
    est = _build(spec).fit(X, y, seed=seed)
    return TrainedModel(spec, int(seed), X.shape[1], est)


def predict(model: TrainedModel, X) -> np.ndarray:
    return model.predict(X)


def model_to_dict(model: TrainedModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "spec": model.spec.to_dict(),
        "seed": model.seed,
        "n_features": model.n_features,
        "state": model.estimator.to_state(),
    }


def model_from_dict(d: dict) -> TrainedModel:
    if d.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a {MODEL_FORMAT} document")
    if d.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {d.get('version')!r}")
    spec = RegressorSpec.from_dict(d["spec"])
    est = _build(spec)
    est.load_state(d["state"])
    return TrainedModel(spec, int(d["seed"]), int(d["n_features"]), est)


def save_model(model: TrainedModel, path: str | Path, extra: dict | None = None) -> None:
    """Write the model as JSON.  Floats use shortest round-trip decimal form."""
    doc = model_to_dict(model)
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> tuple[TrainedModel, dict]:
    """Model plus the raw document (for any extra blocks stored alongside it)."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return model_from_dict(doc), doc
