"""Algorithm roster, pinned hyperparameters, and parameter validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

# Table order of the benchmark, baseline last.
ROSTER = (
    "knn",
    "svr_linear",
    "random_forest",
    "linear",
    "ridge",
    "lasso",
    "gaussian_process",
    "mlp",
    "adaboost",
    "decision_tree",
    "bagging",
    "gradient_boosting",
    "mean_baseline",
)

DISPLAY_NAMES = {
    "knn": "K-nearest neighbours",
    "svr_linear": "SVM with linear kernel",
    "random_forest": "Random forests",
    "linear": "Linear regression",
    "ridge": "Linear ridge regression",
    "lasso": "Lasso regression",
    "gaussian_process": "Gaussian process",
    "mlp": "Multilayer perceptron",
    "adaboost": "AdaBoost",
    "decision_tree": "Decision tree",
    "bagging": "Bootstrap aggregating (Bagging)",
    "gradient_boosting": "Gradient boosting",
    "mean_baseline": "Mean baseline",
}

DEFAULT_PARAMS: dict[str, dict[str, Any]] = {
    "knn": {"k": 3},
    "svr_linear": {"C": 100.0, "epsilon": 0.1, "tol": 1e-3, "max_iter": 1_000_000},
    "random_forest": {
        "criterion": "mae",
        "max_depth": 15,
        "max_features": "log2",
        "n_estimators": 100,
        "bootstrap": True,
    },
    "linear": {},
    "ridge": {"alpha": 0.1},
    "lasso": {"alpha": 0.1, "max_iter": 10000, "selection": "random", "tol": 1e-4},
    "gaussian_process": {"sigma0_sq": 1.0, "noise": 1.0, "optimize": "coarse-grid"},
    "mlp": {
        "hidden": 60,
        "activation": "logistic",
        "learning_rate_init": 0.003,
        "max_iter": 1000,
        "n_iter_no_change": 10,
        "improvement_tol": 1e-4,
        "l2_alpha": 1e-4,
        "beta_1": 0.9,
        "beta_2": 0.999,
        "adam_epsilon": 1e-8,
    },
    "adaboost": {"n_estimators": 250, "learning_rate": 1.1, "loss": "linear", "base_max_depth": 3},
    "decision_tree": {"max_depth": 4, "criterion": "mse"},
    "bagging": {"n_estimators": 20, "base_max_depth": None, "bootstrap": True},
    "gradient_boosting": {
        "loss": "huber",
        "huber_alpha": 0.85,
        "learning_rate": 1.0,
        "max_depth": 3,
        "n_estimators": 100,
        "tree_criterion": "mae",
    },
    "mean_baseline": {},
}

_COUNTS = {"k", "n_estimators", "max_iter", "hidden", "n_iter_no_change"}
_DEPTHS = {"max_depth", "base_max_depth"}
_POSITIVE = {"C", "tol", "alpha", "sigma0_sq", "noise", "learning_rate_init", "learning_rate", "improvement_tol", "adam_epsilon"}
_NON_NEGATIVE = {"epsilon", "l2_alpha"}
_OPEN_UNIT = {"huber_alpha", "beta_1", "beta_2"}
_CHOICES = {
    "criterion": ("mse", "mae"),
    "tree_criterion": ("mse", "mae"),
    "selection": ("random", "cyclic"),
    "optimize": ("coarse-grid", "fixed"),
    "activation": ("logistic",),
    "loss": ("linear", "huber", "squared_error"),
}


class SpecError(ValueError):
    pass


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _check_param(algorithm: str, name: str, value) -> None:
    bad = None
    if name in _COUNTS:
        if not (_is_int(value) and value >= 1):
            bad = "an integer >= 1"
    elif name in _DEPTHS:
        if not (value is None or (_is_int(value) and value >= 1)):
            bad = "null or an integer >= 1"
    elif name in _POSITIVE:
        if not (_is_real(value) and value > 0):
            bad = "a finite real > 0"
    elif name in _NON_NEGATIVE:
        if not (_is_real(value) and value >= 0):
            bad = "a finite real >= 0"
    elif name in _OPEN_UNIT:
        if not (_is_real(value) and 0 < value < 1):
            bad = "a real in (0, 1)"
    elif name in _CHOICES:
        if value not in _CHOICES[name]:
            bad = f"one of {_CHOICES[name]}"
    elif name == "max_features":
        if not (value is None or value == "log2" or (_is_int(value) and value >= 1)):
            bad = "null, 'log2' or an integer >= 1"
    elif name == "bootstrap":
        if not isinstance(value, bool):
            bad = "a boolean"
    if bad:
        raise SpecError(f"{algorithm}.{name} must be {bad}, got {value!r}")


@dataclass(frozen=True)
class RegressorSpec:
    """An algorithm name plus its full hyperparameter record.

    Parameters not given take the pinned defaults in :data:`DEFAULT_PARAMS`.
    """

    algorithm: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.algorithm not in DEFAULT_PARAMS:
            raise SpecError(f"unknown algorithm {self.algorithm!r}; expected one of {', '.join(ROSTER)}")
        defaults = DEFAULT_PARAMS[self.algorithm]
        unknown = sorted(set(self.params) - set(defaults))
        if unknown:
            raise SpecError(f"{self.algorithm} has no parameter(s) {', '.join(unknown)}")
        merged = {**defaults, **self.params}
        for name, value in merged.items():
            _check_param(self.algorithm, name, value)
        if self.algorithm == "gradient_boosting" and merged["loss"] not in ("huber", "squared_error"):
            raise SpecError("gradient_boosting.loss must be 'huber' or 'squared_error'")
        if self.algorithm == "adaboost" and merged["loss"] != "linear":
            raise SpecError("adaboost.loss must be 'linear'")
        object.__setattr__(self, "params", merged)

    @property
    def name(self) -> str:
        return self.algorithm

    def with_params(self, **overrides) -> "RegressorSpec":
        return RegressorSpec(self.algorithm, {**self.params, **overrides})

    def to_dict(self) -> dict:
        return {"algorithm": self.algorithm, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "RegressorSpec":
        return cls(d["algorithm"], dict(d.get("params", {})))


def default_specs(names=None) -> list[RegressorSpec]:
    """Specs in roster order; ``names=None`` or ``"all"`` gives the whole roster."""
    if names is None or names == "all":
        names = ROSTER
    unknown = [n for n in names if n not in DEFAULT_PARAMS]
    if unknown:
        raise SpecError(f"unknown algorithm(s) {', '.join(unknown)}")
    return [RegressorSpec(n) for n in ROSTER if n in names]
