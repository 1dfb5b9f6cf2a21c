"""Regression algorithms under one fit/predict contract."""

from .base import ConvergenceWarning, FitError
from .model import TrainedModel, fit, load_model, model_from_dict, model_to_dict, predict, save_model
from .spec import DEFAULT_PARAMS, DISPLAY_NAMES, ROSTER, RegressorSpec, SpecError, default_specs
from .tree import RegressionTree, Split, best_split, impurity

__all__ = [
    "ConvergenceWarning",
    "DEFAULT_PARAMS",
    "DISPLAY_NAMES",
    "FitError",
    "ROSTER",
    "RegressionTree",
    "RegressorSpec",
    "SpecError",
    "Split",
    "TrainedModel",
    "best_split",
    "default_specs",
    "fit",
    "impurity",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "predict",
    "save_model",
]
