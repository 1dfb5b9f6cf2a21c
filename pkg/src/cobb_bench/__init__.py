"""Cobb-angle regression benchmark on gait effort signals.

Data ingestion and synthesis (:mod:`cobb_bench.gait_data`), the 18-feature
pipeline (:mod:`cobb_bench.features`), twelve regressors plus a mean
baseline (:mod:`cobb_bench.regressors`) and seeded cross-validation
(:mod:`cobb_bench.evaluation`).
"""

from ._version import __version__
from .evaluation import (
    CVError,
    CVReport,
    FoldAssignment,
    GridSearchResult,
    benchmark,
    cross_validate,
    dataset_digest,
    grid_search,
    make_folds,
    mae,
)
from .features import (
    FEATURE_NAMES,
    FeatureMatrix,
    ScalerParams,
    apply_scaler,
    build_matrix,
    extract_features,
    fit_scaler,
    signal_stats,
)
from .gait_data import (
    Dataset,
    EffortSignalKind,
    ParticipantRecord,
    SyntheticConfig,
    parse_trials_csv,
    read_trials_csv,
    synthesize_dataset,
    validate_dataset,
    write_trials_csv,
)
from .regressors import ROSTER, RegressorSpec, default_specs, fit

__all__ = [
    "CVError",
    "CVReport",
    "Dataset",
    "EffortSignalKind",
    "FEATURE_NAMES",
    "FeatureMatrix",
    "FoldAssignment",
    "GridSearchResult",
    "ParticipantRecord",
    "ROSTER",
    "RegressorSpec",
    "ScalerParams",
    "SyntheticConfig",
    "__version__",
    "apply_scaler",
    "benchmark",
    "build_matrix",
    "cross_validate",
    "dataset_digest",
    "default_specs",
    "extract_features",
    "fit",
    "fit_scaler",
    "grid_search",
    "make_folds",
    "mae",
    "parse_trials_csv",
    "read_trials_csv",
    "signal_stats",
    "synthesize_dataset",
    "validate_dataset",
    "write_trials_csv",
]
