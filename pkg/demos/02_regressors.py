"""
The regressor roster
====================

Every model shares one fit/predict contract.  Here each one is fitted to a
training split of the synthetic cohort and scored on the held-out rows.
"""

import warnings

import numpy as np

from cobb_bench import ROSTER, RegressorSpec, SyntheticConfig, build_matrix, fit, mae, synthesize_dataset
from cobb_bench.features import apply_scaler, fit_scaler
from cobb_bench.regressors import DISPLAY_NAMES

fm = build_matrix(synthesize_dataset(SyntheticConfig()))
order = np.random.default_rng(0).permutation(fm.n)
train, test = order[:24], order[24:]

# Standardise with training statistics only.
scaler = fit_scaler(fm.rows[train])
X_train, X_test = apply_scaler(scaler, fm.rows[train]), apply_scaler(scaler, fm.rows[test])

print(f"{'model':36s} held-out MAE (deg)")
for name in ROSTER:
    with warnings.catch_warnings():
        # lasso may stop at its iteration cap on these collinear features
        warnings.simplefilter("ignore")
        model = fit(name, X_train, fm.targets[train], seed=1)
    print(f"{DISPLAY_NAMES[name]:36s} {mae(model.predict(X_test), fm.targets[test]):6.3f}")

# Parameters are validated up front and merged with the pinned defaults.
spec = RegressorSpec("knn", {"k": 5})
print("\n", spec)
try:
    RegressorSpec("knn", {"k": 0})
except ValueError as exc:
    print("rejected:", exc)
