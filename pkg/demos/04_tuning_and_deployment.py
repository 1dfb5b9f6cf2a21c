"""
Tuning, training and prediction
===============================

Grid-search a ridge penalty, fit the winner on every row, save it and
predict from the saved file.
"""

import tempfile
from pathlib import Path

import numpy as np

from cobb_bench import SyntheticConfig, build_matrix, fit, grid_search, synthesize_dataset
from cobb_bench.regressors import load_model, save_model

fm = build_matrix(synthesize_dataset(SyntheticConfig()))

result = grid_search(fm, "ridge", {"alpha": [0.01, 0.1, 1.0, 10.0, 100.0]})
for entry in result.table:
    print(f"alpha={entry.params['alpha']:<6} mean MAE {entry.mean_mae:.3f}")
print("best:", result.best_spec, f"({result.best_mean_mae:.3f} deg)")

# The tuned score above is optimistic: the penalty was chosen on the same folds.
model = fit(result.best_spec, fm.rows, fm.targets)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "ridge.json"
    save_model(model, path)
    loaded, _ = load_model(path)
    same = np.array_equal(loaded.predict(fm.rows), model.predict(fm.rows))
    print("saved model reproduces predictions:", same)

# The same workflow from the shell:
#   cobb-bench synth --out trials.csv
#   cobb-bench gridsearch --input trials.csv --grid grid.json
#   cobb-bench train --input trials.csv --models ridge --param alpha=0.01 --out ridge.json
#   cobb-bench predict --model ridge.json --input trials.csv
