"""Seeded k-fold cross-validation, grid search and the multi-model benchmark.

Every fit inside a cross-validation run gets its own seed,
``derive_seed(seed, algorithm, fold)``, so folds and models can be
evaluated in any order (or concurrently) without changing a single bit of
the results.  ``COBB_BENCH_THREADS`` sets the worker count; 0 means
sequential.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from ._version import __version__
from .features import FeatureMatrix, ScalerParams, apply_scaler, fit_scaler
from .regressors import DISPLAY_NAMES, ROSTER, RegressorSpec, SpecError, fit
from .rng import SplitMix64, derive_seed

SCALER_MODES = ("per_fold", "global")
THREADS_ENV = "COBB_BENCH_THREADS"
DEFAULT_SEED = 42
DEFAULT_K = 10


class CVError(RuntimeError):
    """A fit or prediction failed inside cross-validation."""

    def __init__(self, message: str, model: str | None = None, fold: int | None = None):
        super().__init__(message)
        self.model = model
        self.fold = fold


def mae(predictions, truths) -> float:
    """Mean absolute error ``sum |y_i - x_i| / n``."""
    p = np.asarray(predictions, dtype=float).ravel()
    t = np.asarray(truths, dtype=float).ravel()
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.size} predictions vs {t.size} truths")
    if p.size == 0:
        raise ValueError("mae of an empty vector")
    return float(np.sum(np.abs(t - p)) / p.size)


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    fold_of: np.ndarray
    seed: int

    def __post_init__(self):
        fold_of = np.asarray(self.fold_of, dtype=np.int64)
        object.__setattr__(self, "fold_of", fold_of)
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if fold_of.ndim != 1 or np.any(fold_of < 0) or np.any(fold_of >= self.k):
            raise ValueError("fold ids must lie in 0..k-1")
        sizes = np.bincount(fold_of, minlength=self.k)
        if sizes.min() == 0 or sizes.max() - sizes.min() > 1:
            raise ValueError(f"fold sizes {sizes.tolist()} must be non-empty and differ by at most 1")

    @property
    def n(self) -> int:
        return self.fold_of.size

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)

    def sizes(self) -> list[int]:
        return np.bincount(self.fold_of, minlength=self.k).tolist()


def make_folds(n: int, k: int, seed: int = DEFAULT_SEED) -> FoldAssignment:
    """Shuffle ``0..n-1`` with a seeded Fisher-Yates pass, then deal contiguous
    blocks: the first ``n % k`` folds get ``ceil(n / k)`` indices, the rest
    ``floor(n / k)``."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > n:
        raise ValueError(f"k={k} folds need at least {k} samples, got {n}")
    perm = SplitMix64(seed).permutation(n)
    base, extra = divmod(n, k)
    sizes = [base + 1] * extra + [base] * (k - extra)
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[perm] = np.repeat(np.arange(k), sizes)
    return FoldAssignment(k, fold_of, int(seed))


@dataclass(frozen=True)
class CVReport:
    model_name: str
    per_fold_mae: tuple[float, ...]
    mean_mae: float
    std_mae: float
    seed: int
    scaler_mode: str
    k: int
    params: Mapping[str, Any] = field(default_factory=dict)
    best: bool = False

    @classmethod
    def from_folds(cls, spec: RegressorSpec, per_fold, seed: int, scaler_mode: str) -> "CVReport":
        scores = np.asarray(per_fold, dtype=float)
        return cls(
            spec.algorithm,
            tuple(float(s) for s in scores),
            float(np.mean(scores)),
            float(np.std(scores)),
            int(seed),
            scaler_mode,
            int(scores.size),
            dict(spec.params),
        )

    @property
    def spec(self) -> RegressorSpec:
        return RegressorSpec(self.model_name, dict(self.params))

    def with_best(self, best: bool) -> "CVReport":
        return replace(self, best=best)

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "seed": self.seed,
            "scaler_mode": self.scaler_mode,
            "k": self.k,
            "per_fold_mae": list(self.per_fold_mae),
            "mean_mae": self.mean_mae,
            "std_mae": self.std_mae,
            "params": dict(self.params),
            "best": self.best,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "CVReport":
        return cls(
            d["model_name"],
            tuple(float(x) for x in d["per_fold_mae"]),
            float(d["mean_mae"]),
            float(d["std_mae"]),
            int(d["seed"]),
            d["scaler_mode"],
            int(d["k"]),
            dict(d.get("params", {})),
            bool(d.get("best", False)),
        )


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: ``threads`` if given, else ``$COBB_BENCH_THREADS``, else 0."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a non-negative integer, got {raw!r}") from None
    if threads < 0:
        raise ValueError(f"thread count must be >= 0, got {threads}")
    return threads


def _run_tasks(tasks: Sequence[Callable[[], Any]], threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda t: t(), tasks))


def _check_mode(scaler_mode: str) -> str:
    mode = scaler_mode.replace("-", "_")
    if mode not in SCALER_MODES:
        raise ValueError(f"scaler_mode must be one of {SCALER_MODES}, got {scaler_mode!r}")
    return mode


def _fold_task(fm, spec, folds, fold, seed, mode, global_scaler, scaler_fitter):
    train = folds.train_indices(fold)
    test = folds.test_indices(fold)
    try:
        scaler = global_scaler if mode == "global" else scaler_fitter(fm.rows[train])
        model = fit(spec, apply_scaler(scaler, fm.rows[train]), fm.targets[train], seed=derive_seed(seed, spec.algorithm, fold))
        pred = model.predict(apply_scaler(scaler, fm.rows[test]))
    except Exception as exc:
        raise CVError(f"{spec.algorithm} failed on fold {fold}: {exc}", spec.algorithm, fold) from exc
    if not np.all(np.isfinite(pred)):
        raise CVError(f"{spec.algorithm} produced non-finite predictions on fold {fold}", spec.algorithm, fold)
    return mae(pred, fm.targets[test])


def _fold_tasks(fm, spec, folds, seed, mode, scaler_fitter):
    global_scaler = scaler_fitter(fm.rows) if mode == "global" else None
    return [
        lambda f=f: _fold_task(fm, spec, folds, f, seed, mode, global_scaler, scaler_fitter) for f in range(folds.k)
    ]


def cross_validate(
    fm: FeatureMatrix,
    spec: RegressorSpec | str,
    k: int = DEFAULT_K,
    seed: int = DEFAULT_SEED,
    scaler_mode: str = "per_fold",
    *,
    threads: int | None = None,
    scaler_fitter: Callable[[np.ndarray], ScalerParams] = fit_scaler,
) -> CVReport:
    """Score ``spec`` by MAE on each of ``k`` seeded folds.

    With ``scaler_mode="per_fold"`` the scaler is fitted on the training rows
    of each fold only; ``"global"`` fits it once on every row.
    """
    if isinstance(spec, str):
        spec = RegressorSpec(spec)
    mode = _check_mode(scaler_mode)
    if fm.n < k:
        raise ValueError(f"{fm.n} samples cannot fill k={k} folds")
    folds = make_folds(fm.n, k, seed)
    scores = _run_tasks(_fold_tasks(fm, spec, folds, seed, mode, scaler_fitter), resolve_threads(threads))
    return CVReport.from_folds(spec, scores, seed, mode)


def _flag_best(reports: list[CVReport]) -> list[CVReport]:
    best = int(np.argmin([r.mean_mae for r in reports]))
    return [r.with_best(i == best) for i, r in enumerate(reports)]


def benchmark(
    fm: FeatureMatrix,
    specs: Sequence[RegressorSpec | str],
    k: int = DEFAULT_K,
    seed: int = DEFAULT_SEED,
    scaler_mode: str = "per_fold",
    *,
    threads: int | None = None,
) -> list[CVReport]:
    """Cross-validate every spec on the same folds.

    Reports come back in roster order with the lowest mean MAE flagged
    (the first one in that order on ties).
    """
    if not specs:
        raise ValueError("benchmark needs at least one model")
    specs = [RegressorSpec(s) if isinstance(s, str) else s for s in specs]
    specs = sorted(specs, key=lambda s: ROSTER.index(s.algorithm))
    mode = _check_mode(scaler_mode)
    if fm.n < k:
        raise ValueError(f"{fm.n} samples cannot fill k={k} folds")
    folds = make_folds(fm.n, k, seed)
    tasks = [t for s in specs for t in _fold_tasks(fm, s, folds, seed, mode, fit_scaler)]
    scores = _run_tasks(tasks, resolve_threads(threads))
    reports = [CVReport.from_folds(s, scores[i * k : (i + 1) * k], seed, mode) for i, s in enumerate(specs)]
    return _flag_best(reports)


@dataclass(frozen=True)
class GridEntry:
    spec: RegressorSpec | None
    params: Mapping[str, Any]
    mean_mae: float | None
    error: str | None = None


@dataclass(frozen=True)
class GridSearchResult:
    best_spec: RegressorSpec
    best_mean_mae: float
    best_report: CVReport
    table: tuple[GridEntry, ...]


def expand_grid(grid: Mapping[str, Sequence] | Sequence[Mapping[str, Any]]) -> list[dict]:
    """Combinations in enumeration order.

    A mapping of parameter -> candidate values expands to the cartesian
    product with the first key varying slowest; a list of mappings is taken
    as already enumerated.
    """
    if isinstance(grid, Mapping):
        keys = list(grid)
        values = []
        for key in keys:
            v = grid[key]
            if isinstance(v, (str, bytes)) or not isinstance(v, Sequence):
                raise ValueError(f"grid values for {key!r} must be a list")
            values.append(list(v))
        combos = [dict(zip(keys, c)) for c in itertools.product(*values)] if keys else []
    else:
        combos = [dict(c) for c in grid]
    if not combos:
        raise ValueError("grid is empty")
    return combos


def grid_search(
    fm: FeatureMatrix,
    algorithm: str,
    grid,
    k: int = DEFAULT_K,
    seed: int = DEFAULT_SEED,
    scaler_mode: str = "per_fold",
    *,
    threads: int | None = None,
) -> GridSearchResult:
    """Cross-validate every grid combination; the first lowest mean MAE wins.

    A combination that fails (bad parameter, fit error) is recorded with its
    error and the search moves on.
    """
    reports: list[CVReport | None] = []
    table = []
    for params in expand_grid(grid):
        try:
            spec = RegressorSpec(algorithm, params)
        except SpecError as exc:
            table.append(GridEntry(None, params, None, str(exc)))
            reports.append(None)
            continue
        try:
            report = cross_validate(fm, spec, k, seed, scaler_mode, threads=threads)
        except CVError as exc:
            table.append(GridEntry(spec, params, None, str(exc)))
            reports.append(None)
            continue
        table.append(GridEntry(spec, params, report.mean_mae))
        reports.append(report)
    scored = [i for i, r in enumerate(reports) if r is not None]
    if not scored:
        raise CVError(f"every grid combination failed; first error: {table[0].error}", algorithm)
    best = min(scored, key=lambda i: (reports[i].mean_mae, i))
    return GridSearchResult(table[best].spec, reports[best].mean_mae, reports[best].with_best(True), tuple(table))


# Serialisation -------------------------------------------------------------


def dataset_digest(fm: FeatureMatrix) -> str:
    """64-bit BLAKE2b of the feature values and targets (float64, little-endian), as hex."""
    h = hashlib.blake2b(digest_size=8)
    h.update(np.ascontiguousarray(fm.rows, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(fm.targets, dtype="<f8").tobytes())
    return h.hexdigest()


def run_header(fm: FeatureMatrix, **config) -> dict:
    """Provenance block written at the top of every report."""
    return {
        "artifact": "cobb-bench",
        "version": __version__,
        "dataset_digest": dataset_digest(fm),
        "n_samples": fm.n,
        "n_features": fm.width,
        **config,
    }


def reports_to_json(reports: Sequence[CVReport], header: Mapping[str, Any]) -> str:
    doc = {"header": dict(header), "reports": [r.to_dict() for r in reports]}
    return json.dumps(doc, indent=2) + "\n"


def reports_from_json(text: str) -> tuple[dict, list[CVReport]]:
    doc = json.loads(text)
    return doc["header"], [CVReport.from_dict(r) for r in doc["reports"]]


def reports_to_csv(reports: Sequence[CVReport], header: Mapping[str, Any]) -> str:
    """Header lines as ``# key=value`` comments, then one row per model."""
    out = io.StringIO()
    for key, value in header.items():
        out.write(f"# {key}={json.dumps(value)}\n")
    k = max(r.k for r in reports)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["model", "seed", "scaler_mode", "k", "mean_mae", "std_mae", "best"] + [f"fold_{i}" for i in range(k)]
    )
    for r in reports:
        folds = [repr(x) for x in r.per_fold_mae] + [""] * (k - r.k)
        writer.writerow(
            [r.model_name, r.seed, r.scaler_mode, r.k, repr(r.mean_mae), repr(r.std_mae), int(r.best)] + folds
        )
    return out.getvalue()


def summary_rows(reports: Sequence[CVReport]) -> list[tuple[str, str, str]]:
    """``(display name, mean, std)`` at one decimal, best model starred."""
    return [
        (DISPLAY_NAMES[r.model_name] + ("*" if r.best else ""), f"{r.mean_mae:.1f}", f"{r.std_mae:.1f}")
        for r in reports
    ]


def summary_table(reports: Sequence[CVReport]) -> str:
    """Plain-text table of mean MAE +- std per model."""
    rows = summary_rows(reports)
    width = max(len("Model"), *(len(r[0]) for r in rows))
    lines = [f"{'Model':<{width}}  MAE (deg)", f"{'-' * width}  ---------"]
    lines += [f"{name:<{width}}  {mean} +- {std}" for name, mean, std in rows]
    lines.append("* lowest mean MAE")
    return "\n".join(lines) + "\n"


def reports_to_markdown(reports: Sequence[CVReport], header: Mapping[str, Any]) -> str:
    lines = ["# Cross-validated MAE", ""]
    lines += [f"- {key}: `{json.dumps(value)}`" for key, value in header.items()]
    lines += ["", "| Model | MAE (deg) |", "|---|---|"]
    lines += [f"| {name} | {mean} ± {std} |" for name, mean, std in summary_rows(reports)]
    lines += ["", "\\* lowest mean MAE", "", "## Per-fold MAE (full precision)", ""]
    k = max(r.k for r in reports)
    lines.append("| model | mean | std | " + " | ".join(f"fold {i}" for i in range(k)) + " |")
    lines.append("|---" * (k + 3) + "|")
    for r in reports:
        cells = [repr(x) for x in r.per_fold_mae] + [""] * (k - r.k)
        lines.append(f"| {r.model_name} | {r.mean_mae!r} | {r.std_mae!r} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


FORMATTERS = {"json": reports_to_json, "csv": reports_to_csv, "md": reports_to_markdown}


def format_reports(reports: Sequence[CVReport], header: Mapping[str, Any], fmt: str = "json") -> str:
    if fmt not in FORMATTERS:
        raise ValueError(f"unknown report format {fmt!r}; expected one of {', '.join(FORMATTERS)}")
    return FORMATTERS[fmt](reports, header)
