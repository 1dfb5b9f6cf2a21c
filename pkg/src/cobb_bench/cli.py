"""``cobb-bench``: synthesise data, extract features, cross-validate, train and predict.

Every failure is reported on stderr as a single line ``error[CODE]: message``
and exits with status 1 (2 for command-line usage errors).  Data goes to
``--out`` or stdout; diagnostics only ever go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path
from typing import Sequence


from ._version import __version__
from .evaluation import (
    DEFAULT_K,
    DEFAULT_SEED,
    CVError,
    benchmark,
    cross_validate,
    format_reports,
    grid_search,
    run_header,
    summary_table,
)
from .features import (
    FeatureMatrix,
    ScalerParams,
    apply_scaler,
    build_matrix,
    fit_scaler,
    parse_feature_csv,
    serialize_feature_csv,
)
from .gait_data import (
    TRIALS_HEADER,
    ConfigError,
    SyntheticConfig,
    TrialsFormatError,
    load_synthetic_config,
    parse_trials_csv,
    serialize_trials_csv,
    synthesize_dataset,
    validate_dataset,
)
from .regressors import ROSTER, RegressorSpec, SpecError, default_specs, fit, load_model, save_model


class CLIError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError("E_USAGE", message)


# Inputs ---------------------------------------------------------------------


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CLIError("E_IO", f"cannot read {path}: {exc.strerror or exc}") from None


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CLIError("E_IO", f"cannot write {path}: {exc.strerror or exc}") from None


def _synthetic_config(path: str | None) -> SyntheticConfig:
    try:
        if path is None:
            return SyntheticConfig()
        _read_text(path)
        return load_synthetic_config(path)
    except (ConfigError, TypeError) as exc:
        raise CLIError("E_CONFIG", str(exc)) from None


def _dataset_matrix(text: str, source: str):
    """Parse a trial CSV and turn it into features, listing every validation problem."""
    try:
        dataset = parse_trials_csv(text)
    except TrialsFormatError as exc:
        raise CLIError("E_PARSE", f"{source}: {exc}") from None
    problems = validate_dataset(dataset)
    if problems:
        raise CLIError("E_SCHEMA", f"{source}: " + "; ".join(str(p) for p in problems))
    return build_matrix(dataset)


def load_matrix(path: str) -> FeatureMatrix:
    """Feature matrix from ``path``, which may hold trial samples or ready-made features."""
    text = _read_text(path)
    first = text.split("\n", 1)[0].strip().rstrip("\r")
    if tuple(first.split(",")) == TRIALS_HEADER:
        return _dataset_matrix(text, path)
    try:
        return parse_feature_csv(text)
    except ValueError as exc:
        raise CLIError("E_PARSE", f"{path}: {exc}") from None


def _run_input(args) -> tuple[FeatureMatrix, dict]:
    """The matrix a run works on and how it was obtained (for the report header)."""
    if args.input and args.synthetic_config:
        raise CLIError("E_USAGE", "give either --input or --synthetic-config, not both")
    if args.input:
        return load_matrix(args.input), {"kind": "file", "name": Path(args.input).name}
    cfg = _synthetic_config(args.synthetic_config)
    return build_matrix(synthesize_dataset(cfg)), {"kind": "synthetic", "config": cfg.to_mapping()}


def _model_names(raw: str | None, single: bool = False) -> list[str]:
    if raw is None or raw == "all":
        names = list(ROSTER)
    else:
        names = [n.strip() for n in raw.split(",") if n.strip()]
    unknown = [n for n in names if n not in ROSTER]
    if unknown:
        raise CLIError("E_SPEC", f"unknown model(s) {', '.join(unknown)}; expected names from {', '.join(ROSTER)}")
    if not names:
        raise CLIError("E_SPEC", "no models given")
    if single and len(names) != 1:
        raise CLIError("E_SPEC", f"this command takes exactly one model, got {len(names)}")
    return names


def _parse_params(pairs: Sequence[str]) -> dict:
    """``KEY=VALUE`` pairs; values are read as JSON when possible (``3``, ``null``, ``true``)."""
    params = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise CLIError("E_USAGE", f"--param expects KEY=VALUE, got {pair!r}")
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
    return params


def _spec(name: str, params: dict | None = None) -> RegressorSpec:
    try:
        return RegressorSpec(name, params or {})
    except SpecError as exc:
        raise CLIError("E_SPEC", str(exc)) from None


# Commands -------------------------------------------------------------------


def cmd_synth(args) -> None:
    cfg = _synthetic_config(args.synthetic_config)
    if args.seed is not None:
        try:
            cfg = SyntheticConfig.from_mapping({**cfg.to_mapping(), "seed": args.seed})
        except ConfigError as exc:
            raise CLIError("E_CONFIG", str(exc)) from None
    _write_text(args.out, serialize_trials_csv(synthesize_dataset(cfg)))


def cmd_features(args) -> None:
    text = _read_text(args.input)
    _write_text(args.out, serialize_feature_csv(_dataset_matrix(text, args.input)))


def _header(args, command: str, source: dict, fm: FeatureMatrix, **extra) -> dict:
    return run_header(
        fm,
        command=command,
        input=source,
        seed=args.seed,
        k=args.k,
        scaler_mode=args.scaler.replace("-", "_"),
        **extra,
    )


def _evaluate(fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except CVError as exc:
        raise CLIError("E_FIT", str(exc)) from None
    except ValueError as exc:
        raise CLIError("E_CONFIG", str(exc)) from None


def cmd_cv(args) -> None:
    fm, source = _run_input(args)
    (name,) = _model_names(args.models, single=True)
    report = _evaluate(cross_validate, fm, _spec(name), args.k, args.seed, args.scaler)
    header = _header(args, "cv", source, fm, models=[name])
    _write_text(args.out, format_reports([report], header, args.format))


def cmd_benchmark(args) -> None:
    fm, source = _run_input(args)
    names = _model_names(args.models)
    reports = _evaluate(benchmark, fm, default_specs(names), args.k, args.seed, args.scaler)
    header = _header(args, "benchmark", source, fm, models=[r.model_name for r in reports])
    text = format_reports(reports, header, args.format)
    if args.out is None or args.out == "-":
        _write_text(None, text)
        sys.stderr.write(summary_table(reports))
    else:
        _write_text(args.out, text)
        sys.stdout.write(summary_table(reports))


def _load_grid(path: str) -> tuple[str, object]:
    try:
        doc = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise CLIError("E_GRID", f"{path}: {exc}") from None
    if not isinstance(doc, dict) or "algorithm" not in doc or "grid" not in doc:
        raise CLIError("E_GRID", f"{path}: expected an object with 'algorithm' and 'grid'")
    if doc["algorithm"] not in ROSTER:
        raise CLIError("E_GRID", f"{path}: unknown algorithm {doc['algorithm']!r}")
    return doc["algorithm"], doc["grid"]


def _grid_text(result, header: dict, fmt: str) -> str:
    rows = [
        {"params": dict(e.params), "mean_mae": e.mean_mae, "error": e.error} for e in result.table
    ]
    if fmt == "json":
        doc = {
            "header": header,
            "best": {"spec": result.best_spec.to_dict(), "report": result.best_report.to_dict()},
            "grid": rows,
        }
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        out = io.StringIO()
        for key, value in header.items():
            out.write(f"# {key}={json.dumps(value)}\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["params", "mean_mae", "best", "error"])
        for e, r in zip(result.table, rows):
            best = e.spec is not None and e.spec == result.best_spec and e.mean_mae == result.best_mean_mae
            writer.writerow([json.dumps(r["params"]), "" if e.mean_mae is None else repr(e.mean_mae), int(best), e.error or ""])
        return out.getvalue()
    lines = ["# Grid search", ""]
    lines += [f"- {key}: `{json.dumps(value)}`" for key, value in header.items()]
    lines += ["", "| params | mean MAE (deg) | note |", "|---|---|---|"]
    for r in rows:
        mean = "" if r["mean_mae"] is None else f"{r['mean_mae']:.1f}"
        lines.append(f"| `{json.dumps(r['params'])}` | {mean} | {r['error'] or ''} |")
    lines += ["", f"Best: `{json.dumps(result.best_spec.to_dict())}` with mean MAE {result.best_mean_mae!r}"]
    return "\n".join(lines) + "\n"


def cmd_gridsearch(args) -> None:
    if not args.grid:
        raise CLIError("E_USAGE", "gridsearch needs --grid FILE")
    algorithm, grid = _load_grid(args.grid)
    fm, source = _run_input(args)
    try:
        result = grid_search(fm, algorithm, grid, args.k, args.seed, args.scaler)
    except CVError as exc:
        raise CLIError("E_FIT", str(exc)) from None
    except ValueError as exc:
        raise CLIError("E_GRID", str(exc)) from None
    header = _header(args, "gridsearch", source, fm, models=[algorithm])
    _write_text(args.out, _grid_text(result, header, args.format))


def cmd_train(args) -> None:
    if not args.out or args.out == "-":
        raise CLIError("E_USAGE", "train needs --out MODEL_FILE")
    fm, source = _run_input(args)
    (name,) = _model_names(args.models, single=True)
    spec = _spec(name, _parse_params(args.param))
    scaler = fit_scaler(fm.rows)
    try:
        model = fit(spec, apply_scaler(scaler, fm.rows), fm.targets, seed=args.seed)
    except Exception as exc:
        raise CLIError("E_FIT", f"{name}: {exc}") from None
    extra = {
        "scaler": scaler.to_dict(),
        "feature_names": list(fm.feature_names),
        "training": {"input": source, "n_samples": fm.n},
    }
    try:
        save_model(model, args.out, extra)
    except OSError as exc:
        raise CLIError("E_IO", f"cannot write {args.out}: {exc.strerror or exc}") from None


def cmd_predict(args) -> None:
    if not args.model:
        raise CLIError("E_USAGE", "predict needs --model MODEL_FILE")
    _read_text(args.model)
    try:
        model, doc = load_model(args.model)
        scaler = ScalerParams.from_dict(doc["scaler"])
    except (ValueError, KeyError, TypeError) as exc:
        raise CLIError("E_MODEL", f"{args.model}: not a usable model file ({exc})") from None
    fm, _ = _run_input(args)
    if fm.width != model.n_features:
        raise CLIError("E_WIDTH", f"model expects {model.n_features} features, input has {fm.width}")
    pred = model.predict(apply_scaler(scaler, fm.rows))
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["participant_id", "predicted_cobb_deg"])
    for pid, value in zip(fm.ids, pred):
        writer.writerow([pid, repr(float(value))])
    _write_text(args.out, out.getvalue())


COMMANDS = {
    "synth": cmd_synth,
    "features": cmd_features,
    "cv": cmd_cv,
    "benchmark": cmd_benchmark,
    "gridsearch": cmd_gridsearch,
    "train": cmd_train,
    "predict": cmd_predict,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cobb-bench", description=__doc__.split("\n", 1)[0])
    parser.add_argument("--version", action="version", version=f"cobb-bench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_args(p, seed_default=DEFAULT_SEED):
        p.add_argument("--input", help="trial CSV or feature CSV (detected from the header)")
        p.add_argument("--synthetic-config", help="JSON synthetic-data config (default: built-in config)")
        p.add_argument("--seed", type=int, default=seed_default)
        p.add_argument("--out", help="output file (default: stdout)")

    def eval_args(p):
        p.add_argument("--k", type=int, default=DEFAULT_K, help="number of folds (default 10)")
        p.add_argument("--scaler", choices=("per-fold", "global"), default="per-fold")
        p.add_argument("--format", choices=("json", "csv", "md"), default="json")

    p = sub.add_parser("synth", help="write a synthetic trial CSV")
    p.add_argument("--synthetic-config")
    p.add_argument("--seed", type=int, help="override the config's seed")
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("features", help="trial CSV -> 18-column feature CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("cv", help="cross-validate one model")
    data_args(p)
    eval_args(p)
    p.add_argument("--models", required=True, help="a single model name")

    p = sub.add_parser("benchmark", help="cross-validate several models on identical folds")
    data_args(p)
    eval_args(p)
    p.add_argument("--models", default="all", help="comma-separated names or 'all' (default)")

    p = sub.add_parser("gridsearch", help="cross-validate every combination in a grid")
    data_args(p)
    eval_args(p)
    p.add_argument("--grid", help='JSON file: {"algorithm": NAME, "grid": {PARAM: [VALUES...]}}')

    p = sub.add_parser("train", help="fit one model on all rows and save it")
    data_args(p, seed_default=0)
    p.add_argument("--models", required=True, help="a single model name")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="hyperparameter override (repeatable)")

    p = sub.add_parser("predict", help="predict with a saved model")
    data_args(p)
    p.add_argument("--model", help="model file written by train")
    return parser


def _show_warning(message, category, filename, lineno, file=None, line=None):
    sys.stderr.write(f"warning[{category.__name__}]: {' '.join(str(message).split())}\n")


def main(argv: Sequence[str] | None = None) -> int:
    previous = warnings.showwarning
    warnings.showwarning = _show_warning
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "k", DEFAULT_K) < 2:
            raise CLIError("E_USAGE", f"--k must be >= 2, got {args.k}")
        COMMANDS[args.command](args)
    except CLIError as exc:
        message = " ".join(str(exc).split())
        sys.stderr.write(f"error[{exc.code}]: {message}\n")
        return 2 if exc.code == "E_USAGE" else 1
    except Exception as exc:  # a bug, but still one line on stderr
        sys.stderr.write(f"error[E_INTERNAL]: {type(exc).__name__}: {' '.join(str(exc).split())}\n")
        return 1
    finally:
        warnings.showwarning = previous
    return 0


if __name__ == "__main__":
    sys.exit(main())
