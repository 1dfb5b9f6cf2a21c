"""Six summary statistics per effort channel, the 18-column matrix, and scaling."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence, TextIO

import numpy as np

from .gait_data import SIGNAL_ORDER, Dataset, ParticipantRecord

STAT_NAMES = (
    "f1_peak_deviation",
    "f2_var_plus_absmean",
    "f3_peak_magnitude",
    "f4_mean",
    "f5_std",
    "f6_range",
)
FEATURE_NAMES = tuple(f"{kind.value}_{stat}" for kind in SIGNAL_ORDER for stat in STAT_NAMES)
N_FEATURES = len(FEATURE_NAMES)

# zero-variance guard for the scaler
_MIN_SCALE = 1e-12


class SignalStats(NamedTuple):
    f1_peak_deviation: float
    f2_var_plus_absmean: float
    f3_peak_magnitude: float
    f4_mean: float
    f5_std: float
    f6_range: float


def signal_stats(samples: Sequence[float] | np.ndarray, literal: bool = False) -> SignalStats:
    """Summary statistics of one effort signal.

    With ``m`` the mean, ``v`` the population variance, ``hi``/``lo`` the
    extremes:

    * f1 = max(hi - m, m - lo), the larger deviation of either extreme;
    * f2 = max(v - m, v + m), i.e. ``v + |m|``;
    * f3 = max(|hi|, |lo|), the peak magnitude;
    * f4 = m, f5 = sqrt(v), f6 = hi - lo.

    ``literal=True`` switches f1 to ``max(hi - m, lo - m)`` and f3 to
    ``max(hi, lo)``, which reduce to ``hi - m`` and ``hi``.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("signal_stats needs at least one sample")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal_stats needs finite samples")
    hi = float(x.max())
    lo = float(x.min())
    # rounding can push the mean a ulp outside [lo, hi]
    m = min(max(float(x.mean()), lo), hi)
    v = float(np.mean((x - m) ** 2))
    if literal:
        f1 = max(hi - m, lo - m)
        f3 = max(hi, lo)
    else:
        f1 = max(hi - m, m - lo)
        f3 = max(abs(hi), abs(lo))
    f2 = max(v - m, v + m)
    return SignalStats(f1, f2, f3, m, math.sqrt(v), hi - lo)


def extract_features(p: ParticipantRecord, literal: bool = False) -> np.ndarray:
    """18-vector for one participant: channel-major, f1..f6 within a channel."""
    out = []
    for kind in SIGNAL_ORDER:
        x = p.concatenated(kind)
        if x.size == 0:
            raise ValueError(f"participant {p.id}: signal {kind.value} has no samples")
        out.extend(signal_stats(x, literal=literal))
    return np.array(out, dtype=float)


@dataclass(frozen=True)
class FeatureMatrix:
    rows: np.ndarray
    targets: np.ndarray
    ids: tuple[str, ...]
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        targets = np.asarray(self.targets, dtype=float).ravel()
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        n = rows.shape[0]
        if n < 1 or len(targets) != n or len(self.ids) != n:
            raise ValueError(
                f"rows ({n}), targets ({len(targets)}) and ids ({len(self.ids)}) must share a length >= 1"
            )
        if rows.shape[1] != len(self.feature_names):
            raise ValueError(f"{rows.shape[1]} columns but {len(self.feature_names)} feature names")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def width(self) -> int:
        return self.rows.shape[1]

    def subset(self, index) -> "FeatureMatrix":
        index = np.asarray(index)
        return FeatureMatrix(self.rows[index], self.targets[index], tuple(self.ids[i] for i in index), self.feature_names)


def build_matrix(d: Dataset, literal: bool = False) -> FeatureMatrix:
    rows = [extract_features(p, literal=literal) for p in d.participants]
    return FeatureMatrix(
        np.vstack(rows),
        np.array([p.cobb_angle_deg for p in d.participants], dtype=float),
        tuple(p.id for p in d.participants),
    )


def serialize_feature_csv(fm: FeatureMatrix) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("participant_id", "cobb_angle_deg", *fm.feature_names))
    for pid, target, row in zip(fm.ids, fm.targets, fm.rows):
        writer.writerow((pid, repr(float(target)), *(repr(float(v)) for v in row)))
    return out.getvalue()


def parse_feature_csv(source: str | TextIO) -> FeatureMatrix:
    """Read a feature-matrix CSV; any columns after the first two are features."""
    stream = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or header[:2] != ["participant_id", "cobb_angle_deg"] or len(header) < 3:
        raise ValueError("line 1: feature CSV header must start with participant_id,cobb_angle_deg")
    names = tuple(header[2:])
    ids, targets, rows = [], [], []
    for row in reader:
        if not row:
            continue
        line = reader.line_num
        if len(row) != len(header):
            raise ValueError(f"line {line}: expected {len(header)} fields, got {len(row)}")
        try:
            values = [float(v) for v in row[1:]]
        except ValueError:
            raise ValueError(f"line {line}: non-numeric value") from None
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"line {line}: non-finite value")
        ids.append(row[0])
        targets.append(values[0])
        rows.append(values[1:])
    if not rows:
        raise ValueError("feature CSV has no data rows")
    return FeatureMatrix(np.array(rows), np.array(targets), tuple(ids), names)


def write_feature_csv(fm: FeatureMatrix, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(serialize_feature_csv(fm))


def read_feature_csv(path: str | Path) -> FeatureMatrix:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_feature_csv(fh)


@dataclass(frozen=True)
class ScalerParams:
    mean: np.ndarray
    scale: np.ndarray

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ScalerParams":
        return cls(np.array(d["mean"], dtype=float), np.array(d["scale"], dtype=float))


def fit_scaler(rows) -> ScalerParams:
    """Column means and population standard deviations (degenerate columns get scale 1)."""
    x = np.asarray(rows, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("fit_scaler needs a non-empty 2-D array of rows")
    mean = x.mean(axis=0)
    std = np.sqrt(np.mean((x - mean) ** 2, axis=0))
    scale = np.where(std < _MIN_SCALE, 1.0, std)
    return ScalerParams(mean, scale)


def apply_scaler(params: ScalerParams, rows) -> np.ndarray:
    x = np.asarray(rows, dtype=float)
    if x.ndim != 2 or x.shape[1] != params.mean.shape[0]:
        raise ValueError(f"row width {x.shape[-1] if x.ndim else 0} does not match scaler width {params.mean.shape[0]}")
    return (x - params.mean) / params.scale


def invert_scaler(params: ScalerParams, rows) -> np.ndarray:
    x = np.asarray(rows, dtype=float)
    if x.ndim != 2 or x.shape[1] != params.mean.shape[0]:
        raise ValueError("row width does not match scaler width")
    return x * params.scale + params.mean
