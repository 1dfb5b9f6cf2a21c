"""Participant records, the long-form trial CSV, and the synthetic generator.

A trial CSV holds one effort sample per row::

    participant_id,cobb_angle_deg,signal,cycle,sample_index,value
    P001,37.2,ml_force,0,0,41.96

Three effort channels exist (``ml_force`` in N, ``ap_torque`` and
``ml_torque`` in N m).  Every participant carries the same number of gait
cycles for every channel.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Mapping, TextIO

import numpy as np

from .rng import SplitMix64

TRIALS_HEADER = ("participant_id", "cobb_angle_deg", "signal", "cycle", "sample_index", "value")


class EffortSignalKind(str, Enum):
    ML_FORCE = "ml_force"
    AP_TORQUE = "ap_torque"
    ML_TORQUE = "ml_torque"


SIGNAL_ORDER = (EffortSignalKind.ML_FORCE, EffortSignalKind.AP_TORQUE, EffortSignalKind.ML_TORQUE)


class TrialsFormatError(ValueError):
    """Malformed trial CSV.  ``line`` is the 1-based physical line (header is line 1)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GaitCycleSeries:
    cycle_index: int
    samples: tuple[float, ...]


@dataclass(frozen=True)
class ParticipantRecord:
    id: str
    cobb_angle_deg: float
    signals: Mapping[EffortSignalKind, tuple[GaitCycleSeries, ...]]

    def concatenated(self, kind: EffortSignalKind) -> np.ndarray:
        """All samples of one channel, cycles in index order."""
        cycles = sorted(self.signals[kind], key=lambda c: c.cycle_index)
        if not cycles:
            return np.zeros(0)
        return np.concatenate([np.asarray(c.samples, dtype=float) for c in cycles])


@dataclass(frozen=True)
class Dataset:
    participants: tuple[ParticipantRecord, ...]
    cycles_per_participant: int

    def __len__(self) -> int:
        return len(self.participants)


@dataclass(frozen=True)
class Violation:
    code: str
    participant: str | None
    message: str

    def __str__(self) -> str:
        who = f"[{self.participant}] " if self.participant is not None else ""
        return f"{self.code}: {who}{self.message}"


# ---------------------------------------------------------------------------
# CSV


def _parse_float(text: str, what: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise TrialsFormatError(f"non-numeric {what} {text!r}", line) from None
    if not math.isfinite(value):
        raise TrialsFormatError(f"non-finite {what} {text!r}", line)
    return value


def _parse_index(text: str, what: str, line: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise TrialsFormatError(f"non-integer {what} {text!r}", line) from None
    if value < 0:
        raise TrialsFormatError(f"negative {what} {value}", line)
    return value


def parse_trials_csv(source: str | TextIO) -> Dataset:
    """Parse a trial CSV into a :class:`Dataset`.

    Participants keep their order of first appearance.  Rows may come in any
    order; samples are arranged by ``sample_index`` within each cycle.
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != TRIALS_HEADER:
        raise TrialsFormatError(
            f"header mismatch: expected {','.join(TRIALS_HEADER)!r}, got {','.join(header or [])!r}", 1
        )

    kinds = {k.value: k for k in EffortSignalKind}
    angles: dict[str, float] = {}
    data: dict[str, dict[EffortSignalKind, dict[int, dict[int, float]]]] = {}
    for row in reader:
        line = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(TRIALS_HEADER):
            raise TrialsFormatError(f"expected {len(TRIALS_HEADER)} fields, got {len(row)}", line)
        pid, angle_s, signal_s, cycle_s, sample_s, value_s = (c.strip() for c in row)
        if not pid:
            raise TrialsFormatError("empty participant_id", line)
        angle = _parse_float(angle_s, "cobb_angle_deg", line)
        kind = kinds.get(signal_s)
        if kind is None:
            raise TrialsFormatError(f"unknown signal label {signal_s!r}", line)
        cycle = _parse_index(cycle_s, "cycle", line)
        sample = _parse_index(sample_s, "sample_index", line)
        value = _parse_float(value_s, "value", line)

        if pid in angles:
            if angles[pid] != angle:
                raise TrialsFormatError(
                    f"inconsistent cobb_angle_deg for {pid}: {angle_s} vs {angles[pid]!r}", line
                )
        else:
            angles[pid] = angle
            data[pid] = {}
        samples = data[pid].setdefault(kind, {}).setdefault(cycle, {})
        if sample in samples:
            raise TrialsFormatError(
                f"duplicate row for ({pid}, {kind.value}, cycle {cycle}, sample {sample})", line
            )
        samples[sample] = value

    participants = []
    cycle_count = None
    for pid, by_kind in data.items():
        missing = [k.value for k in SIGNAL_ORDER if k not in by_kind]
        if missing:
            raise TrialsFormatError(f"participant {pid} is missing signal kind(s) {', '.join(missing)}")
        n_cycles = max(max(by_cycle) for by_cycle in by_kind.values()) + 1
        signals = {}
        for kind in SIGNAL_ORDER:
            by_cycle = by_kind[kind]
            gaps = [c for c in range(n_cycles) if c not in by_cycle]
            if gaps:
                raise TrialsFormatError(f"participant {pid} signal {kind.value} is missing cycle(s) {gaps}")
            signals[kind] = tuple(
                GaitCycleSeries(c, tuple(by_cycle[c][s] for s in sorted(by_cycle[c])))
                for c in range(n_cycles)
            )
        if cycle_count is None:
            cycle_count = n_cycles
        elif n_cycles != cycle_count:
            raise TrialsFormatError(
                f"participant {pid} has {n_cycles} cycles, earlier participants have {cycle_count}"
            )
        participants.append(ParticipantRecord(pid, angles[pid], signals))

    if not participants:
        raise TrialsFormatError("no data rows")
    return Dataset(tuple(participants), cycle_count)


def serialize_trials_csv(d: Dataset) -> str:
    """Render a dataset as trial CSV with round-trip-exact decimals and LF endings."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRIALS_HEADER)
    for p in d.participants:
        angle = repr(float(p.cobb_angle_deg))
        for kind in SIGNAL_ORDER:
            for cycle in p.signals.get(kind, ()):
                for i, v in enumerate(cycle.samples):
                    writer.writerow((p.id, angle, kind.value, cycle.cycle_index, i, repr(float(v))))
    return out.getvalue()


def read_trials_csv(path: str | Path) -> Dataset:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_trials_csv(fh)


def write_trials_csv(d: Dataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(serialize_trials_csv(d))


# ---------------------------------------------------------------------------
# Validation


def validate_dataset(d: Dataset) -> list[Violation]:
    """Every invariant violation of the dataset; an empty list means valid."""
    out: list[Violation] = []
    seen: dict[str, int] = {}
    for p in d.participants:
        seen[p.id] = seen.get(p.id, 0) + 1
    for pid, count in seen.items():
        if count > 1:
            out.append(Violation("duplicate_id", pid, f"id used by {count} participants"))

    for p in d.participants:
        pid = p.id
        if not isinstance(pid, str) or not pid:
            out.append(Violation("empty_id", None, "participant id must be a non-empty string"))
        angle = p.cobb_angle_deg
        if not (isinstance(angle, (int, float)) and math.isfinite(angle) and angle > 0):
            out.append(Violation("bad_angle", pid, f"cobb_angle_deg must be finite and > 0, got {angle!r}"))
        for key in p.signals:
            if not isinstance(key, EffortSignalKind):
                out.append(Violation("unknown_signal", pid, f"unknown signal kind {key!r}"))
        lengths = set()
        for kind in SIGNAL_ORDER:
            if kind not in p.signals:
                out.append(Violation("missing_signal", pid, f"signal {kind.value} missing"))
                continue
            cycles = p.signals[kind]
            indices = [c.cycle_index for c in cycles]
            if len(cycles) != d.cycles_per_participant:
                out.append(
                    Violation(
                        "cycle_count",
                        pid,
                        f"signal {kind.value} has {len(cycles)} cycles, expected {d.cycles_per_participant}",
                    )
                )
            elif indices != list(range(len(cycles))):
                out.append(Violation("cycle_index", pid, f"signal {kind.value} cycle indices {indices} not 0..n-1"))
            for c in cycles:
                if len(c.samples) == 0:
                    out.append(Violation("empty_cycle", pid, f"signal {kind.value} cycle {c.cycle_index} is empty"))
                elif not all(math.isfinite(v) for v in c.samples):
                    out.append(
                        Violation("non_finite", pid, f"signal {kind.value} cycle {c.cycle_index} has non-finite samples")
                    )
                lengths.add(len(c.samples))
        if len(lengths) > 1:
            out.append(Violation("cycle_length", pid, f"cycles have differing sample counts {sorted(lengths)}"))
    return out


# ---------------------------------------------------------------------------
# Synthetic data


@dataclass(frozen=True)
class SyntheticConfig:
    n_participants: int = 30
    cycles: int = 6
    samples_per_cycle: int = 100
    angle_min_deg: float = 15.0
    angle_max_deg: float = 66.0
    noise_std: float = 1.0
    seed: int = 42

    def validate(self) -> None:
        def is_int(x):
            return isinstance(x, (int, np.integer)) and not isinstance(x, bool)

        problems = []
        if not is_int(self.n_participants) or self.n_participants < 2:
            problems.append(f"n_participants must be an integer >= 2, got {self.n_participants!r}")
        if not is_int(self.cycles) or self.cycles < 1:
            problems.append(f"cycles must be an integer >= 1, got {self.cycles!r}")
        if not is_int(self.samples_per_cycle) or self.samples_per_cycle < 8:
            problems.append(f"samples_per_cycle must be an integer >= 8, got {self.samples_per_cycle!r}")
        lo, hi = self.angle_min_deg, self.angle_max_deg
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in (lo, hi)):
            problems.append("angle bounds must be finite reals")
        elif not 0 < lo < hi:
            problems.append(f"need 0 < angle_min_deg < angle_max_deg, got {lo!r}, {hi!r}")
        if not (isinstance(self.noise_std, (int, float)) and math.isfinite(self.noise_std) and self.noise_std >= 0):
            problems.append(f"noise_std must be finite and >= 0, got {self.noise_std!r}")
        if not is_int(self.seed) or not 0 <= self.seed < 2**64:
            problems.append(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if problems:
            raise ConfigError("; ".join(problems))

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "SyntheticConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"unknown synthetic config key(s): {', '.join(unknown)}")
        cfg = cls(**values)  # type: ignore[arg-type]
        cfg.validate()
        return cfg

    def to_mapping(self) -> dict:
        return asdict(self)


def load_synthetic_config(path: str | Path) -> SyntheticConfig:
    """Read a flat JSON object whose keys are the :class:`SyntheticConfig` field names."""
    with open(path, encoding="utf-8") as fh:
        try:
            values = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(values, dict):
        raise ConfigError(f"{path}: expected a flat key/value object")
    return SyntheticConfig.from_mapping(values)


@dataclass(frozen=True)
class Waveform:
    """Per-channel angle-to-signal map.

    A sample at cycle phase ``t`` in [0, 1) of a participant with latent angle
    ``theta`` is ``offset(theta) + amplitude(theta) * shape(t)`` where
    ``offset = offset_base + offset_slope * theta``, ``amplitude =
    amplitude_base + amplitude_slope * theta`` and ``shape`` is the sum of
    ``weight * sin(2 pi h t + phase)`` over harmonics ``h = 1, 2, ...``, scaled
    to unit peak-to-peak and flipped if needed so its maximum is at least as
    large as its negated minimum.
    """

    offset_base: float
    offset_slope: float
    amplitude_base: float
    amplitude_slope: float
    harmonics: tuple[tuple[float, float], ...] = field(default=((1.0, 0.0),))

    def shape(self, samples_per_cycle: int) -> np.ndarray:
        t = np.arange(samples_per_cycle) / samples_per_cycle
        s = np.zeros(samples_per_cycle)
        for h, (weight, phase) in enumerate(self.harmonics, start=1):
            s += weight * np.sin(2.0 * np.pi * h * t + phase)
        s /= s.max() - s.min()
        if s.max() < -s.min():
            s = -s
        return s


DEFAULT_WAVEFORMS: dict[EffortSignalKind, Waveform] = {
    EffortSignalKind.ML_FORCE: Waveform(5.0, 0.2, 30.0, 0.8, ((1.0, 0.0), (0.35, 0.6), (0.15, 1.9))),
    EffortSignalKind.AP_TORQUE: Waveform(1.0, 0.05, 4.0, 0.12, ((1.0, 0.4), (0.5, 2.1))),
    EffortSignalKind.ML_TORQUE: Waveform(2.0, 0.08, 6.0, 0.2, ((1.0, 1.2), (0.25, 0.3), (0.4, 2.7))),
}


def synthesize_dataset(
    cfg: SyntheticConfig, waveforms: Mapping[EffortSignalKind, Waveform] | None = None
) -> Dataset:
    """Seeded gait-like dataset whose effort amplitudes grow with the Cobb angle.

    Draw order from ``SplitMix64(cfg.seed)``: all ``n_participants`` latent
    angles (uniform in the configured range), then per participant, per channel
    in canonical order, per cycle, ``samples_per_cycle`` standard normals that
    are multiplied by ``noise_std``.
    """
    cfg.validate()
    waveforms = dict(DEFAULT_WAVEFORMS if waveforms is None else waveforms)
    for kind, w in waveforms.items():
        if w.offset_base < 0 or w.offset_slope <= 0 or w.amplitude_base < 0 or w.amplitude_slope <= 0:
            raise ConfigError(f"waveform for {kind.value} must have non-negative bases and positive slopes")

    rng = SplitMix64(cfg.seed)
    thetas = rng.uniform(cfg.angle_min_deg, cfg.angle_max_deg, cfg.n_participants)
    shapes = {k: waveforms[k].shape(cfg.samples_per_cycle) for k in SIGNAL_ORDER}
    width = max(3, len(str(cfg.n_participants)))

    participants = []
    for i, theta in enumerate(thetas):
        theta = float(theta)
        signals = {}
        for kind in SIGNAL_ORDER:
            w = waveforms[kind]
            clean = (w.offset_base + w.offset_slope * theta) + (w.amplitude_base + w.amplitude_slope * theta) * shapes[kind]
            cycles = []
            for c in range(cfg.cycles):
                noisy = clean + cfg.noise_std * rng.normal(cfg.samples_per_cycle)
                cycles.append(GaitCycleSeries(c, tuple(float(v) for v in noisy)))
            signals[kind] = tuple(cycles)
        participants.append(ParticipantRecord(f"P{i + 1:0{width}d}", theta, signals))
    return Dataset(tuple(participants), cfg.cycles)

