"""Data model, CSV ingestion, and a seeded synthetic event generator.

The unit of measurement data is a MultiSeries: an (N, K) matrix of N time
steps by K named channels sampled at a fixed interval.  Labeled disturbances
(AnomalyEvent) carry an inclusive step span, a type drawn from a closed set,
and the root-cause channel that evaluation treats as ground truth.

The generator builds reproducible datasets of seasonal, trending,
cross-correlated series.  Each injected disturbance writes a typed waveform
(spike, level shift, or oscillation burst) into one root channel and an
attenuated copy into a few coupled channels, so the root channel always
carries the largest injected deviation.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.signal import lfilter

DEFAULT_DT = 1.0 / 240.0

MANIFEST_NAME = "manifest.json"
LABELS_NAME = "labels.csv"
LABEL_HEADER = ("series_id", "start_idx", "end_idx", "type", "root_channel")


class EventType(enum.Enum):
    """Closed set of disturbance labels; NORMAL marks undisturbed data."""

    BRANCH_FAULT = "branch fault"
    BRANCH_TRIPPING = "branch tripping"
    BUS_FAULT = "bus fault"
    BUS_TRIPPING = "bus tripping"
    GENERATOR_TRIPPING = "generator tripping"
    FORCED_OSCILLATION = "forced oscillation"
    NORMAL = "normal"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "EventType":
        key = text.strip().lower()
        for member in cls:
            if member.value == key:
                return member
        known = ", ".join(m.value for m in cls)
        raise ValueError(f"unknown event type {text!r} (expected one of: {known})")


DISTURBANCE_TYPES: tuple[EventType, ...] = tuple(
    e for e in EventType if e is not EventType.NORMAL
)

# Waveform families: short decaying impulse for faults, sustained offset for
# tripping events, alternating burst for forced oscillations.
_SPIKE_TYPES = frozenset({EventType.BRANCH_FAULT, EventType.BUS_FAULT})
_SHIFT_TYPES = frozenset(
    {EventType.BRANCH_TRIPPING, EventType.BUS_TRIPPING, EventType.GENERATOR_TRIPPING}
)


@dataclass(frozen=True, eq=False)
class MultiSeries:
    """Time-indexed measurement matrix: rows are steps, columns are channels.

    values is stored as a read-only float64 array; every entry must be
    finite.  channel_names are unique and positional (column k is named
    channel_names[k]).  dt is the sampling interval in seconds.
    """

    values: np.ndarray
    channel_names: tuple[str, ...]
    dt: float = DEFAULT_DT
    start_time: str | None = None

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.float64, order="C")
        if vals.ndim != 2:
            raise ValueError(f"values must be 2-d (steps x channels), got shape {vals.shape}")
        n, k = vals.shape
        if n < 1 or k < 1:
            raise ValueError(f"need at least one step and one channel, got shape {vals.shape}")
        if not np.isfinite(vals).all():
            step, col = np.argwhere(~np.isfinite(vals))[0]
            raise ValueError(f"non-finite value at step {step}, channel column {col}")
        names = tuple(str(c) for c in self.channel_names)
        if len(names) != k:
            raise ValueError(f"{len(names)} channel names for {k} channels")
        if len(set(names)) != len(names):
            raise ValueError("channel names must be unique")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "channel_names", names)

    @property
    def n_steps(self) -> int:
        return self.values.shape[0]

    @property
    def n_channels(self) -> int:
        return self.values.shape[1]

    def channel_index(self, name: str) -> int:
        try:
            return self.channel_names.index(name)
        except ValueError:
            raise ValueError(f"unknown channel {name!r}") from None

    def with_values(self, values: np.ndarray) -> "MultiSeries":
        """Same metadata, new matrix (shape may differ in steps, not channels)."""
        return MultiSeries(values, self.channel_names, self.dt, self.start_time)


@dataclass(frozen=True)
class AnomalyEvent:
    """A labeled disturbance: inclusive step span, type, root-cause channel."""

    start_idx: int
    end_idx: int
    type: EventType
    root_channel: str
    severity: float = 1.0

    def __post_init__(self) -> None:
        if not (0 <= self.start_idx <= self.end_idx):
            raise ValueError(f"bad event span [{self.start_idx}, {self.end_idx}]")
        if not self.severity > 0:
            raise ValueError("severity must be positive")

    @property
    def duration(self) -> int:
        return self.end_idx - self.start_idx + 1

    def steps(self) -> range:
        return range(self.start_idx, self.end_idx + 1)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Series paired with their event labels, plus a disjoint train/test split."""

    series: tuple[tuple[MultiSeries, tuple[AnomalyEvent, ...]], ...]
    train_idx: tuple[int, ...]
    test_idx: tuple[int, ...]
    series_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        pairs = tuple((s, tuple(evts)) for s, evts in self.series)
        n = len(pairs)
        if n == 0:
            raise ValueError("dataset must contain at least one series")
        ids = tuple(str(i) for i in self.series_ids)
        if not ids:
            ids = tuple(f"series_{i:04d}" for i in range(n))
        if len(ids) != n:
            raise ValueError(f"{len(ids)} series ids for {n} series")
        if len(set(ids)) != len(ids):
            raise ValueError("series ids must be unique")
        train = tuple(int(i) for i in self.train_idx)
        test = tuple(int(i) for i in self.test_idx)
        for idx in (*train, *test):
            if not 0 <= idx < n:
                raise ValueError(f"split index {idx} out of range for {n} series")
        overlap = set(train) & set(test)
        if overlap:
            raise ValueError(f"train and test splits overlap at indices {sorted(overlap)}")
        for sid, (s, events) in zip(ids, pairs):
            for e in events:
                if e.end_idx >= s.n_steps:
                    raise ValueError(
                        f"{sid}: event span [{e.start_idx}, {e.end_idx}] exceeds "
                        f"series length {s.n_steps}"
                    )
                if e.root_channel not in s.channel_names:
                    raise ValueError(
                        f"{sid}: event root channel {e.root_channel!r} is not a "
                        f"series channel"
                    )
        object.__setattr__(self, "series", pairs)
        object.__setattr__(self, "train_idx", train)
        object.__setattr__(self, "test_idx", test)
        object.__setattr__(self, "series_ids", ids)

    @property
    def n_series(self) -> int:
        return len(self.series)

    @property
    def train_pairs(self) -> tuple[tuple[MultiSeries, tuple[AnomalyEvent, ...]], ...]:
        return tuple(self.series[i] for i in self.train_idx)

    @property
    def test_pairs(self) -> tuple[tuple[MultiSeries, tuple[AnomalyEvent, ...]], ...]:
        return tuple(self.series[i] for i in self.test_idx)

    def labels_by_id(self) -> dict[str, tuple[AnomalyEvent, ...]]:
        return {sid: evts for sid, (_, evts) in zip(self.series_ids, self.series)}


def split_indices(
    n_series: int, test_fraction: float = 0.2
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Deterministic split: the last round(n * test_fraction) series are test."""
    if n_series < 1:
        raise ValueError("need at least one series")
    if not 0.0 <= test_fraction < 1.0:
        raise ValueError("test_fraction must lie in [0, 1)")
    n_test = int(round(n_series * test_fraction))
    n_test = min(n_test, n_series - 1)
    n_train = n_series - n_test
    return tuple(range(n_train)), tuple(range(n_train, n_series))


# ---------------------------------------------------------------------------
# CSV ingestion and serialization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IngestSchema:
    """How to read series CSVs: time column name, sampling interval, labels."""

    time_column: str = "t"
    dt: float = DEFAULT_DT
    label_path: str | None = None
    test_fraction: float = 0.2


def read_series_csv(
    path: str | Path, time_column: str = "t", dt: float = DEFAULT_DT
) -> MultiSeries:
    """Read one series from a `t,<ch1>,...,<chK>` CSV.

    Unparseable or non-finite cells raise with the offending line number and
    column name; they are never dropped.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"series file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ValueError(f"{path}: empty file")
        if header[0] != time_column:
            raise ValueError(
                f"{path}: first column must be {time_column!r}, got {header[0]!r}"
            )
        names = tuple(header[1:])
        if not names:
            raise ValueError(f"{path}: no channel columns")
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path} line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            parsed = []
            for name, cell in zip(names, row[1:]):
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path} line {lineno}, column {name!r}: "
                        f"cannot parse {cell!r} as a number"
                    ) from None
                if not math.isfinite(v):
                    raise ValueError(
                        f"{path} line {lineno}, column {name!r}: non-finite value {cell!r}"
                    )
                parsed.append(v)
            rows.append(parsed)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return MultiSeries(np.array(rows, dtype=np.float64), names, dt=dt)


def write_series_csv(series: MultiSeries, path: str | Path) -> None:
    """Write a series as `t,<ch1>,...,<chK>`; float cells roundtrip bit-exactly."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", *series.channel_names])
        for i in range(series.n_steps):
            # repr() emits the shortest decimal that parses back to the same float
            writer.writerow([i, *(repr(float(v)) for v in series.values[i])])


def read_labels_csv(path: str | Path) -> dict[str, list[AnomalyEvent]]:
    """Read a `series_id,start_idx,end_idx,type,root_channel` label file."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"label file not found: {path}")
    out: dict[str, list[AnomalyEvent]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != LABEL_HEADER:
            raise ValueError(
                f"{path}: label header must be {','.join(LABEL_HEADER)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(LABEL_HEADER):
                raise ValueError(
                    f"{path} line {lineno}: expected {len(LABEL_HEADER)} fields, "
                    f"got {len(row)}"
                )
            sid, start_s, end_s, type_s, root = row
            try:
                start, end = int(start_s), int(end_s)
            except ValueError:
                raise ValueError(
                    f"{path} line {lineno}: non-integer event span "
                    f"({start_s!r}, {end_s!r})"
                ) from None
            try:
                etype = EventType.parse(type_s)
            except ValueError as exc:
                raise ValueError(f"{path} line {lineno}: {exc}") from None
            out.setdefault(sid, []).append(AnomalyEvent(start, end, etype, root))
    return out


def write_labels_csv(
    labels: Mapping[str, Sequence[AnomalyEvent]], path: str | Path
) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LABEL_HEADER)
        for sid in labels:
            for e in labels[sid]:
                writer.writerow([sid, e.start_idx, e.end_idx, str(e.type), e.root_channel])


def write_dataset(ds: LabeledDataset, out_dir: str | Path) -> Path:
    """Write one CSV per series plus labels.csv and a split manifest.

    Returns the output directory.  Rereading with read_dataset reproduces
    values bit-exactly and preserves the split.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for sid, (series, _) in zip(ds.series_ids, ds.series):
        write_series_csv(series, out_dir / f"{sid}.csv")
    write_labels_csv(ds.labels_by_id(), out_dir / LABELS_NAME)
    manifest = {
        "dt": ds.series[0][0].dt,
        "series": list(ds.series_ids),
        "train": list(ds.train_idx),
        "test": list(ds.test_idx),
    }
    with open(out_dir / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out_dir


def read_dataset(path: str | Path, schema: IngestSchema | None = None) -> LabeledDataset:
    """Read a dataset directory written by write_dataset (or hand-assembled)."""
    schema = schema or IngestSchema()
    path = Path(path)
    if not path.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {path}")
    manifest_path = path / MANIFEST_NAME
    if manifest_path.is_file():
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
        ids = [str(s) for s in manifest["series"]]
        dt = float(manifest.get("dt", schema.dt))
        train = tuple(int(i) for i in manifest["train"])
        test = tuple(int(i) for i in manifest["test"])
    else:
        ids = sorted(
            p.stem for p in path.glob("*.csv") if p.name != LABELS_NAME
        )
        if not ids:
            raise ValueError(f"{path}: no series CSVs found")
        dt = schema.dt
        train, test = split_indices(len(ids), schema.test_fraction)
    label_path = Path(schema.label_path) if schema.label_path else path / LABELS_NAME
    labels = read_labels_csv(label_path) if label_path.is_file() else {}
    unknown = sorted(set(labels) - set(ids))
    if unknown:
        raise ValueError(f"label file references unknown series ids: {unknown}")
    pairs = []
    for sid in ids:
        series = read_series_csv(path / f"{sid}.csv", schema.time_column, dt)
        pairs.append((series, tuple(labels.get(sid, ()))))
    return LabeledDataset(tuple(pairs), train, test, series_ids=tuple(ids))


def ingest_csv(path: str | Path, schema: IngestSchema | None = None) -> LabeledDataset:
    """Ingest a dataset directory, or a single series CSV, into a LabeledDataset."""
    schema = schema or IngestSchema()
    path = Path(path)
    if path.is_dir():
        return read_dataset(path, schema)
    if not path.is_file():
        raise FileNotFoundError(f"no such file or directory: {path}")
    series = read_series_csv(path, schema.time_column, schema.dt)
    sid = path.stem
    events: tuple[AnomalyEvent, ...] = ()
    if schema.label_path:
        labels = read_labels_csv(schema.label_path)
        unknown = sorted(set(labels) - {sid})
        if unknown:
            raise ValueError(f"label file references unknown series ids: {unknown}")
        events = tuple(labels.get(sid, ()))
    return LabeledDataset(((series, events),), (0,), (), series_ids=(sid,))


def dataset_digest(ds: LabeledDataset) -> str:
    """sha256 over values, channel names, labels, and split; severity excluded
    because the label CSV format does not carry it."""
    h = hashlib.sha256()
    for sid, (series, events) in zip(ds.series_ids, ds.series):
        h.update(sid.encode())
        h.update("\x1f".join(series.channel_names).encode())
        h.update(np.ascontiguousarray(series.values).tobytes())
        for e in events:
            h.update(f"{e.start_idx},{e.end_idx},{e.type},{e.root_channel}".encode())
    h.update(("train:" + ",".join(map(str, ds.train_idx))).encode())
    h.update(("test:" + ",".join(map(str, ds.test_idx))).encode())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Synthetic generator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorConfig:
    """Shape and disturbance parameters for the synthetic generator.

    Amplitudes (spike_amp, shift_amp, osc_amp) are sampled uniformly from the
    given ranges and expressed in units of noise_sigma.  coupling < 1 is the
    attenuation applied to the copies written into coupled channels, which
    keeps the root channel's injected deviation strictly maximal.
    """

    n_series: int = 20
    n_steps: int = 240
    n_channels: int = 8
    season_length: int = 24
    dt: float = DEFAULT_DT
    level_range: tuple[float, float] = (-1.0, 1.0)
    seasonal_amp: tuple[float, float] = (0.5, 1.5)
    trend_slope: float = 0.002
    noise_sigma: float = 0.1
    ar_coeff: float = 0.6
    noise_corr: float = 0.3
    event_rate: float = 1.0
    event_types: tuple[EventType, ...] = DISTURBANCE_TYPES
    coupling: float = 0.4
    n_coupled: int = 2
    spike_amp: tuple[float, float] = (10.0, 16.0)
    shift_amp: tuple[float, float] = (10.0, 16.0)
    osc_amp: tuple[float, float] = (10.0, 16.0)
    event_duration: tuple[int, int] = (8, 20)
    min_start_frac: float = 0.3
    test_fraction: float = 0.2

    def __post_init__(self) -> None:
        if self.n_series < 1 or self.n_steps < 2 or self.n_channels < 1:
            raise ValueError("need n_series >= 1, n_steps >= 2, n_channels >= 1")
        if self.season_length < 1:
            raise ValueError("season_length must be >= 1")
        if not self.noise_sigma > 0:
            raise ValueError("noise_sigma must be positive")
        if not -1.0 < self.ar_coeff < 1.0:
            raise ValueError("ar_coeff must lie in (-1, 1) for stationarity")
        if self.n_channels > 1:
            lo = -1.0 / (self.n_channels - 1)
            if not lo < self.noise_corr < 1.0:
                raise ValueError(
                    f"noise_corr must lie in ({lo:.4f}, 1) for {self.n_channels} channels"
                )
        if self.event_rate < 0:
            raise ValueError("event_rate must be >= 0")
        if any(t is EventType.NORMAL for t in self.event_types):
            raise ValueError("event_types must not include 'normal'")
        if self.event_rate > 0 and not self.event_types:
            raise ValueError("event_rate > 0 requires at least one event type")
        wants_coupling = self.coupling > 0 and self.n_coupled > 0
        if self.event_rate > 0 and wants_coupling and self.n_channels < 2:
            raise ValueError("cross-channel coupling requires at least 2 channels")
        if not 0.0 <= self.coupling < 1.0:
            raise ValueError("coupling must lie in [0, 1): copies are attenuated")
        lo, hi = self.event_duration
        if not 1 <= lo <= hi:
            raise ValueError("event_duration must satisfy 1 <= lo <= hi")
        if not 0.0 <= self.min_start_frac < 1.0:
            raise ValueError("min_start_frac must lie in [0, 1)")
        min_start = int(round(self.min_start_frac * self.n_steps))
        if self.event_rate > 0 and hi > self.n_steps - min_start:
            raise ValueError(
                f"event duration up to {hi} cannot fit in the {self.n_steps - min_start} "
                f"steps after the warmup prefix"
            )

    def channel_names(self) -> tuple[str, ...]:
        return tuple(f"ch{k:02d}" for k in range(self.n_channels))


def _ar1_noise(cfg: GeneratorConfig, rng: np.random.Generator) -> np.ndarray:
    """Cross-correlated AR(1) noise with stationary per-channel std = noise_sigma."""
    n, k = cfg.n_steps, cfg.n_channels
    rho = cfg.noise_corr if k > 1 else 0.0
    corr = np.full((k, k), rho)
    np.fill_diagonal(corr, 1.0)
    chol = np.linalg.cholesky(corr)
    w = rng.standard_normal((n, k)) @ chol.T
    # innovations scaled by sqrt(1 - phi^2) keep the marginal std at sigma;
    # the first row is drawn from the stationary distribution directly
    x = cfg.noise_sigma * math.sqrt(1.0 - cfg.ar_coeff**2) * w
    x[0] = cfg.noise_sigma * w[0]
    return lfilter([1.0], [1.0, -cfg.ar_coeff], x, axis=0)


def _base_signal(cfg: GeneratorConfig, rng: np.random.Generator) -> np.ndarray:
    """Seasonal sinusoid + linear trend + AR(1) noise, one column per channel."""
    k = cfg.n_channels
    level = rng.uniform(*cfg.level_range, size=k)
    amp = rng.uniform(*cfg.seasonal_amp, size=k)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=k)
    slope = rng.uniform(-cfg.trend_slope, cfg.trend_slope, size=k)
    t = np.arange(cfg.n_steps, dtype=np.float64)[:, None]
    signal = level + slope * t + amp * np.sin(2.0 * np.pi * t / cfg.season_length + phase)
    return signal + _ar1_noise(cfg, rng)


def _event_waveform(etype: EventType, duration: int, amp: float) -> np.ndarray:
    """Injected deviation in noise-sigma units; peak magnitude is exactly amp."""
    j = np.arange(duration, dtype=np.float64)
    if etype in _SPIKE_TYPES:
        return amp * np.exp(-j / 1.5)
    if etype in _SHIFT_TYPES:
        return np.full(duration, amp)
    # forced oscillation: period-4 alternation hits +/-amp exactly
    return amp * np.cos(0.5 * np.pi * j)


def _inject_events(
    cfg: GeneratorConfig,
    values: np.ndarray,
    names: tuple[str, ...],
    rng: np.random.Generator,
) -> list[AnomalyEvent]:
    """Add disturbances in place; returns ground-truth labels sorted by start."""
    n, k = values.shape
    n_events = int(rng.poisson(cfg.event_rate)) if cfg.event_rate > 0 else 0
    if n_events == 0:
        return []
    min_start = int(round(cfg.min_start_frac * n))
    occupied = np.zeros(n, dtype=bool)
    margin = 5  # keep events separated so labels never blur together
    events: list[AnomalyEvent] = []
    for _ in range(n_events):
        etype = cfg.event_types[int(rng.integers(len(cfg.event_types)))]
        if etype in _SPIKE_TYPES:
            duration = int(rng.integers(1, 4))
            amp = float(rng.uniform(*cfg.spike_amp))
        elif etype in _SHIFT_TYPES:
            duration = int(rng.integers(cfg.event_duration[0], cfg.event_duration[1] + 1))
            amp = float(rng.uniform(*cfg.shift_amp))
        else:
            duration = int(rng.integers(cfg.event_duration[0], cfg.event_duration[1] + 1))
            amp = float(rng.uniform(*cfg.osc_amp))
        start = -1
        for _attempt in range(64):
            cand = int(rng.integers(min_start, n - duration + 1))
            if not occupied[cand : cand + duration].any():
                start = cand
                break
        if start < 0:
            continue  # series too crowded; drop this event
        occupied[max(0, start - margin) : min(n, start + duration + margin)] = True
        sign = 1.0 if rng.random() < 0.5 else -1.0
        waveform = sign * cfg.noise_sigma * _event_waveform(etype, duration, amp)
        root = int(rng.integers(k))
        span = slice(start, start + duration)
        values[span, root] += waveform
        if cfg.coupling > 0 and cfg.n_coupled > 0 and k > 1:
            others = np.delete(np.arange(k), root)
            coupled = rng.permutation(others)[: cfg.n_coupled]
            for c in coupled:
                values[span, c] += cfg.coupling * waveform
        events.append(
            AnomalyEvent(start, start + duration - 1, etype, names[root], severity=amp)
        )
    events.sort(key=lambda e: e.start_idx)
    return events


def synth_generate(cfg: GeneratorConfig, seed: int) -> LabeledDataset:
    """Generate a labeled dataset; identical (cfg, seed) gives identical bytes.

    Each series draws from two independent child streams, one for the base
    signal and one for event injection, so the base signal of series i
    depends only on (seed, i).  Regenerating with event_rate=0 therefore
    reproduces the exact undisturbed signal, which makes injected deviations
    directly inspectable.
    """
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    names = cfg.channel_names()
    pairs = []
    for i in range(cfg.n_series):
        values = _base_signal(cfg, np.random.default_rng([seed, i, 0]))
        events = _inject_events(cfg, values, names, np.random.default_rng([seed, i, 1]))
        pairs.append((MultiSeries(values, names, dt=cfg.dt), tuple(events)))
    train, test = split_indices(cfg.n_series, cfg.test_fraction)
    return LabeledDataset(tuple(pairs), train, test)


def strip_events(cfg: GeneratorConfig) -> GeneratorConfig:
    """The same generator config with event injection turned off."""
    return replace(cfg, event_rate=0.0)


def series_label(events: Sequence[AnomalyEvent]) -> EventType:
    """Series-level class label: the first event's type, NORMAL when unlabeled."""
    return events[0].type if events else EventType.NORMAL
