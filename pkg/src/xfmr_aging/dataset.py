"""
Hourly input series, labeling, and train/test partitioning.

An :class:`HourlySeries` pairs ambient temperature (°C) with load ratio
(per-unit of rated load) on a uniform one-hour grid. Series come from a CSV
file (:func:`ingest_csv`) or from the closed-form generator
(:func:`synthesize`). :func:`label` turns a series into a
:class:`LabeledDataset` whose targets are the hourly loss of life (percent)
from the thermal model, and :func:`split` / :func:`kfold` partition it.

CSV layouts::

    timestamp,ambient_temp_c,load_ratio                  (input)
    timestamp,ambient_temp_c,load_ratio,lol_percent      (labeled)

Timestamps are ISO-8601; time-zone aware stamps are converted to UTC.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import thermal
from .errors import BadDataError, DomainError, IngestionError, InputError

HOUR = np.timedelta64(3600, "s")
INPUT_COLUMNS = ("timestamp", "ambient_temp_c", "load_ratio")
LABELED_COLUMNS = INPUT_COLUMNS + ("lol_percent",)
TEMP_BOUNDS = (-60.0, 60.0)
LOAD_BOUNDS = (0.0, 3.0)
DEFAULT_START = np.datetime64("2015-01-01T00:00:00", "s")


@dataclass(frozen=True)
class HourlySeries:
    """Aligned hourly ambient temperature and load ratio.

    Construction checks the structural invariants (equal lengths, finite
    values, strictly increasing stamps one hour apart). Plausibility bounds
    are reported by :meth:`bound_violations` rather than enforced, so that a
    series with a bad reading can still be handed to :func:`preprocess`.
    """

    timestamps: np.ndarray
    ambient_temp: np.ndarray
    load_ratio: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype="datetime64[s]")
        temp = np.asarray(self.ambient_temp, dtype=float)
        load = np.asarray(self.load_ratio, dtype=float)
        if not (ts.ndim == temp.ndim == load.ndim == 1):
            raise InputError("series fields must be one-dimensional")
        if not (len(ts) == len(temp) == len(load)):
            raise InputError(
                f"length mismatch: {len(ts)} timestamps, {len(temp)} temperatures, {len(load)} load ratios"
            )
        if not (np.all(np.isfinite(temp)) and np.all(np.isfinite(load))):
            raise InputError("series values must be finite")
        if len(ts) > 1:
            steps = np.diff(ts)
            bad = np.flatnonzero(steps != HOUR)
            if bad.size:
                i = int(bad[0])
                raise InputError(f"timestamps not hourly between positions {i} and {i + 1}: {ts[i]} -> {ts[i + 1]}")
        for name, value in (("timestamps", ts), ("ambient_temp", temp), ("load_ratio", load)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    def __len__(self):
        return len(self.ambient_temp)

    @classmethod
    def from_arrays(cls, ambient_temp, load_ratio, start=DEFAULT_START) -> "HourlySeries":
        n = len(ambient_temp)
        start = np.datetime64(start, "s")
        return cls(start + np.arange(n) * HOUR, ambient_temp, load_ratio)

    def bound_violations(self, temp_bounds=TEMP_BOUNDS, load_bounds=LOAD_BOUNDS) -> list[tuple[int, str, float]]:
        """``(position, column, value)`` for every reading outside the bounds."""
        out = []
        for column, values, (lo, hi) in (
            ("ambient_temp_c", self.ambient_temp, temp_bounds),
            ("load_ratio", self.load_ratio, load_bounds),
        ):
            for i in np.flatnonzero((values < lo) | (values > hi)):
                out.append((int(i), column, float(values[i])))
        return sorted(out)


@dataclass(frozen=True)
class LabeledDataset:
    """Inputs ``(n, 2)`` = (ambient °C, load ratio) with hourly LOL % targets.

    ``index`` keeps the row positions in the originating series so that
    partitions stay traceable.
    """

    inputs: np.ndarray
    targets: np.ndarray
    index: np.ndarray = None
    timestamps: np.ndarray = None

    def __post_init__(self):
        x = np.asarray(self.inputs, dtype=float)
        y = np.asarray(self.targets, dtype=float)
        if x.ndim != 2 or x.shape[1] != 2:
            raise InputError(f"inputs must have shape (n, 2), got {x.shape}")
        if y.shape != (x.shape[0],):
            raise InputError(f"targets must have shape ({x.shape[0]},), got {y.shape}")
        if np.any(y < 0):
            raise InputError("loss-of-life targets must be >= 0")
        idx = np.arange(len(y)) if self.index is None else np.asarray(self.index, dtype=np.int64)
        if idx.shape != y.shape:
            raise InputError("index must match the number of rows")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "targets", y)
        object.__setattr__(self, "index", idx)
        if self.timestamps is not None:
            object.__setattr__(self, "timestamps", np.asarray(self.timestamps, dtype="datetime64[s]"))

    def __len__(self):
        return len(self.targets)

    def take(self, positions) -> "LabeledDataset":
        positions = np.asarray(positions, dtype=np.int64)
        ts = None if self.timestamps is None else self.timestamps[positions]
        return LabeledDataset(self.inputs[positions], self.targets[positions], self.index[positions], ts)

    def fingerprint(self) -> str:
        """Digest of the sorted row index, used to prove two splits coincide."""
        return split_fingerprint(self.index)


def split_fingerprint(index) -> str:
    idx = np.sort(np.asarray(index, dtype="<i8"))
    return hashlib.sha256(idx.tobytes()).hexdigest()[:16]


# --------------------------------------------------------------------------- #
# CSV ingestion

def _parse_timestamp(text: str) -> np.datetime64:
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    stamp = datetime.fromisoformat(text)
    if stamp.tzinfo is not None:
        stamp = stamp.astimezone(timezone.utc).replace(tzinfo=None)
    return np.datetime64(stamp, "s")


def _parse_number(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(text)
    return value


def ingest_csv(path, *, check_bounds: bool = True, temp_bounds=TEMP_BOUNDS, load_bounds=LOAD_BOUNDS) -> HourlySeries:
    """Read and validate an input CSV.

    Every defect is collected and raised together as an
    :class:`IngestionError` with 1-based file line numbers. With
    ``check_bounds=False`` implausible readings are let through for
    :func:`preprocess` to repair. A labeled CSV is accepted too; the extra
    ``lol_percent`` column is ignored.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    problems = []
    stamps, temps, loads = [], [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise IngestionError(path, [(None, "file is empty")])
        header = [h.strip() for h in header]
        missing = [c for c in INPUT_COLUMNS if c not in header]
        if missing:
            raise IngestionError(path, [(None, f"missing column(s): {', '.join(missing)}")])
        cols = {c: header.index(c) for c in INPUT_COLUMNS}
        for line, row in enumerate(reader, start=2):
            if not any(cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                problems.append((line, f"expected {len(header)} fields, found {len(row)}"))
                continue
            try:
                ts = _parse_timestamp(row[cols["timestamp"]])
            except ValueError:
                problems.append((line, f"unparseable timestamp {row[cols['timestamp']]!r}"))
                ts = None
            values = []
            for name in ("ambient_temp_c", "load_ratio"):
                cell = row[cols[name]]
                try:
                    values.append(_parse_number(cell))
                except ValueError:
                    problems.append((line, f"non-numeric {name} {cell!r}"))
                    values.append(None)
            if ts is not None and stamps and stamps[-1][1] is not None:
                prev_line, prev = stamps[-1]
                if ts == prev:
                    problems.append((line, f"duplicated timestamp {ts} (also on row {prev_line}); spacing must be 1 h"))
                elif ts - prev != HOUR:
                    problems.append((line, f"timestamp spacing {(ts - prev) / HOUR:g} h after row {prev_line}; expected 1 h"))
            if check_bounds:
                for name, value, (lo, hi) in zip(
                    ("ambient_temp_c", "load_ratio"), values, (temp_bounds, load_bounds)
                ):
                    if value is not None and not lo <= value <= hi:
                        problems.append((line, f"{name} {value:g} outside [{lo:g}, {hi:g}]"))
            stamps.append((line, ts))
            temps.append(values[0])
            loads.append(values[1])
    if not stamps and not problems:
        problems.append((None, "no data rows"))
    if problems:
        raise IngestionError(path, problems)
    return HourlySeries(np.array([s for _, s in stamps], dtype="datetime64[s]"), temps, loads)


def format_timestamp(ts) -> str:
    return str(np.datetime64(ts, "s"))


def write_series_csv(path, series: HourlySeries, targets=None) -> None:
    """Write the input layout, or the labeled layout when ``targets`` is given."""
    header = INPUT_COLUMNS if targets is None else LABELED_COLUMNS
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(len(series)):
            row = [format_timestamp(series.timestamps[i]), repr(float(series.ambient_temp[i])), repr(float(series.load_ratio[i]))]
            if targets is not None:
                row.append(repr(float(targets[i])))
            writer.writerow(row)


def read_labeled_csv(path) -> LabeledDataset:
    """Read the labeled layout written by :func:`write_series_csv`."""
    path = Path(path)
    series = ingest_csv(path, check_bounds=False)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if "lol_percent" not in (reader.fieldnames or []):
            raise IngestionError(path, [(None, "missing column(s): lol_percent")])
        targets = []
        problems = []
        for line, row in enumerate(reader, start=2):
            try:
                targets.append(_parse_number(row["lol_percent"]))
            except (TypeError, ValueError):
                problems.append((line, f"non-numeric lol_percent {row['lol_percent']!r}"))
    if problems:
        raise IngestionError(path, problems)
    return LabeledDataset(np.column_stack([series.ambient_temp, series.load_ratio]), targets, timestamps=series.timestamps)


# --------------------------------------------------------------------------- #
# Pre-processing

@dataclass(frozen=True)
class BadDataPolicy:
    z_threshold: float = 4.0
    temp_bounds: tuple = TEMP_BOUNDS
    load_bounds: tuple = LOAD_BOUNDS
    max_bad_fraction: float = 0.10


@dataclass(frozen=True)
class Repair:
    position: int
    column: str
    original: float
    replacement: float
    reason: str


def _flag(values: np.ndarray, bounds, z_threshold: float) -> dict[int, str]:
    lo, hi = bounds
    flagged = {int(i): f"outside [{lo:g}, {hi:g}]" for i in np.flatnonzero((values < lo) | (values > hi))}
    # z-scores from the in-bound readings only, so one wild value cannot mask itself
    ok = np.ones(values.shape, dtype=bool)
    ok[list(flagged)] = False
    if ok.sum() >= 3:
        mean, std = values[ok].mean(), values[ok].std()
        if std > 0:
            z = np.abs(values - mean) / std
            for i in np.flatnonzero(ok & (z > z_threshold)):
                flagged[int(i)] = f"|z| = {z[i]:.2f} > {z_threshold:g}"
    return flagged


def _interpolate(values: np.ndarray, bad: list[int]) -> np.ndarray:
    good = np.ones(values.shape, dtype=bool)
    good[bad] = False
    positions = np.arange(values.size)
    out = values.copy()
    # np.interp holds the edge value beyond the first/last valid reading
    out[bad] = np.interp(positions[bad], positions[good], values[good])
    return out


def preprocess(series: HourlySeries, policy: BadDataPolicy = BadDataPolicy()) -> tuple[HourlySeries, list[Repair]]:
    """Detect implausible readings and repair them by linear interpolation.

    A reading is flagged when it lies outside the absolute bounds or its
    z-score (against the in-bound readings of the same column) exceeds the
    threshold. Flagged readings are replaced by interpolating between the
    nearest unflagged neighbours; all other readings are left untouched.
    Raises :class:`BadDataError` when more than ``max_bad_fraction`` of the
    rows carry a flag.
    """
    n = len(series)
    temp_flags = _flag(series.ambient_temp, policy.temp_bounds, policy.z_threshold)
    load_flags = _flag(series.load_ratio, policy.load_bounds, policy.z_threshold)
    bad_rows = set(temp_flags) | set(load_flags)
    if not bad_rows:
        return series, []
    if len(bad_rows) > policy.max_bad_fraction * n:
        raise BadDataError(
            f"{len(bad_rows)} of {n} rows ({len(bad_rows) / n:.1%}) flagged as bad data; "
            f"limit is {policy.max_bad_fraction:.0%}"
        )
    repairs = []
    columns = {}
    for column, values, flags in (
        ("ambient_temp_c", series.ambient_temp, temp_flags),
        ("load_ratio", series.load_ratio, load_flags),
    ):
        if not flags:
            columns[column] = values
            continue
        bad = sorted(flags)
        fixed = _interpolate(values, bad)
        columns[column] = fixed
        repairs.extend(Repair(i, column, float(values[i]), float(fixed[i]), flags[i]) for i in bad)
    repairs.sort(key=lambda r: (r.position, r.column))
    return HourlySeries(series.timestamps, columns["ambient_temp_c"], columns["load_ratio"]), repairs


# --------------------------------------------------------------------------- #
# Synthetic profiles

@dataclass(frozen=True)
class SyntheticProfile:
    """Parameters of the closed-form synthetic year.

    With ``h`` the hour index from the start stamp::

        temp(h) = temp_mean
                  - temp_annual_amp  * cos(2π (h - temp_annual_lag) / 8760)
                  - temp_diurnal_amp * cos(2π (h - temp_diurnal_lag) / 24)
                  + temp_noise * ε_T(h)

        load(h) = load_base
                  + load_evening_amp  * cos(2π (h - load_evening_peak) / 24)
                  + load_morning_amp  * cos(4π (h - load_morning_peak) / 24)
                  + load_weekly_amp   * cos(2π (h - load_weekly_peak) / 168)
                  + load_seasonal_amp * cos(2π (h - load_seasonal_peak) / 8760)
                  + load_noise * ε_K(h),      clipped to load_clip

    ε_T, ε_K are independent standard normal draws from the seeded
    generator. The defaults put temperatures near −20…35 °C (cold
    snap late January, warm afternoons in July) and the load ratio of a
    residential feeder with an evening peak and a summer maximum.
    """

    temp_mean: float = 10.0
    temp_annual_amp: float = 14.0
    temp_annual_lag: float = 480.0
    temp_diurnal_amp: float = 5.0
    temp_diurnal_lag: float = 3.0
    temp_noise: float = 2.5
    load_base: float = 0.62
    load_evening_amp: float = 0.12
    load_evening_peak: float = 19.0
    load_morning_amp: float = 0.08
    load_morning_peak: float = 8.0
    load_weekly_amp: float = 0.05
    load_weekly_peak: float = 132.0
    load_seasonal_amp: float = 0.15
    load_seasonal_peak: float = 4800.0
    load_noise: float = 0.02
    load_clip: tuple = (0.2, 1.2)
    start: str = "2015-01-01T00:00:00"

    def __post_init__(self):
        lo, hi = self.load_clip
        if not 0 <= lo < hi:
            raise DomainError(f"load_clip must satisfy 0 <= low < high, got {self.load_clip!r}")
        if self.temp_noise < 0 or self.load_noise < 0:
            raise DomainError("noise amplitudes must be >= 0")
        for name, value in self.__dict__.items():
            if isinstance(value, float) and not math.isfinite(value):
                raise DomainError(f"{name} must be finite")

    @classmethod
    def from_mapping(cls, mapping) -> "SyntheticProfile":
        known = set(cls.__dataclass_fields__)
        unknown = set(mapping) - known
        if unknown:
            raise DomainError(f"unknown synthetic-profile field(s): {sorted(unknown)}")
        values = dict(mapping)
        if "load_clip" in values:
            values["load_clip"] = tuple(float(v) for v in values["load_clip"])
        for name, value in values.items():
            if name not in ("load_clip", "start"):
                values[name] = float(value)
        return cls(**values)


def synthesize(profile: SyntheticProfile = SyntheticProfile(), hours: int = 8760, seed: int = 0) -> HourlySeries:
    """Generate a synthetic hourly series from ``profile`` (see its formula)."""
    if int(hours) != hours or hours < 24:
        raise DomainError(f"hours must be an integer >= 24, got {hours!r}")
    hours = int(hours)
    p = profile
    rng = np.random.default_rng(seed)
    noise_t = rng.standard_normal(hours)
    noise_k = rng.standard_normal(hours)
    h = np.arange(hours, dtype=float)
    tau = 2.0 * np.pi
    temp = (
        p.temp_mean
        - p.temp_annual_amp * np.cos(tau * (h - p.temp_annual_lag) / 8760.0)
        - p.temp_diurnal_amp * np.cos(tau * (h - p.temp_diurnal_lag) / 24.0)
        + p.temp_noise * noise_t
    )
    load = (
        p.load_base
        + p.load_evening_amp * np.cos(tau * (h - p.load_evening_peak) / 24.0)
        + p.load_morning_amp * np.cos(2.0 * tau * (h - p.load_morning_peak) / 24.0)
        + p.load_weekly_amp * np.cos(tau * (h - p.load_weekly_peak) / 168.0)
        + p.load_seasonal_amp * np.cos(tau * (h - p.load_seasonal_peak) / 8760.0)
        + p.load_noise * noise_k
    )
    load = np.clip(load, *p.load_clip)
    return HourlySeries.from_arrays(temp, load, start=p.start)


# --------------------------------------------------------------------------- #
# Labeling and partitioning

def label(
    series: HourlySeries,
    params: thermal.TransformerParams = thermal.TransformerParams(),
    **profile_options,
) -> LabeledDataset:
    """Attach the thermal model's hourly loss of life to each (θ_A, K) pair.

    Extra keyword arguments (``mode``, ``start``, ``initial_load_ratio``)
    go to :func:`xfmr_aging.thermal.run_profile`.
    """
    if len(series) == 0:
        raise InputError("cannot label an empty series")
    records = thermal.run_profile(series, params, **profile_options)
    targets = np.array([r.lol_percent for r in records])
    inputs = np.column_stack([series.ambient_temp, series.load_ratio])
    return LabeledDataset(inputs, targets, timestamps=series.timestamps)


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.30
    k: int = 5
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.test_fraction < 1:
            raise DomainError(f"test_fraction must lie in (0, 1), got {self.test_fraction!r}")
        if self.k < 2:
            raise DomainError(f"k must be >= 2, got {self.k!r}")


def split(data: LabeledDataset, spec: SplitSpec = SplitSpec()) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded shuffle, then the first ``round(test_fraction * n)`` rows are the test set."""
    n = len(data)
    if n < 10:
        raise InputError(f"need at least 10 rows to split, got {n}")
    n_test = int(round(spec.test_fraction * n))
    n_test = min(max(n_test, 1), n - 1)
    order = np.random.default_rng(spec.seed).permutation(n)
    return data.take(np.sort(order[n_test:])), data.take(np.sort(order[:n_test]))


def kfold(data: LabeledDataset, k: int = 5, seed: int = 0) -> list[tuple[LabeledDataset, LabeledDataset]]:
    """``k`` (train, validation) pairs whose validation folds partition the data."""
    n = len(data)
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k!r}")
    if k > n:
        raise InputError(f"k = {k} exceeds the {n} available rows")
    order = np.random.default_rng(seed).permutation(n)
    folds = np.array_split(order, k)
    pairs = []
    for i, fold in enumerate(folds):
        rest = np.concatenate([f for j, f in enumerate(folds) if j != i])
        pairs.append((data.take(np.sort(rest)), data.take(np.sort(fold))))
    return pairs
