"""Data model and preprocessing for univariate hourly series.

A :class:`TimeSeries` is a uniformly sampled sequence of finite values.  It is
segmented into fixed-length :class:`Window` objects (168 input hours plus one
target hour by default), and all values are brought to z-scaled units with a
:class:`Scaler` fitted on the training portion only.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateSplit,
    EmptyInput,
    MalformedRow,
    NonUniformStep,
    WindowTooLong,
    ZeroVariance,
)

DEFAULT_TIMESTAMP_COLUMN = "Datetime"
DEFAULT_VALUE_COLUMN = "value"


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled real-valued series.

    Parameters
    ----------
    timestamps : list of datetime
        Strictly increasing instants at a constant step.
    values : ndarray
        Finite float64 values, one per timestamp.
    step : timedelta
        Sampling step (1 hour for the energy use case).
    """

    timestamps: tuple[datetime, ...]
    values: np.ndarray
    step: timedelta

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        n = len(self.timestamps)
        if n < 1 or values.shape != (n,):
            raise ValueError("timestamps and values must be non-empty and aligned")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if self.step <= timedelta(0):
            raise ValueError("step must be positive")
        for prev, cur in zip(self.timestamps, self.timestamps[1:]):
            if cur - prev != self.step:
                raise NonUniformStep(f"expected step {self.step} before {cur.isoformat()}")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Window:
    """One model sample: an input vector and (optionally) the next value.

    ``target`` is present iff the window was cut from a segment one sample
    longer than the input.  ``origin_index`` is the offset of the segment in
    the parent series; ``start_time`` is carried for reporting only.
    """

    input: np.ndarray
    target: float | None
    origin_index: int
    start_time: datetime | None = None

    def __post_init__(self):
        arr = np.asarray(self.input, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "input", arr)


@dataclass(frozen=True)
class Scaler:
    """Affine z-scaling ``x -> (x - mean) / std``.

    Uses the population (divide-by-n) standard deviation so fits are
    bit-reproducible across runs and platforms.
    """

    mean: float
    std: float

    def __post_init__(self):
        if not self.std > 0:
            raise ZeroVariance("standard deviation must be positive")

    def transform(self, x):
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std

    def inverse(self, x):
        return np.asarray(x, dtype=np.float64) * self.std + self.mean

    def transform_window(self, w: Window) -> Window:
        target = None if w.target is None else float(self.transform(w.target))
        return Window(self.transform(w.input), target, w.origin_index, w.start_time)


@dataclass(frozen=True)
class SplitSpec:
    """Chronological train/test split at ``floor(train_fraction * n)``."""

    train_fraction: float = 0.8

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


def _parse_timestamp(text: str) -> datetime:
    # ISO-8601; minute precision ("2002-04-01T01:00") and a space separator
    # are both accepted by fromisoformat.
    return datetime.fromisoformat(text.strip())


def parse_csv(
    stream,
    value_column: str = DEFAULT_VALUE_COLUMN,
    timestamp_column: str = DEFAULT_TIMESTAMP_COLUMN,
    fill_single_gaps: bool = False,
) -> TimeSeries:
    """Read a two-column CSV into a validated :class:`TimeSeries`.

    Rows are sorted by timestamp.  Duplicate timestamps are rejected.  A gap of
    exactly one missing step is filled by linear interpolation when
    ``fill_single_gaps`` is on; any other irregularity raises
    :class:`NonUniformStep`.

    Parameters
    ----------
    stream : byte or text stream
        UTF-8 CSV with a header row.
    value_column, timestamp_column : str
        Column names; defaults match the hourly energy dataset layout.
    fill_single_gaps : bool
        Off by default: strict rejection is safer for attribution validity.
    """
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)
    if hasattr(stream, "read") and isinstance(stream.read(0), bytes):
        stream = io.TextIOWrapper(stream, encoding="utf-8")

    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyInput("no header row") from None
    header = [h.strip() for h in header]
    try:
        t_idx = header.index(timestamp_column)
        v_idx = header.index(value_column)
    except ValueError:
        raise MalformedRow(1, f"header must contain {timestamp_column!r} and {value_column!r}, got {header}") from None

    rows: list[tuple[datetime, float]] = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) <= max(t_idx, v_idx):
            raise MalformedRow(line_no, f"expected at least {max(t_idx, v_idx) + 1} columns, got {len(row)}")
        try:
            ts = _parse_timestamp(row[t_idx])
        except ValueError:
            raise MalformedRow(line_no, f"bad timestamp {row[t_idx]!r}") from None
        try:
            value = float(row[v_idx])
        except ValueError:
            raise MalformedRow(line_no, f"bad value {row[v_idx]!r}") from None
        if not math.isfinite(value):
            raise MalformedRow(line_no, f"non-finite value {row[v_idx]!r}")
        rows.append((ts, value))

    if not rows:
        raise EmptyInput("no data rows")

    rows.sort(key=lambda r: r[0])
    timestamps = [r[0] for r in rows]
    values = [r[1] for r in rows]

    if len(rows) == 1:
        return TimeSeries(timestamps, np.array(values), timedelta(hours=1))

    step = min(b - a for a, b in zip(timestamps, timestamps[1:]))
    if step <= timedelta(0):
        dup = next(b for a, b in zip(timestamps, timestamps[1:]) if b == a)
        raise NonUniformStep(f"duplicate timestamp {dup.isoformat()}")

    out_t: list[datetime] = [timestamps[0]]
    out_v: list[float] = [values[0]]
    for ts, value in zip(timestamps[1:], values[1:]):
        gap = ts - out_t[-1]
        if gap == step:
            pass
        elif gap == 2 * step and fill_single_gaps:
            out_t.append(out_t[-1] + step)
            out_v.append((out_v[-1] + value) / 2.0)
        else:
            raise NonUniformStep(f"expected step {step} before {ts.isoformat()}")
        out_t.append(ts)
        out_v.append(value)

    return TimeSeries(out_t, np.array(out_v), step)


def split(series: TimeSeries, spec: SplitSpec = SplitSpec()) -> tuple[TimeSeries, TimeSeries]:
    """Split chronologically; the first part gets ``floor(f * n)`` points."""
    n = len(series)
    if n < 2:
        raise DegenerateSplit("need at least 2 points to split")
    k = math.floor(spec.train_fraction * n)
    if k == 0 or k == n:
        raise DegenerateSplit(f"fraction {spec.train_fraction} leaves an empty side for n={n}")
    head = TimeSeries(series.timestamps[:k], series.values[:k], series.step)
    tail = TimeSeries(series.timestamps[k:], series.values[k:], series.step)
    return head, tail


def make_windows(
    series: TimeSeries,
    length: int,
    stride: int,
    with_target: bool = True,
) -> list[Window]:
    """Cut overlapping windows starting at offsets 0, stride, 2*stride, ...

    With ``with_target`` the segment's first ``length - 1`` values become the
    input and its last value the target; otherwise the whole segment is the
    input.  The trailing partial segment is dropped, so the count is
    ``floor((n - length) / stride) + 1``.
    """
    n = len(series)
    if length > n:
        raise WindowTooLong(f"window length {length} exceeds series length {n}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if with_target and length < 2:
        raise ValueError("need length >= 2 to carry a target")

    windows = []
    for start in range(0, n - length + 1, stride):
        segment = series.values[start : start + length]
        if with_target:
            w = Window(segment[:-1], float(segment[-1]), start, series.timestamps[start])
        else:
            w = Window(segment, None, start, series.timestamps[start])
        windows.append(w)
    return windows


def fit_scaler(train: Sequence[Window] | Iterable[Window]) -> Scaler:
    """Fit mean/std over all training window inputs (population std)."""
    inputs = [w.input for w in train]
    if not inputs:
        raise EmptyInput("no training windows")
    stacked = np.concatenate(inputs)
    mean = float(stacked.mean())
    std = float(stacked.std())  # population convention (ddof=0)
    if std == 0.0:
        raise ZeroVariance("training data is constant")
    return Scaler(mean, std)
