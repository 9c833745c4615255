"""Frequency-series ingestion: CSV parsing, windowing, serialization.

The on-disk format is a two-column CSV with header ``time_s,frequency_hz``,
UTF-8 encoded, LF or CRLF line endings. Timestamps must be strictly
increasing and uniformly spaced; the sample period is inferred from the
first two rows.
"""
from __future__ import annotations

import math
from array import array
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import (
    EmptyInput,
    MalformedRow,
    NonFiniteValue,
    NonUniformSampling,
    OutOfRange,
)

CSV_HEADER = "time_s,frequency_hz"

# Relative tolerance for the gap-uniformity check, per expected gap width.
GAP_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class FrequencySeries:
    """A uniformly sampled frequency record.

    Attributes:
        start_epoch: Time of the first sample, epoch seconds.
        dt: Sample period in seconds, > 0.
        values: Frequency samples in Hz, finite, at least one.
        nominal_hz: Nominal system frequency the record is referenced to.
        filled_samples: Number of samples inserted by gap filling at parse
            time. Parse provenance; windowing carries it through unchanged.
    """

    start_epoch: float
    dt: float
    values: np.ndarray
    nominal_hz: float = 50.0
    filled_samples: int = 0

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.ndim != 1 or vals.size == 0:
            raise EmptyInput("series needs at least one sample")
        if not np.all(np.isfinite(vals)):
            raise NonFiniteValue("series contains a non-finite sample")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        if not (math.isfinite(self.nominal_hz) and self.nominal_hz > 0):
            raise ValueError(f"nominal_hz must be positive, got {self.nominal_hz}")
        if not math.isfinite(self.start_epoch):
            raise ValueError("start_epoch must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrequencySeries):
            return NotImplemented
        return (
            self.start_epoch == other.start_epoch
            and self.dt == other.dt
            and self.nominal_hz == other.nominal_hz
            and self.filled_samples == other.filled_samples
            and np.array_equal(self.values, other.values)
        )

    @property
    def duration_s(self) -> float:
        """Span covered by the samples, first to last, in seconds."""
        return (len(self) - 1) * self.dt

    def time_s(self) -> np.ndarray:
        """Absolute sample times in epoch seconds."""
        return self.start_epoch + np.arange(len(self)) * self.dt


def _lines_of(text_or_lines: str | Iterable[str]) -> Iterator[str]:
    if isinstance(text_or_lines, str):
        return iter(text_or_lines.splitlines())
    return iter(text_or_lines)


def parse_csv(
    stream: str | Iterable[str],
    *,
    nominal_hz: float = 50.0,
    fill_gaps: str | None = None,
) -> FrequencySeries:
    """Parse a ``time_s,frequency_hz`` CSV into a FrequencySeries.

    Accepts a string or any iterable of lines (an open text file works and
    avoids materializing month-scale inputs twice). The sample period is
    inferred from the first two data rows, so at least two rows are
    required; all later gaps must equal it to within 1e-9 relative.

    Args:
        stream: CSV text or line iterable, header included.
        nominal_hz: Nominal system frequency recorded on the series.
        fill_gaps: None rejects any non-uniform gap. "hold" repairs gaps
            that are integer multiples of the sample period by repeating
            the previous sample; the inserted count is recorded on the
            series as ``filled_samples``. Fractional gaps are rejected
            either way.

    Raises:
        EmptyInput: No data rows, or a single row (period not inferable).
        MalformedRow: Wrong header, wrong field count, or non-numeric
            field. Rows are numbered 1-based over data rows.
        NonFiniteValue: A frequency value is NaN or infinite.
        NonUniformSampling: A gap that the fill policy cannot repair.
    """
    lines = _lines_of(stream)
    try:
        header = next(lines)
    except StopIteration:
        raise EmptyInput("input has no header line") from None
    if header.lstrip("﻿").strip() != CSV_HEADER:
        raise MalformedRow(f"expected header {CSV_HEADER!r}", row=0)

    times = array("d")
    values = array("d")
    t_append = times.append
    v_append = values.append
    isfinite = math.isfinite
    row = 0
    for line in lines:
        line = line.strip()
        if not line:
            continue
        row += 1
        parts = line.split(",")
        if len(parts) != 2:
            raise MalformedRow(f"expected 2 fields, got {len(parts)}", row=row)
        try:
            t = float(parts[0])
            v = float(parts[1])
        except ValueError:
            raise MalformedRow(f"non-numeric field in {line!r}", row=row) from None
        if not isfinite(t):
            raise MalformedRow(f"non-finite timestamp {parts[0]!r}", row=row)
        if not isfinite(v):
            raise NonFiniteValue(f"non-finite frequency {parts[1]!r}", row=row)
        t_append(t)
        v_append(v)

    n = len(values)
    if n == 0:
        raise EmptyInput("input has no data rows")
    if n == 1:
        raise EmptyInput("need at least two data rows to infer the sample period")

    t_arr = np.frombuffer(times, dtype=np.float64)
    vals = np.frombuffer(values, dtype=np.float64)
    dt = float(t_arr[1] - t_arr[0])
    if dt <= 0:
        raise NonUniformSampling("timestamps not strictly increasing", row=2)
    gaps = np.diff(t_arr)
    filled = 0
    if fill_gaps is None:
        bad = np.abs(gaps - dt) > GAP_RTOL * dt
        if bad.any():
            i = int(np.argmax(bad))
            raise NonUniformSampling(
                f"gap of {gaps[i]:.9g} s where the inferred period is {dt:.9g} s",
                row=i + 2,
            )
    elif fill_gaps == "hold":
        mult = np.rint(gaps / dt)
        ok = (mult >= 1) & (np.abs(gaps - mult * dt) <= GAP_RTOL * dt * mult)
        if not ok.all():
            i = int(np.argmax(~ok))
            raise NonUniformSampling(
                f"gap of {gaps[i]:.9g} s is not an integer multiple of the "
                f"inferred period {dt:.9g} s",
                row=i + 2,
            )
        counts = mult.astype(np.int64)
        filled = int(counts.sum()) - (n - 1)
        if filled:
            vals = np.concatenate([np.repeat(vals[:-1], counts), vals[-1:]])
    else:
        raise ValueError(f"unknown fill_gaps policy {fill_gaps!r}")

    return FrequencySeries(
        start_epoch=float(t_arr[0]),
        dt=dt,
        values=vals,
        nominal_hz=nominal_hz,
        filled_samples=filled,
    )


def read_csv(
    path, *, nominal_hz: float = 50.0, fill_gaps: str | None = None
) -> FrequencySeries:
    """Parse a CSV file from disk (UTF-8, BOM tolerated), streaming lines."""
    with open(path, "r", encoding="utf-8-sig", newline="") as fh:
        return parse_csv(fh, nominal_hz=nominal_hz, fill_gaps=fill_gaps)


def window(series: FrequencySeries, offset: int, length: int) -> FrequencySeries:
    """Return the sub-series of ``length`` samples starting at ``offset``.

    The result keeps dt and nominal_hz; its start_epoch shifts by
    offset * dt. Raises OutOfRange when the requested window does not lie
    inside the series.
    """
    n = len(series)
    if offset < 0 or length < 1 or offset + length > n:
        raise OutOfRange(
            f"window [{offset}, {offset + length}) outside series of {n} samples"
        )
    return FrequencySeries(
        start_epoch=series.start_epoch + offset * series.dt,
        dt=series.dt,
        values=series.values[offset : offset + length],
        nominal_hz=series.nominal_hz,
        filled_samples=series.filled_samples,
    )


def series_to_csv(series: FrequencySeries) -> str:
    """Serialize a series to the two-column CSV schema, 6 decimal places."""
    t0 = series.start_epoch
    dt = series.dt
    rows = [CSV_HEADER]
    rows.extend(
        f"{t0 + k * dt:.6f},{v:.6f}" for k, v in enumerate(series.values.tolist())
    )
    rows.append("")
    return "\n".join(rows)
