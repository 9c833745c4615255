"""Autocorrelation estimation for frequency series.

The default estimator divides the lagged co-moment sum by N at every lag
(the positive-semidefinite convention) and normalizes by the lag-0 value,
so the curve starts at exactly 1 and stays within [-1, 1]. An optional
divisor of N - k per lag is available for sensitivity checks; it loses the
boundedness guarantee as k approaches N, and a request deep enough for a
rescaled value to leave [-1, 1] fails rather than returning a
non-correlation.

Small lag counts are summed directly; larger ones go through an FFT of the
zero-padded series (circular correlation on >= 2N points is linear
correlation). Both paths compute the same estimator and agree to well
below 1e-9.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from .errors import LagTooLarge, MalformedRow, NonUniformSampling, VarianceZero
from .ingest import FrequencySeries

ACF_CSV_HEADER = "lag_s,acf"

# Largest max_lag the direct per-lag summation handles before the FFT path
# takes over; crossover is runtime-neutral well below this.
DIRECT_MAX_LAG = 1024

# Validation slack on the [-1, 1] bound, absorbing float rounding.
BOUND_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class AcfCurve:
    """A normalized autocorrelation curve at lags 0, dt, ..., L*dt.

    Attributes:
        dt: Lag step in seconds (the source sample period).
        values: Correlation at each lag; values[0] is exactly 1.
        n_source: Number of source samples the curve was estimated from.
    """

    dt: float
    values: np.ndarray
    n_source: int

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("curve needs at least one lag")
        if not np.all(np.isfinite(vals)):
            raise ValueError("curve contains a non-finite value")
        if vals[0] != 1.0:
            raise ValueError(f"lag-0 value must be exactly 1, got {vals[0]!r}")
        peak = float(np.max(np.abs(vals)))
        if peak > 1.0 + BOUND_SLACK:
            raise ValueError(f"curve magnitude {peak} exceeds 1 beyond slack")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        if vals.size - 1 >= self.n_source:
            raise ValueError(
                f"{vals.size - 1} lags cannot come from {self.n_source} samples"
            )
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AcfCurve):
            return NotImplemented
        return (
            self.dt == other.dt
            and self.n_source == other.n_source
            and np.array_equal(self.values, other.values)
        )

    def lags_s(self) -> np.ndarray:
        """Lag axis in seconds."""
        return np.arange(len(self)) * self.dt


def autocorrelation(
    series: FrequencySeries,
    max_lag: int,
    *,
    unbiased: bool = False,
    method: str = "auto",
) -> AcfCurve:
    """Estimate the autocorrelation of a series up to max_lag samples.

    Args:
        series: Input record, variance must be nonzero.
        max_lag: Largest lag in samples, 1 <= max_lag < len(series).
        unbiased: Divide lag k by N - k instead of N before normalizing.
        method: "auto" picks the summation path by max_lag; "direct" and
            "fft" force one (they agree to float accuracy).

    Raises:
        LagTooLarge: max_lag >= len(series), or the unbiased rescale pushed
            a deep-lag value outside [-1, 1] (data dependent; the estimate
            stops being a correlation there).
        VarianceZero: Constant series.
    """
    if max_lag < 1:
        raise ValueError(f"max_lag must be >= 1, got {max_lag}")
    v = series.values
    n = v.size
    if max_lag >= n:
        raise LagTooLarge(f"max_lag {max_lag} needs more than {n} samples")
    if method not in ("auto", "direct", "fft"):
        raise ValueError(f"unknown method {method!r}")
    if v[0] == v[-1] and np.all(v == v[0]):
        raise VarianceZero("series is constant")

    c = v - v.mean()
    denom = float(c @ c)
    if denom == 0.0:
        raise VarianceZero("series variance underflows to zero")

    if method == "auto":
        method = "direct" if max_lag <= DIRECT_MAX_LAG else "fft"
    if method == "direct":
        r = np.empty(max_lag + 1)
        r[0] = 1.0
        for k in range(1, max_lag + 1):
            r[k] = (c[:-k] @ c[k:]) / denom
    else:
        m = _fft.next_fast_len(2 * n)
        spectrum = _fft.rfft(c, m)
        acov = _fft.irfft(spectrum.real**2 + spectrum.imag**2, m)[: max_lag + 1]
        r = acov / acov[0]
        r[0] = 1.0

    if unbiased:
        k = np.arange(max_lag + 1, dtype=np.float64)
        r *= n / (n - k)
        r[0] = 1.0
        peak = float(np.max(np.abs(r)))
        if peak > 1.0 + BOUND_SLACK:
            raise LagTooLarge(
                f"unbiased rescale reaches {peak:.3g}, outside [-1, 1]; "
                f"max_lag {max_lag} is too deep for {n} samples with this "
                "estimator"
            )

    return AcfCurve(dt=series.dt, values=r, n_source=n)


def acf_to_csv(curve: AcfCurve) -> str:
    """Serialize a curve as ``lag_s,acf`` rows, correlations at 6 decimals."""
    dt = curve.dt
    rows = [ACF_CSV_HEADER]
    rows.extend(f"{k * dt:g},{val:.6f}" for k, val in enumerate(curve.values.tolist()))
    rows.append("")
    return "\n".join(rows)


def acf_from_csv(stream: str | "object") -> AcfCurve:
    """Parse an ``lag_s,acf`` CSV back into a curve.

    The CSV does not record the source sample count; the loaded curve sets
    n_source to the smallest value consistent with its lag count.

    Raises:
        MalformedRow: Bad header, field count, or non-numeric field.
        NonUniformSampling: Lag axis is not uniformly spaced from zero.
        ValueError: Parsed values violate curve invariants.
    """
    lines = stream.splitlines() if isinstance(stream, str) else list(stream)
    if not lines:
        raise MalformedRow("input has no header line", row=0)
    if lines[0].lstrip("﻿").strip() != ACF_CSV_HEADER:
        raise MalformedRow(f"expected header {ACF_CSV_HEADER!r}", row=0)
    lags = []
    vals = []
    row = 0
    for line in lines[1:]:
        line = line.strip()
        if not line:
            continue
        row += 1
        parts = line.split(",")
        if len(parts) != 2:
            raise MalformedRow(f"expected 2 fields, got {len(parts)}", row=row)
        try:
            lags.append(float(parts[0]))
            vals.append(float(parts[1]))
        except ValueError:
            raise MalformedRow(f"non-numeric field in {line!r}", row=row) from None
    if len(vals) < 2:
        raise MalformedRow("need at least lags 0 and 1", row=row)
    lag_arr = np.asarray(lags)
    if lag_arr[0] != 0.0:
        raise NonUniformSampling("lag axis must start at 0", row=1)
    dt = float(lag_arr[1] - lag_arr[0])
    if dt <= 0:
        raise NonUniformSampling("lag axis must increase", row=2)
    gaps = np.diff(lag_arr)
    bad = np.abs(gaps - dt) > 1e-6 * dt
    if bad.any():
        i = int(np.argmax(bad))
        raise NonUniformSampling(
            f"lag gap {gaps[i]:.9g} s where the step is {dt:.9g} s", row=i + 2
        )
    return AcfCurve(dt=dt, values=np.asarray(vals), n_source=len(vals))
