"""Scalar frequency-quality metrics.

Four quantities summarize a frequency record: the population standard
deviation of the samples, the standard deviations of the first and second
discrete time derivatives (rate of change of frequency, and its rate of
change), and the time spent outside a tolerance band around nominal.

All standard deviations use the population divisor over however many
derived samples exist: N for the raw series, N - tau for the first
derivative, N - tau - dtau for the second (N - 2 with the default
single-sample strides). Accumulation is two-pass throughout.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import SeriesTooShort
from .ingest import FrequencySeries

DEFAULT_TAU_SAMPLES = 1
DEFAULT_DTAU_SAMPLES = 1


@dataclass(frozen=True)
class BandPolicy:
    """A symmetric tolerance band around a center frequency.

    A sample at exactly center +/- band counts as inside; only strict
    exceedance is flagged.
    """

    band_mhz: float
    center_hz: float = 50.0

    def __post_init__(self):
        if not (math.isfinite(self.band_mhz) and self.band_mhz > 0):
            raise ValueError(f"band_mhz must be positive, got {self.band_mhz}")
        if not (math.isfinite(self.center_hz) and self.center_hz > 0):
            raise ValueError(f"center_hz must be positive, got {self.center_hz}")


@dataclass(frozen=True)
class MetricsReport:
    """Scalar metrics of one series under one band policy.

    sigma_rocof_prime is populated whenever the series is long enough for
    at least one second-difference sample (N >= tau + dtau + 1).
    """

    sigma_f: float
    sigma_rocof: float
    sigma_rocof_prime: float
    minutes_outside: float
    mean_f: float
    n_samples: int
    tau_s: float
    dtau_s: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "MetricsReport":
        return cls(**obj)


def _population_std(x: np.ndarray) -> float:
    m = x.mean()
    return float(np.sqrt(np.mean((x - m) ** 2)))


def std_dev_frequency(series: FrequencySeries) -> float:
    """Population standard deviation of the frequency samples, Hz."""
    return _population_std(series.values)


def rocof_series(
    series: FrequencySeries, tau_samples: int = DEFAULT_TAU_SAMPLES
) -> np.ndarray:
    """First discrete derivative over a stride of tau_samples, Hz/s.

    Element t is (f[t + tau] - f[t]) / (tau_samples * dt); the result has
    N - tau_samples entries.

    Raises:
        SeriesTooShort: Fewer than tau_samples + 1 samples.
    """
    if tau_samples < 1:
        raise ValueError(f"tau_samples must be >= 1, got {tau_samples}")
    v = series.values
    if len(v) <= tau_samples:
        raise SeriesTooShort(
            f"need more than {tau_samples} samples for a stride-{tau_samples} "
            f"derivative, got {len(v)}"
        )
    return (v[tau_samples:] - v[:-tau_samples]) / (tau_samples * series.dt)


def rocof_prime_series(
    series: FrequencySeries,
    tau_samples: int = DEFAULT_TAU_SAMPLES,
    dtau_samples: int = DEFAULT_DTAU_SAMPLES,
) -> np.ndarray:
    """Second discrete derivative: stride-dtau difference of the first, Hz/s^2.

    Raises:
        SeriesTooShort: Fewer than tau_samples + dtau_samples + 1 samples.
    """
    if dtau_samples < 1:
        raise ValueError(f"dtau_samples must be >= 1, got {dtau_samples}")
    r = rocof_series(series, tau_samples)
    if len(r) <= dtau_samples:
        raise SeriesTooShort(
            f"need more than {tau_samples + dtau_samples} samples for the "
            f"second derivative, got {len(series)}"
        )
    return (r[dtau_samples:] - r[:-dtau_samples]) / (dtau_samples * series.dt)


def std_dev_rocof(
    series: FrequencySeries, tau_samples: int = DEFAULT_TAU_SAMPLES
) -> float:
    """Population standard deviation of the first derivative, Hz/s."""
    return _population_std(rocof_series(series, tau_samples))


def std_dev_rocof_prime(
    series: FrequencySeries,
    tau_samples: int = DEFAULT_TAU_SAMPLES,
    dtau_samples: int = DEFAULT_DTAU_SAMPLES,
) -> float:
    """Standard deviation of the second derivative, Hz/s^2.

    The divisor is the count of second-difference samples
    (N - tau - dtau; N - 2 with default strides).
    """
    return _population_std(rocof_prime_series(series, tau_samples, dtau_samples))


def minutes_outside_band(series: FrequencySeries, policy: BandPolicy) -> float:
    """Minutes spent strictly outside the band; boundary samples are inside."""
    threshold = policy.band_mhz / 1000.0
    outside = np.count_nonzero(np.abs(series.values - policy.center_hz) > threshold)
    return float(outside * series.dt / 60.0)


def compute_report(
    series: FrequencySeries,
    policy: BandPolicy,
    tau_samples: int = DEFAULT_TAU_SAMPLES,
    dtau_samples: int = DEFAULT_DTAU_SAMPLES,
) -> MetricsReport:
    """All scalar metrics of one series under one band policy.

    Raises:
        SeriesTooShort: Fewer than tau_samples + dtau_samples + 1 samples.
    """
    sigma_rp = std_dev_rocof_prime(series, tau_samples, dtau_samples)
    return MetricsReport(
        sigma_f=std_dev_frequency(series),
        sigma_rocof=std_dev_rocof(series, tau_samples),
        sigma_rocof_prime=sigma_rp,
        minutes_outside=minutes_outside_band(series, policy),
        mean_f=float(series.values.mean()),
        n_samples=len(series),
        tau_s=tau_samples * series.dt,
        dtau_s=dtau_samples * series.dt,
    )
