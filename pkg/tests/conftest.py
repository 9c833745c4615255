"""Shared fixtures and small builders used across the test suite."""
from __future__ import annotations

import numpy as np
import pytest

from freqq.ingest import FrequencySeries


def make_series(values, dt=1.0, start_epoch=0.0, nominal_hz=50.0) -> FrequencySeries:
    return FrequencySeries(
        start_epoch=float(start_epoch),
        dt=float(dt),
        values=np.asarray(values, dtype=float),
        nominal_hz=float(nominal_hz),
    )


def random_series(rng: np.random.Generator, n: int, dt=1.0) -> FrequencySeries:
    values = 50.0 + 0.05 * rng.standard_normal(n)
    return make_series(values, dt=dt)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260821)
