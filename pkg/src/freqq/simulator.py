"""Stochastic aggregated-grid frequency simulator.

One synchronous area is reduced to a single machine with inertia, linear
load damping, and a first-order governor on a droop characteristic, driven
by a load deviation that is the sum of an Ornstein-Uhlenbeck noise state
and a deterministic piecewise-linear ramp schedule. In per-unit deviation
form, with f the frequency deviation and p the governor output:

    x'  = -ou_theta * x            + ou_sigma * dW
    f'  = (p - (x + r(t)) - damping * f) / inertia_2h
    p'  = (-p - f / droop_r) / gov_t

integrated from rest by the Euler-Maruyama scheme at step_s, then
decimated to out_dt_s. Output samples are f0 * (1 + f).

The three update equations are linear, so the integrator evaluates them as
exact linear recurrences (a first-order filter section for x, a
second-order section for the f/p pair) streamed in bounded-memory chunks.
This is the same recurrence a step loop would compute, evaluated in
compiled code; a step-loop oracle in the test suite pins the equivalence.

Randomness comes from a PCG64 generator seeded with SeedSequence(seed).
The noise stream is consumed as one standard normal per integration step
in time order (drawn in chunks, which PCG64 makes equivalent to a single
draw), and only when ou_sigma > 0.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from importlib import resources

import numpy as np
from scipy.signal import lfilter

from .errors import NumericalBlowup, UnknownScenario
from .ingest import FrequencySeries

# Hard divergence guard on the per-unit frequency deviation.
BLOWUP_LIMIT_PU = 0.1

# Integration steps per streamed chunk (rounded to the output stride).
CHUNK_STEPS_TARGET = 1 << 20

BUILTIN_SCENARIOS = ("low_noise_high_ramps", "high_noise_low_ramps")


@dataclass(frozen=True)
class RampSegment:
    """One load ramp: slope per-unit/s applied between start_s and end_s.

    The contribution persists after end_s at its final level, so a
    schedule of alternating-sign segments builds a continuous
    piecewise-linear load profile.
    """

    start_s: float
    end_s: float
    slope: float

    def __post_init__(self):
        for name in ("start_s", "end_s", "slope"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 0.0 <= self.start_s < self.end_s:
            raise ValueError(
                f"need 0 <= start_s < end_s, got [{self.start_s}, {self.end_s}]"
            )


@dataclass(frozen=True)
class SimScenario:
    """Complete, reproducible description of one simulation run.

    inertia_2h is twice the inertia constant (seconds), damping the load
    frequency sensitivity (pu/pu), droop_r the governor droop (pu), gov_t
    the governor time constant (s), ou_theta/ou_sigma the noise reversion
    rate (1/s) and intensity (pu/sqrt(s)).
    """

    name: str
    inertia_2h: float
    damping: float
    droop_r: float
    gov_t: float
    ou_theta: float
    ou_sigma: float
    ramps: tuple[RampSegment, ...] = ()
    f0: float = 50.0
    step_s: float = 0.01
    out_dt_s: float = 1.0
    duration_s: float = 86400.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "ramps", tuple(r if isinstance(r, RampSegment) else RampSegment(*r)
                                 for r in self.ramps)
        )
        for name in ("inertia_2h", "droop_r", "gov_t", "f0",
                     "step_s", "out_dt_s", "duration_s"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")
        for name in ("damping", "ou_theta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be >= 0, got {value}")
        if not (math.isfinite(self.ou_sigma) and self.ou_sigma >= 0):
            raise ValueError(f"ou_sigma must be >= 0, got {self.ou_sigma}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        if _stride(self.out_dt_s, self.step_s) is None:
            raise ValueError(
                f"out_dt_s {self.out_dt_s} must be an integer multiple of "
                f"step_s {self.step_s}"
            )
        if _stride(self.duration_s, self.out_dt_s) is None:
            raise ValueError(
                f"duration_s {self.duration_s} must be an integer multiple of "
                f"out_dt_s {self.out_dt_s}"
            )


def _stride(whole: float, part: float) -> int | None:
    ratio = whole / part
    stride = round(ratio)
    if stride < 1 or abs(ratio - stride) > 1e-9 * max(1.0, stride):
        return None
    return stride


def _ramp_knots(
    ramps: tuple[RampSegment, ...], duration_s: float
) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints of the piecewise-linear load profile over [0, duration]."""
    knot_times = {0.0, duration_s}
    for seg in ramps:
        if seg.start_s < duration_s:
            knot_times.add(seg.start_s)
            knot_times.add(min(seg.end_s, duration_s))
    times = np.array(sorted(knot_times))
    levels = np.zeros_like(times)
    for seg in ramps:
        levels += seg.slope * (np.clip(times, seg.start_s, seg.end_s) - seg.start_s)
    return times, levels


def ramp_profile(scenario: SimScenario, t: np.ndarray) -> np.ndarray:
    """Deterministic load deviation r(t) in per-unit at times t (seconds)."""
    knot_t, knot_v = _ramp_knots(scenario.ramps, scenario.duration_s)
    return np.interp(t, knot_t, knot_v)


def ou_path(
    theta: float, sigma: float, step_s: float, n_steps: int, seed: int
) -> np.ndarray:
    """Zero-start Ornstein-Uhlenbeck path on the integration grid.

    Returns x at steps 0..n_steps-1 under the same recurrence and noise
    stream the simulator uses. Stationary variance is sigma^2 / (2*theta).
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    shocks = rng.standard_normal(n_steps) * (sigma * math.sqrt(step_s))
    decay = 1.0 - theta * step_s
    driven = lfilter([1.0], [1.0, -decay], shocks)
    path = np.empty(n_steps)
    path[0] = 0.0
    path[1:] = driven[:-1]
    return path


def simulate(scenario: SimScenario) -> FrequencySeries:
    """Run a scenario and return the decimated frequency record in Hz.

    Deterministic per seed: the same scenario yields an identical array.

    Raises:
        NumericalBlowup: |frequency deviation| exceeded 0.1 pu at any
            integration step.
    """
    dt = scenario.step_s
    out_every = _stride(scenario.out_dt_s, dt)
    n_out = _stride(scenario.duration_s, scenario.out_dt_s)
    assert out_every is not None and n_out is not None
    n_steps = n_out * out_every

    decay = 1.0 - scenario.ou_theta * dt
    shock_scale = scenario.ou_sigma * math.sqrt(dt)
    a11 = 1.0 - dt * scenario.damping / scenario.inertia_2h
    a12 = dt / scenario.inertia_2h
    a21 = -dt / (scenario.gov_t * scenario.droop_r)
    a22 = 1.0 - dt / scenario.gov_t
    load_gain = -dt / scenario.inertia_2h
    num = [0.0, load_gain, -load_gain * a22]
    den = [1.0, -(a11 + a22), a11 * a22 - a12 * a21]

    knot_t, knot_v = _ramp_knots(scenario.ramps, scenario.duration_s)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(scenario.seed)))

    zi_noise = np.zeros(1)
    zi_swing = np.zeros(2)
    noise_carry = 0.0
    out = np.empty(n_out)
    chunk = out_every * max(1, CHUNK_STEPS_TARGET // out_every)
    pos = 0
    while pos < n_steps:
        count = min(chunk, n_steps - pos)
        t = np.arange(pos, pos + count) * dt
        load = np.interp(t, knot_t, knot_v)
        if scenario.ou_sigma > 0.0:
            shocks = rng.standard_normal(count)
            shocks *= shock_scale
            driven, zi_noise = lfilter([1.0], [1.0, -decay], shocks, zi=zi_noise)
            load[0] += noise_carry
            load[1:] += driven[:-1]
            noise_carry = driven[-1]
        deviation, zi_swing = lfilter(num, den, load, zi=zi_swing)
        peak = float(np.max(np.abs(deviation)))
        # A NaN peak (inf - inf inside the filter) must trip the guard too.
        if not peak <= BLOWUP_LIMIT_PU:
            raise NumericalBlowup(
                f"frequency deviation reached {peak:.3g} pu "
                f"(limit {BLOWUP_LIMIT_PU}) in scenario {scenario.name!r}"
            )
        out[pos // out_every : (pos + count) // out_every] = deviation[::out_every]
        pos += count

    return FrequencySeries(
        start_epoch=0.0,
        dt=scenario.out_dt_s,
        values=scenario.f0 * (1.0 + out),
        nominal_hz=scenario.f0,
    )


def quasi_steady_offset(scenario: SimScenario, load_pu: float) -> float:
    """Equilibrium frequency deviation (pu) for a sustained load deviation."""
    return -scenario.droop_r * load_pu / (1.0 + scenario.droop_r * scenario.damping)


def scenario_to_json(scenario: SimScenario) -> str:
    obj = asdict(scenario)
    obj["ramps"] = [[seg.start_s, seg.end_s, seg.slope] for seg in scenario.ramps]
    return json.dumps(obj, indent=2) + "\n"


def scenario_from_json(text: str) -> SimScenario:
    """Build a scenario from its JSON form; unknown keys are rejected."""
    obj = json.loads(text)
    if not isinstance(obj, dict):
        raise ValueError("scenario JSON must be an object")
    known = set(SimScenario.__dataclass_fields__)
    unknown = set(obj) - known
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    missing = {"name", "inertia_2h", "damping", "droop_r", "gov_t",
               "ou_theta", "ou_sigma"} - set(obj)
    if missing:
        raise ValueError(f"scenario JSON missing keys: {sorted(missing)}")
    if "ramps" in obj:
        obj["ramps"] = tuple(RampSegment(*seg) for seg in obj["ramps"])
    return SimScenario(**obj)


def builtin_scenario(name: str) -> SimScenario:
    """Load one of the packaged scenarios by name.

    Raises:
        UnknownScenario: Name is not a packaged scenario.
    """
    if name not in BUILTIN_SCENARIOS:
        raise UnknownScenario(
            f"unknown scenario {name!r}; built-ins: {', '.join(BUILTIN_SCENARIOS)}"
        )
    text = (
        resources.files("freqq").joinpath(f"scenarios/{name}.json").read_text("utf-8")
    )
    return scenario_from_json(text)
