"""Calibrate the two packaged simulation scenarios and write their JSON files.

The packaged pair must separate cleanly on every seed 0..9:

    low_noise_high_ramps   sigma_f high (~0.032 Hz), sigma_rocof_prime low,
                           fitted alpha_slow ~ 0 (periodic ramp blocks)
    high_noise_low_ramps   sigma_f low (~0.015 Hz), sigma_rocof_prime high,
                           fitted alpha_slow ~ ou_theta (noise reversion)

Both must stay strictly inside the +/-200 mHz band for the whole day.

Calibration knobs: the triangle-wave ramp amplitude sets sigma_f of the
first scenario through the quasi-steady droop gain; ou_sigma sets sigma_f
(high-noise) and sigma_rocof_prime (both). Values are tuned on a few seeds,
rounded, then the orderings are re-verified on the full seed sweep before
the files are written.

Usage: python3 scripts/calibrate_scenarios.py [--dry-run]
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

import freqq

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "freqq" / "scenarios"

SHARED = dict(
    inertia_2h=8.0,
    damping=1.0,
    droop_r=0.05,
    gov_t=0.5,
    ou_theta=1.0 / 300.0,
)

TRIANGLE_PERIOD_S = 2400.0
DAY_S = 86400.0

SEEDS = range(10)
BAND_MHZ = 200.0


def triangle_ramps(amplitude_pu: float, period_s: float, duration_s: float):
    """Alternating ramp blocks tracing a zero-mean triangle load wave."""
    slope = 4.0 * amplitude_pu / period_s
    quarter = period_s / 4.0
    ramps = [(0.0, quarter, slope)]
    t = quarter
    sign = -1.0
    while t < duration_s:
        end = min(t + 2.0 * quarter, duration_s)
        ramps.append((t, end, sign * slope))
        t = end
        sign = -sign
    return tuple(ramps)


def low_scenario(amplitude_pu: float, ou_sigma: float, seed: int = 0) -> freqq.SimScenario:
    return freqq.SimScenario(
        name="low_noise_high_ramps",
        ou_sigma=ou_sigma,
        ramps=triangle_ramps(amplitude_pu, TRIANGLE_PERIOD_S, DAY_S),
        seed=seed,
        **SHARED,
    )


def high_scenario(ou_sigma: float, swell_pu: float, seed: int = 0) -> freqq.SimScenario:
    # One broad daytime load swell, two orders of magnitude gentler in slope
    # than the triangle blocks of the other scenario. Its size matters for
    # the fit: the swell is a persistent (barely decaying) component of the
    # day's variance, which anchors one exponential term of the ACF model
    # near rate zero and forces the other to carry the noise reversion rate.
    # Without it the weight of one term collapses and its rate is free noise.
    slope = swell_pu / 14400.0
    ramps = ((21600.0, 36000.0, slope), (61200.0, 75600.0, -slope))
    return freqq.SimScenario(
        name="high_noise_low_ramps",
        ou_sigma=ou_sigma,
        ramps=ramps,
        seed=seed,
        **SHARED,
    )


def measure(scenario: freqq.SimScenario):
    series = freqq.simulate(scenario)
    bundle, _curve = freqq.analyze_with_curve(
        series,
        freqq.AnalysisOptions(label=scenario.name, bands_mhz=(BAND_MHZ,)),
    )
    return series, bundle


def summarize(bundle) -> str:
    m = bundle.metrics
    p = bundle.fit.params
    return (
        f"sigma_f={m.sigma_f:.4f}  sigma_rocof'={m.sigma_rocof_prime:.5f}  "
        f"min_out={m.minutes_outside:.2f}  u1={p.u1:.4f} "
        f"af={p.alpha_fast:.5f} as={p.alpha_slow:.5f} w={p.omega:.5f}"
    )


def calibrate() -> tuple[float, float, float, float]:
    # Triangle amplitude from the quasi-steady droop gain, one corrective pass.
    probe = low_scenario(amplitude_pu=0.0233, ou_sigma=0.0)
    gain_hz = probe.f0 * probe.droop_r / (1.0 + probe.droop_r * probe.damping)
    amp = 0.032 * np.sqrt(3.0) / gain_hz
    _series, bundle = measure(low_scenario(amp, 0.0))
    amp *= 0.032 / bundle.metrics.sigma_f
    print(f"triangle amplitude: {amp:.6f} pu")

    # Split the noisy scenario's 0.015 Hz between the persistent swell
    # (35% of variance) and the noise (65%). The swell's standard deviation
    # is 0.439 of its plateau height for the 4h/7h/4h shape used here.
    swell_hz = 0.015 * np.sqrt(0.35) / 0.439
    swell = swell_hz / gain_hz
    print(f"high-noise swell plateau: {swell:.6f} pu")

    # ou_sigma for the noisy scenario: its share of sigma_f scales linearly
    # in ou_sigma, so one probe run and a mean rescale over three seeds
    # suffice (variances subtract since swell and noise are independent).
    target_noise_var = 0.015**2 - (0.439 * swell_hz) ** 2
    sigma = 5.0e-4
    readings = []
    for seed in range(3):
        _s, b = measure(high_scenario(sigma, swell, seed))
        readings.append(b.metrics.sigma_f**2 - (0.439 * swell_hz) ** 2)
    sigma *= float(np.sqrt(target_noise_var / np.mean(readings)))
    print(f"high-noise ou_sigma: {sigma:.6e}")

    # Noise floor of the ramp scenario: aim sigma_rocof_prime near 0.0010,
    # again linear in ou_sigma (the ramp kinks contribute ~1e-4 in quadrature).
    floor = 1.0e-4
    readings = []
    for seed in range(3):
        _s, b = measure(low_scenario(amp, floor, seed))
        readings.append(b.metrics.sigma_rocof_prime)
    floor *= 0.0010 / float(np.mean(readings))
    print(f"low-noise ou_sigma: {floor:.6e}")
    return amp, swell, sigma, floor


def verify(amp: float, swell: float, sigma_high: float, sigma_low: float) -> bool:
    ok = True
    print(f"\n{'seed':>4}  {'scenario':<22} metrics")
    for seed in SEEDS:
        _s, low = measure(low_scenario(amp, sigma_low, seed))
        _s, high = measure(high_scenario(sigma_high, swell, seed))
        print(f"{seed:>4}  {'low_noise_high_ramps':<22} {summarize(low)}")
        print(f"{'':>4}  {'high_noise_low_ramps':<22} {summarize(high)}")
        checks = {
            "sigma_f low>high": low.metrics.sigma_f > high.metrics.sigma_f,
            "rocof' low<high": low.metrics.sigma_rocof_prime
            < high.metrics.sigma_rocof_prime,
            "alpha_slow low<high": low.fit.params.alpha_slow
            < high.fit.params.alpha_slow,
            "band low": low.metrics.minutes_outside == 0.0,
            "band high": high.metrics.minutes_outside == 0.0,
        }
        failed = [name for name, passed in checks.items() if not passed]
        if failed:
            ok = False
            print(f"{'':>4}  FAILED: {', '.join(failed)}")
    return ok


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dry-run", action="store_true",
                        help="calibrate and verify without writing files")
    args = parser.parse_args()

    amp, swell, sigma_high, sigma_low = calibrate()

    # Freeze rounded values; the sweep below is what actually gates them.
    amp = round(amp, 5)
    swell = round(swell, 5)
    sigma_high = round(sigma_high, 6)
    sigma_low = round(sigma_low, 6)
    print(f"\nfrozen: amplitude={amp} pu, swell={swell} pu, "
          f"ou_sigma high={sigma_high}, low={sigma_low}")

    if not verify(amp, swell, sigma_high, sigma_low):
        print("\nordering sweep FAILED; files not written")
        return 1

    if args.dry_run:
        print("\ndry run; files not written")
        return 0

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for scenario in (low_scenario(amp, sigma_low), high_scenario(sigma_high, swell)):
        path = OUT_DIR / f"{scenario.name}.json"
        path.write_text(freqq.scenario_to_json(scenario), encoding="utf-8")
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
