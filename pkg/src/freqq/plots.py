"""Figure rendering for analysis reports.

Renders PNG files next to the delimited output: a frequency trace with
band guides, and the measured autocorrelation with the fitted model
overlaid. Import stays local to this module so the rest of the package
works without a display stack loaded.
"""
from __future__ import annotations

import re
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .acf import AcfCurve
from .fitmodel import AcfFit, model_eval
from .ingest import FrequencySeries

DPI = 150
_TRACE_COLOR = "#1f4e8c"
_FIT_COLOR = "#c44e52"


def _slug(label: str) -> str:
    slug = re.sub(r"[^A-Za-z0-9._-]+", "_", label).strip("_")
    return slug or "series"


def plot_trace(
    series: FrequencySeries,
    path: Path,
    label: str,
    bands_mhz: tuple[float, ...] = (),
) -> None:
    """Frequency trace in Hz against hours, with band guide lines."""
    hours = np.arange(len(series)) * (series.dt / 3600.0)
    fig, ax = plt.subplots(figsize=(9, 3.2), constrained_layout=True)
    ax.plot(hours, series.values, lw=0.6, color=_TRACE_COLOR)
    ax.axhline(series.nominal_hz, lw=0.8, color="0.4")
    for band in bands_mhz:
        for sign in (1.0, -1.0):
            ax.axhline(
                series.nominal_hz + sign * band / 1000.0,
                lw=0.8,
                ls=":",
                color="0.55",
            )
    ax.set_xlabel("time / h")
    ax.set_ylabel("frequency / Hz")
    ax.set_title(label)
    ax.grid(alpha=0.3)
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_acf_fit(
    curve: AcfCurve, fit: AcfFit | None, path: Path, label: str
) -> None:
    """Measured autocorrelation with the fitted model dashed on top."""
    lags = curve.lags_s()
    fig, ax = plt.subplots(figsize=(6.4, 4.0), constrained_layout=True)
    ax.plot(lags, curve.values, lw=1.2, color=_TRACE_COLOR, label="measured")
    if fit is not None:
        p = fit.params
        ax.plot(
            lags,
            model_eval(p, lags),
            lw=1.2,
            ls="--",
            color=_FIT_COLOR,
            label=(
                f"fit: u1={p.u1:.4f}, af={p.alpha_fast:.4f}, "
                f"as={p.alpha_slow:.4f}, w={p.omega:.4f}"
            ),
        )
    ax.set_xlabel("lag / s")
    ax.set_ylabel("autocorrelation")
    ax.set_title(label)
    ax.grid(alpha=0.3)
    ax.legend(loc="upper right", fontsize=8)
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def render_analysis_figures(
    label: str,
    series: FrequencySeries,
    curve: AcfCurve | None,
    fit: AcfFit | None,
    outdir: Path,
    bands_mhz: tuple[float, ...] = (),
) -> list[Path]:
    """Write the per-series figures into outdir and return their paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    slug = _slug(label)
    written = []
    trace_path = outdir / f"{slug}_trace.png"
    plot_trace(series, trace_path, label, bands_mhz)
    written.append(trace_path)
    if curve is not None:
        acf_path = outdir / f"{slug}_acf_fit.png"
        plot_acf_fit(curve, fit, acf_path, label)
        written.append(acf_path)
    return written
