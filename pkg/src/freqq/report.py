"""Whole-series analysis: metrics, correlation fit, and serialization.

analyze() runs the full pipeline on one series (scalar metrics, band
accounting, autocorrelation, model fit) and returns a bundle whose
provenance pins every knob that shaped it. Stages degrade independently:
a series whose variance is zero still gets its scalar metrics; only the
correlation stages are marked failed.

Bundles serialize to a versioned JSON document (schema_version 1) that
round-trips exactly, and to an aligned text table with one row per series.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .acf import AcfCurve, autocorrelation
from .errors import LagTooLarge, SeriesTooShort, VarianceZero
from .fitmodel import AcfFit, FitConfig, fit_acf
from .ingest import FrequencySeries, window
from .metrics import BandPolicy, MetricsReport, compute_report, minutes_outside_band

SCHEMA_VERSION = 1

DEFAULT_BANDS_MHZ = (100.0, 200.0)
DEFAULT_MAX_LAG = 3600

# Minimum samples analyze() accepts; below this neither the second
# derivative nor a fittable curve exists.
MIN_SAMPLES = 8

_TABLE_COLUMNS = (
    ("sigma_f", "{:.3f}"),
    ("sigma_rocof", "{:.4f}"),
    ("sigma_rocof_prime", "{:.4f}"),
    ("u1", "{:.4f}"),
    ("alpha_fast", "{:.4f}"),
    ("alpha_slow", "{:.4f}"),
    ("omega", "{:.4f}"),
)


@dataclass(frozen=True)
class AnalysisOptions:
    """Knobs for analyze(); window_length None means to the end."""

    label: str = ""
    window_offset: int = 0
    window_length: int | None = None
    bands_mhz: tuple[float, ...] = DEFAULT_BANDS_MHZ
    max_lag: int = DEFAULT_MAX_LAG
    unbiased: bool = False
    fit_config: FitConfig | None = None

    def __post_init__(self):
        if not self.bands_mhz:
            raise ValueError("need at least one band")
        if self.max_lag < 1:
            raise ValueError(f"max_lag must be >= 1, got {self.max_lag}")


@dataclass(frozen=True)
class Provenance:
    """Everything needed to reproduce a bundle from its input file."""

    window_offset: int
    window_length: int
    max_lag: int
    estimator: str
    nominal_hz: float
    dt_s: float
    filled_samples: int
    fit_config_digest: str

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "Provenance":
        return cls(**obj)


@dataclass(frozen=True)
class AnalysisBundle:
    """One series' full analysis.

    stages maps stage name ("metrics", "acf", "fit") to "ok", "skipped",
    or the error code that stopped it. band_minutes holds minutes outside
    each configured band; fit is None when the correlation stages failed.
    """

    label: str
    metrics: MetricsReport
    fit: AcfFit | None
    band_minutes: dict[float, float]
    stages: dict[str, str]
    provenance: Provenance


def analyze_with_curve(
    series: FrequencySeries, options: AnalysisOptions | None = None
) -> tuple[AnalysisBundle, AcfCurve | None]:
    """analyze(), additionally returning the estimated curve (for plots).

    Raises:
        OutOfRange: Requested window does not fit the series.
        SeriesTooShort: Windowed series has fewer than 8 samples.
    """
    opt = options if options is not None else AnalysisOptions()
    cfg = opt.fit_config if opt.fit_config is not None else FitConfig()
    length = (
        opt.window_length
        if opt.window_length is not None
        else len(series) - opt.window_offset
    )
    sub = window(series, opt.window_offset, length)
    if len(sub) < MIN_SAMPLES:
        raise SeriesTooShort(
            f"analysis needs at least {MIN_SAMPLES} samples, got {len(sub)}"
        )

    metrics = compute_report(sub, BandPolicy(opt.bands_mhz[0], sub.nominal_hz))
    band_minutes = {
        float(band): minutes_outside_band(sub, BandPolicy(band, sub.nominal_hz))
        for band in opt.bands_mhz
    }
    stages = {"metrics": "ok"}
    effective_max_lag = min(opt.max_lag, len(sub) - 1)

    curve = None
    fit = None
    try:
        curve = autocorrelation(sub, effective_max_lag, unbiased=opt.unbiased)
        stages["acf"] = "ok"
        fit = fit_acf(curve, cfg)
        stages["fit"] = "ok"
    except (LagTooLarge, VarianceZero) as err:
        stages["acf"] = err.code
        stages["fit"] = "skipped"

    bundle = AnalysisBundle(
        label=opt.label,
        metrics=metrics,
        fit=fit,
        band_minutes=band_minutes,
        stages=stages,
        provenance=Provenance(
            window_offset=opt.window_offset,
            window_length=len(sub),
            max_lag=effective_max_lag,
            estimator="unbiased" if opt.unbiased else "biased",
            nominal_hz=sub.nominal_hz,
            dt_s=sub.dt,
            filled_samples=sub.filled_samples,
            fit_config_digest=cfg.digest(),
        ),
    )
    return bundle, curve


def analyze(
    series: FrequencySeries, options: AnalysisOptions | None = None
) -> AnalysisBundle:
    """Run metrics, band accounting, autocorrelation, and fit on a series."""
    bundle, _ = analyze_with_curve(series, options)
    return bundle


def bundle_to_dict(bundle: AnalysisBundle) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "label": bundle.label,
        "metrics": bundle.metrics.to_dict(),
        "fit": bundle.fit.to_dict() if bundle.fit is not None else None,
        "band_minutes": {f"{band:g}": m for band, m in bundle.band_minutes.items()},
        "stages": dict(bundle.stages),
        "provenance": bundle.provenance.to_dict(),
    }


def bundle_from_dict(obj: dict) -> AnalysisBundle:
    validate_bundle_dict(obj)
    return AnalysisBundle(
        label=obj["label"],
        metrics=MetricsReport.from_dict(obj["metrics"]),
        fit=AcfFit.from_dict(obj["fit"]) if obj["fit"] is not None else None,
        band_minutes={float(k): v for k, v in obj["band_minutes"].items()},
        stages=dict(obj["stages"]),
        provenance=Provenance.from_dict(obj["provenance"]),
    )


def bundle_to_json(bundle: AnalysisBundle) -> str:
    return json.dumps(bundle_to_dict(bundle), indent=2) + "\n"


def bundle_from_json(text: str) -> AnalysisBundle:
    return bundle_from_dict(json.loads(text))


def bundles_to_json(bundles: list[AnalysisBundle]) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "bundles": [
            {k: v for k, v in bundle_to_dict(b).items() if k != "schema_version"}
            for b in bundles
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def bundles_from_json(text: str) -> list[AnalysisBundle]:
    doc = json.loads(text)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {doc.get('schema_version')!r}")
    out = []
    for obj in doc["bundles"]:
        obj = dict(obj)
        obj["schema_version"] = SCHEMA_VERSION
        out.append(bundle_from_dict(obj))
    return out


def validate_bundle_dict(obj: dict) -> None:
    """Check a parsed bundle document against the v1 schema.

    Raises ValueError naming the first offending key.
    """
    if not isinstance(obj, dict):
        raise ValueError("bundle must be an object")
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {obj.get('schema_version')!r}")
    for key in ("label", "metrics", "fit", "band_minutes", "stages", "provenance"):
        if key not in obj:
            raise ValueError(f"bundle missing key {key!r}")
    if not isinstance(obj["label"], str):
        raise ValueError("label must be a string")
    metric_keys = {
        "sigma_f", "sigma_rocof", "sigma_rocof_prime", "minutes_outside",
        "mean_f", "n_samples", "tau_s", "dtau_s",
    }
    if set(obj["metrics"]) != metric_keys:
        raise ValueError("metrics keys do not match the schema")
    if obj["fit"] is not None:
        fit_keys = {
            "params", "sse", "rmse", "n_lags", "n_starts", "converged",
            "iterations",
        }
        if set(obj["fit"]) != fit_keys:
            raise ValueError("fit keys do not match the schema")
        if set(obj["fit"]["params"]) != {"u1", "alpha_fast", "alpha_slow", "omega"}:
            raise ValueError("fit params keys do not match the schema")
    for key, minutes in obj["band_minutes"].items():
        if not isinstance(key, str) or not isinstance(minutes, (int, float)):
            raise ValueError("band_minutes must map band strings to minutes")
        try:
            numeric = float(key)
        except ValueError:
            raise ValueError(f"band key {key!r} is not a number") from None
        if not math.isfinite(numeric):
            raise ValueError(f"band key {key!r} is not a number")
    if not isinstance(obj["stages"], dict):
        raise ValueError("stages must be an object")
    prov_keys = {
        "window_offset", "window_length", "max_lag", "estimator",
        "nominal_hz", "dt_s", "filled_samples", "fit_config_digest",
    }
    if set(obj["provenance"]) != prov_keys:
        raise ValueError("provenance keys do not match the schema")


def _bundle_cells(bundle: AnalysisBundle) -> dict[str, str]:
    cells = {
        "sigma_f": f"{bundle.metrics.sigma_f:.3f}",
        "sigma_rocof": f"{bundle.metrics.sigma_rocof:.4f}",
        "sigma_rocof_prime": f"{bundle.metrics.sigma_rocof_prime:.4f}",
    }
    if bundle.fit is not None:
        p = bundle.fit.params
        cells.update(
            u1=f"{p.u1:.4f}",
            alpha_fast=f"{p.alpha_fast:.4f}",
            alpha_slow=f"{p.alpha_slow:.4f}",
            omega=f"{p.omega:.4f}",
        )
    else:
        cells.update(u1="--", alpha_fast="--", alpha_slow="--", omega="--")
    return cells


def render_table(bundles: list[AnalysisBundle]) -> str:
    """Aligned text table, one row per bundle; deterministic bytes."""
    rows = [_bundle_cells(b) for b in bundles]
    label_width = max([len("label")] + [len(b.label) for b in bundles])
    widths = {
        name: max([len(name)] + [len(r[name]) for r in rows])
        for name, _ in _TABLE_COLUMNS
    }
    header = "  ".join(
        ["label".ljust(label_width)]
        + [name.rjust(widths[name]) for name, _ in _TABLE_COLUMNS]
    )
    lines = [header]
    for bundle, cells in zip(bundles, rows):
        lines.append(
            "  ".join(
                [bundle.label.ljust(label_width)]
                + [cells[name].rjust(widths[name]) for name, _ in _TABLE_COLUMNS]
            )
        )
    lines.append("")
    return "\n".join(lines)
