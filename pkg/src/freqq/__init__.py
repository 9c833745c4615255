"""Frequency-quality analysis toolkit.

Parses uniformly sampled grid-frequency records, computes scalar quality
metrics (spread of frequency and of its first and second discrete
derivatives, time outside tolerance bands), estimates and fits
autocorrelation curves with a two-timescale model, and simulates an
aggregated one-machine grid under stochastic load noise and deterministic
ramp schedules.
"""
from __future__ import annotations

from .acf import AcfCurve, acf_from_csv, acf_to_csv, autocorrelation
from .errors import (
    DegenerateInput,
    EmptyInput,
    FreqqError,
    InputError,
    InvalidArgument,
    LagTooLarge,
    MalformedRow,
    NonFiniteValue,
    NonUniformSampling,
    NumericalBlowup,
    NumericalError,
    OutOfRange,
    SeriesTooShort,
    UnknownScenario,
    VarianceZero,
)
from .fitmodel import (
    AcfFit,
    AcfModelParams,
    FitConfig,
    fit_acf,
    fit_from_json,
    fit_text_row,
    fit_to_json,
    model_eval,
    model_jacobian,
)
from .ingest import FrequencySeries, parse_csv, read_csv, series_to_csv, window
from .metrics import (
    BandPolicy,
    MetricsReport,
    compute_report,
    minutes_outside_band,
    rocof_prime_series,
    rocof_series,
    std_dev_frequency,
    std_dev_rocof,
    std_dev_rocof_prime,
)
from .report import (
    AnalysisBundle,
    AnalysisOptions,
    Provenance,
    analyze,
    analyze_with_curve,
    bundle_from_json,
    bundle_to_json,
    bundles_from_json,
    bundles_to_json,
    render_table,
    validate_bundle_dict,
)
from .simulator import (
    RampSegment,
    SimScenario,
    builtin_scenario,
    ou_path,
    quasi_steady_offset,
    ramp_profile,
    scenario_from_json,
    scenario_to_json,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "AcfCurve",
    "AcfFit",
    "AcfModelParams",
    "AnalysisBundle",
    "AnalysisOptions",
    "BandPolicy",
    "DegenerateInput",
    "EmptyInput",
    "FitConfig",
    "FreqqError",
    "FrequencySeries",
    "InputError",
    "InvalidArgument",
    "LagTooLarge",
    "MalformedRow",
    "MetricsReport",
    "NonFiniteValue",
    "NonUniformSampling",
    "NumericalBlowup",
    "NumericalError",
    "OutOfRange",
    "Provenance",
    "RampSegment",
    "SeriesTooShort",
    "SimScenario",
    "UnknownScenario",
    "VarianceZero",
    "acf_from_csv",
    "acf_to_csv",
    "analyze",
    "analyze_with_curve",
    "autocorrelation",
    "builtin_scenario",
    "bundle_from_json",
    "bundle_to_json",
    "bundles_from_json",
    "bundles_to_json",
    "compute_report",
    "fit_acf",
    "fit_from_json",
    "fit_text_row",
    "fit_to_json",
    "minutes_outside_band",
    "model_eval",
    "model_jacobian",
    "ou_path",
    "parse_csv",
    "quasi_steady_offset",
    "ramp_profile",
    "read_csv",
    "render_table",
    "rocof_prime_series",
    "rocof_series",
    "scenario_from_json",
    "scenario_to_json",
    "series_to_csv",
    "simulate",
    "std_dev_frequency",
    "std_dev_rocof",
    "std_dev_rocof_prime",
    "validate_bundle_dict",
    "window",
]
