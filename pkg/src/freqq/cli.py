"""Command line interface.

Subcommands: analyze, acf, fit, simulate, report. Results go to stdout or
the --output path; diagnostics go to stderr as one machine-greppable
``error_code=<code> ...`` line per problem. Exit status is 0 on success,
2 on input or argument problems, 3 on numerical failures.

The FREQQ_SEED environment variable, when set, overrides --seed.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .acf import acf_from_csv, acf_to_csv, autocorrelation
from .errors import FreqqError, InvalidArgument, exit_status_for
from .fitmodel import FitConfig, fit_acf, fit_to_json, model_eval
from .ingest import read_csv, series_to_csv, window
from .report import (
    AnalysisOptions,
    DEFAULT_MAX_LAG,
    analyze_with_curve,
    bundle_to_json,
    bundles_to_json,
    render_table,
)
from .simulator import builtin_scenario, scenario_from_json, simulate

# Default analysis window length in samples, clamped to what the series
# has; pass --window-len full for the whole record.
DEFAULT_WINDOW_LEN = 10000

DEFAULT_BANDS = "100,200"


def _version_string() -> str:
    return f"freqq {__version__} (fit-config digest {FitConfig().digest()})"


def _parse_bands(raw: str) -> tuple[float, ...]:
    try:
        bands = tuple(float(part) for part in raw.split(",") if part.strip())
    except ValueError:
        raise InvalidArgument(f"bad --bands value {raw!r}") from None
    if not bands or any(b <= 0 for b in bands):
        raise InvalidArgument(f"--bands needs positive mHz values, got {raw!r}")
    return bands


def _resolve_window_length(raw: str | None, n_samples: int, offset: int) -> int:
    available = n_samples - offset
    if raw is None:
        return min(DEFAULT_WINDOW_LEN, available)
    if raw == "full":
        return available
    try:
        return int(raw)
    except ValueError:
        raise InvalidArgument(
            f"--window-len must be an integer or 'full', got {raw!r}"
        ) from None


def _resolve_seed(flag_value: int | None) -> int | None:
    env = os.environ.get("FREQQ_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InvalidArgument(f"FREQQ_SEED must be an integer, got {env!r}") from None
    return flag_value


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _stage_exit(stages: dict[str, str]) -> int:
    status = 0
    for stage, code in stages.items():
        if code not in ("ok", "skipped"):
            print(f"error_code={code} stage {stage} failed", file=sys.stderr)
            status = max(status, exit_status_for(code))
    return status


def _analysis_options(args, series, label: str) -> AnalysisOptions:
    length = _resolve_window_length(args.window_len, len(series), args.window_offset)
    return AnalysisOptions(
        label=label,
        window_offset=args.window_offset,
        window_length=length,
        bands_mhz=_parse_bands(args.bands),
        max_lag=args.max_lag,
        unbiased=args.unbiased,
    )


def _render_figures(args, label, series, options, curve, fit) -> None:
    if not args.figures:
        return
    from . import plots

    sub = window(series, options.window_offset, options.window_length)
    paths = plots.render_analysis_figures(
        label, sub, curve, fit, Path(args.figures), options.bands_mhz
    )
    for path in paths:
        print(f"figure={path}", file=sys.stderr)


def _cmd_analyze(args) -> int:
    series = read_csv(args.csv, nominal_hz=args.nominal_hz, fill_gaps=args.fill_gaps)
    label = args.label or Path(args.csv).stem
    options = _analysis_options(args, series, label)
    bundle, curve = analyze_with_curve(series, options)
    if args.format == "json":
        _emit(bundle_to_json(bundle), args.output)
    else:
        _emit(render_table([bundle]), args.output)
    _render_figures(args, label, series, options, curve, bundle.fit)
    return _stage_exit(bundle.stages)


def _cmd_acf(args) -> int:
    series = read_csv(args.csv, nominal_hz=args.nominal_hz, fill_gaps=args.fill_gaps)
    curve = autocorrelation(series, args.max_lag, unbiased=args.unbiased)
    _emit(acf_to_csv(curve), args.output)
    return 0


def _cmd_fit(args) -> int:
    text = Path(args.acf_csv).read_text(encoding="utf-8-sig")
    curve = acf_from_csv(text)
    fit = fit_acf(curve)
    _emit(fit_to_json(fit), args.output)
    if args.emit_curve:
        lags = curve.lags_s()
        fitted = model_eval(fit.params, lags)
        rows = ["lag_s,acf,fit"]
        rows.extend(
            f"{lag:g},{measured:.6f},{model:.6f}"
            for lag, measured, model in zip(
                lags.tolist(), curve.values.tolist(), fitted.tolist()
            )
        )
        rows.append("")
        Path(args.emit_curve).write_text("\n".join(rows), encoding="utf-8")
    return 0


def _cmd_simulate(args) -> int:
    if args.scenario and args.scenario_file:
        raise InvalidArgument("pass either --scenario or --scenario-file, not both")
    if args.scenario:
        scenario = builtin_scenario(args.scenario)
    elif args.scenario_file:
        try:
            scenario = scenario_from_json(
                Path(args.scenario_file).read_text(encoding="utf-8-sig")
            )
        except ValueError as err:
            raise InvalidArgument(f"bad scenario file: {err}") from err
    else:
        raise InvalidArgument("need --scenario NAME or --scenario-file PATH")
    overrides = {}
    seed = _resolve_seed(args.seed)
    if seed is not None:
        overrides["seed"] = seed
    if args.hours is not None:
        overrides["duration_s"] = args.hours * 3600.0
    if overrides:
        try:
            scenario = replace(scenario, **overrides)
        except ValueError as err:
            raise InvalidArgument(str(err)) from err
    series = simulate(scenario)
    _emit(series_to_csv(series), args.output)
    return 0


def _cmd_report(args) -> int:
    if args.labels:
        labels = [part.strip() for part in args.labels.split(",")]
        if len(labels) != len(args.csvs):
            raise InvalidArgument(
                f"--labels lists {len(labels)} names for {len(args.csvs)} files"
            )
    else:
        labels = [Path(path).stem for path in args.csvs]
    bundles = []
    figure_jobs = []
    for path, label in zip(args.csvs, labels):
        series = read_csv(path, nominal_hz=args.nominal_hz, fill_gaps=args.fill_gaps)
        options = _analysis_options(args, series, label)
        bundle, curve = analyze_with_curve(series, options)
        bundles.append(bundle)
        figure_jobs.append((label, series, options, curve, bundle.fit))
    if args.format == "json":
        _emit(bundles_to_json(bundles), args.output)
    else:
        _emit(render_table(bundles), args.output)
    for job in figure_jobs:
        _render_figures(args, *job)
    status = 0
    for bundle in bundles:
        status = max(status, _stage_exit(bundle.stages))
    return status


def _add_ingest_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--nominal-hz", type=float, default=50.0,
        help="nominal system frequency recorded on the series (default 50)",
    )
    parser.add_argument(
        "--fill-gaps", choices=["hold"], default=None,
        help="repair integer-multiple sampling gaps by repeating the previous sample",
    )


def _add_window_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--window-offset", type=int, default=0,
        help="first sample of the analysis window (default 0)",
    )
    parser.add_argument(
        "--window-len", default=None, metavar="N|full",
        help=f"window length in samples (default {DEFAULT_WINDOW_LEN}, "
        "clamped to the series; 'full' analyzes the whole record)",
    )


def _add_analysis_flags(parser: argparse.ArgumentParser) -> None:
    _add_window_flags(parser)
    parser.add_argument(
        "--bands", default=DEFAULT_BANDS,
        help=f"comma-separated band half-widths in mHz (default {DEFAULT_BANDS})",
    )
    parser.add_argument(
        "--max-lag", type=int, default=DEFAULT_MAX_LAG,
        help=f"highest autocorrelation lag in samples (default {DEFAULT_MAX_LAG})",
    )
    parser.add_argument(
        "--unbiased", action="store_true",
        help="divide lag k by N-k instead of N in the autocorrelation",
    )
    parser.add_argument(
        "--format", choices=["table", "json"], default="table",
        help="output format (default table)",
    )
    parser.add_argument(
        "--figures", metavar="DIR", default=None,
        help="also render trace and autocorrelation figures into DIR",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freqq",
        description="Frequency-quality metrics, autocorrelation fitting, "
        "and an aggregated-grid simulator",
    )
    parser.add_argument("--version", action="version", version=_version_string())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="metrics, autocorrelation, and fit of one series")
    p.add_argument("csv", help="frequency CSV (time_s,frequency_hz)")
    p.add_argument("--label", default=None, help="row label (default: file stem)")
    _add_ingest_flags(p)
    _add_analysis_flags(p)
    p.add_argument("-o", "--output", default=None, help="write result to this path")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("acf", help="autocorrelation curve of one series")
    p.add_argument("csv", help="frequency CSV (time_s,frequency_hz)")
    _add_ingest_flags(p)
    p.add_argument(
        "--max-lag", type=int, default=DEFAULT_MAX_LAG,
        help=f"highest lag in samples (default {DEFAULT_MAX_LAG})",
    )
    p.add_argument("--unbiased", action="store_true",
                   help="divide lag k by N-k instead of N")
    p.add_argument("-o", "--output", default=None, help="write CSV to this path")
    p.set_defaults(func=_cmd_acf)

    p = sub.add_parser("fit", help="fit the two-timescale model to an ACF CSV")
    p.add_argument("acf_csv", help="autocorrelation CSV (lag_s,acf)")
    p.add_argument(
        "--emit-curve", metavar="PATH", default=None,
        help="also write a lag_s,acf,fit CSV of the fitted curve",
    )
    p.add_argument("-o", "--output", default=None, help="write fit JSON to this path")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("simulate", help="run a scenario and emit its frequency CSV")
    p.add_argument("--scenario", default=None, help="built-in scenario name")
    p.add_argument("--scenario-file", default=None, help="scenario JSON path")
    p.add_argument("--seed", type=int, default=None,
                   help="override the scenario seed (FREQQ_SEED wins over this)")
    p.add_argument("--hours", type=float, default=None,
                   help="override the scenario duration, in hours")
    p.add_argument("-o", "--output", default=None, help="write CSV to this path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("report", help="side-by-side analysis of several series")
    p.add_argument("csvs", nargs="+", metavar="csv", help="frequency CSVs")
    p.add_argument("--labels", default=None,
                   help="comma-separated row labels (default: file stems)")
    _add_ingest_flags(p)
    _add_analysis_flags(p)
    p.add_argument("-o", "--output", default=None, help="write result to this path")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FreqqError as err:
        print(f"error_code={err.code} {err}", file=sys.stderr)
        return err.exit_status
    except OSError as err:
        print(f"error_code=io_error {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
