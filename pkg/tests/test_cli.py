"""Command-line behaviour driven through main() in process.

Every invocation here calls main(argv) directly so argument parsing,
error-to-exit-status mapping, and stream routing stay visible to the
debugger. Subprocess-level determinism and capacity runs live in the
acceptance suite instead.
"""
from __future__ import annotations

import json

import pytest

import freqq
from freqq.acf import acf_from_csv
from freqq.cli import main
from freqq.fitmodel import FitConfig
from freqq.ingest import series_to_csv
from freqq.report import validate_bundle_dict

from conftest import make_series

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@pytest.fixture(autouse=True)
def _no_ambient_seed(monkeypatch):
    # A FREQQ_SEED inherited from the shell would silently change every
    # simulate invocation below.
    monkeypatch.delenv("FREQQ_SEED", raising=False)


@pytest.fixture(scope="module")
def sim_csv(tmp_path_factory):
    """180-sample simulated frequency trace written through the CLI."""
    path = tmp_path_factory.mktemp("cli_a") / "grid.csv"
    with pytest.MonkeyPatch.context() as mp:
        mp.delenv("FREQQ_SEED", raising=False)
        status = main([
            "simulate", "--scenario", "high_noise_low_ramps",
            "--seed", "3", "--hours", "0.05", "-o", str(path),
        ])
    assert status == 0
    return path


@pytest.fixture(scope="module")
def sim_csv_b(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli_b") / "coastal.csv"
    with pytest.MonkeyPatch.context() as mp:
        mp.delenv("FREQQ_SEED", raising=False)
        status = main([
            "simulate", "--scenario", "low_noise_high_ramps",
            "--seed", "4", "--hours", "0.05", "-o", str(path),
        ])
    assert status == 0
    return path


def run_cli(capsys, argv):
    status = main(argv)
    captured = capsys.readouterr()
    return status, captured.out, captured.err


def write_constant_csv(tmp_path, n=20):
    rows = "\n".join(f"{k}.000000,50.000000" for k in range(n))
    path = tmp_path / "flat.csv"
    path.write_text(f"time_s,frequency_hz\n{rows}\n", encoding="utf-8")
    return path


class TestTopLevel:
    def test_version_reports_fit_config_digest(self, capsys):
        status, out, _ = run_cli(capsys, ["--version"])
        assert status == 0
        expected = f"freqq {freqq.__version__} (fit-config digest {FitConfig().digest()})"
        assert out.strip() == expected

    def test_no_arguments_is_usage_error(self, capsys):
        status, _, err = run_cli(capsys, [])
        assert status == 2
        assert "usage" in err.lower()

    def test_unknown_subcommand_is_usage_error(self, capsys):
        status, _, err = run_cli(capsys, ["frobnicate"])
        assert status == 2


class TestSimulate:
    def test_builtin_scenario_writes_csv(self, sim_csv):
        lines = sim_csv.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "time_s,frequency_hz"
        # 0.05 h at 1 s output spacing is exactly 180 samples.
        assert len(lines) == 181
        assert lines[1] == "0.000000,50.000000"

    def test_stdout_when_no_output_path(self, capsys):
        status, out, _ = run_cli(capsys, [
            "simulate", "--scenario", "high_noise_low_ramps",
            "--seed", "1", "--hours", "0.01",
        ])
        assert status == 0
        lines = out.splitlines()
        assert lines[0] == "time_s,frequency_hz"
        assert len(lines) == 37

    def test_repeat_run_is_byte_identical(self, tmp_path, capsys):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            status, _, _ = run_cli(capsys, [
                "simulate", "--scenario", "high_noise_low_ramps",
                "--seed", "42", "--hours", "0.02", "-o", str(path),
            ])
            assert status == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_seed_changes_output(self, tmp_path, capsys):
        texts = []
        for seed in ("3", "4"):
            path = tmp_path / f"s{seed}.csv"
            run_cli(capsys, [
                "simulate", "--scenario", "high_noise_low_ramps",
                "--seed", seed, "--hours", "0.02", "-o", str(path),
            ])
            texts.append(path.read_text(encoding="utf-8"))
        assert texts[0] != texts[1]

    def test_env_seed_overrides_flag(self, tmp_path, capsys, monkeypatch):
        argv_tail = ["--hours", "0.02", "-o"]
        env_path = tmp_path / "env.csv"
        monkeypatch.setenv("FREQQ_SEED", "7")
        run_cli(capsys, ["simulate", "--scenario", "high_noise_low_ramps",
                         "--seed", "3", *argv_tail, str(env_path)])
        monkeypatch.delenv("FREQQ_SEED")
        flag_path = tmp_path / "flag.csv"
        run_cli(capsys, ["simulate", "--scenario", "high_noise_low_ramps",
                         "--seed", "7", *argv_tail, str(flag_path)])
        assert env_path.read_bytes() == flag_path.read_bytes()

    def test_env_seed_must_be_integer(self, capsys, monkeypatch):
        monkeypatch.setenv("FREQQ_SEED", "many")
        status, _, err = run_cli(capsys, [
            "simulate", "--scenario", "high_noise_low_ramps", "--hours", "0.01",
        ])
        assert status == 2
        assert "error_code=invalid_argument" in err

    def test_requires_exactly_one_scenario_source(self, tmp_path, capsys):
        status, _, err = run_cli(capsys, ["simulate", "--hours", "0.01"])
        assert status == 2
        assert "error_code=invalid_argument" in err

        both = tmp_path / "s.json"
        both.write_text("{}", encoding="utf-8")
        status, _, err = run_cli(capsys, [
            "simulate", "--scenario", "high_noise_low_ramps",
            "--scenario-file", str(both), "--hours", "0.01",
        ])
        assert status == 2
        assert "error_code=invalid_argument" in err

    def test_unknown_builtin_name(self, capsys):
        status, _, err = run_cli(capsys, [
            "simulate", "--scenario", "windless_doldrums", "--hours", "0.01",
        ])
        assert status == 2
        assert "error_code=unknown_scenario" in err

    def test_scenario_file(self, tmp_path, capsys):
        spec = {
            "name": "custom", "inertia_2h": 8.0, "damping": 1.0,
            "droop_r": 0.05, "gov_t": 0.5, "ou_theta": 1.0 / 300.0,
            "ou_sigma": 0.0004,
        }
        path = tmp_path / "custom.json"
        path.write_text(json.dumps(spec), encoding="utf-8")
        status, out, _ = run_cli(capsys, [
            "simulate", "--scenario-file", str(path),
            "--seed", "5", "--hours", "0.01",
        ])
        assert status == 0
        assert len(out.splitlines()) == 37

    def test_scenario_file_bad_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        status, _, err = run_cli(capsys, [
            "simulate", "--scenario-file", str(path), "--hours", "0.01",
        ])
        assert status == 2
        assert "error_code=invalid_argument" in err
        assert "bad scenario file" in err

    def test_scenario_file_bad_values(self, tmp_path, capsys):
        spec = {
            "name": "custom", "inertia_2h": -8.0, "damping": 1.0,
            "droop_r": 0.05, "gov_t": 0.5, "ou_theta": 0.0, "ou_sigma": 0.0,
        }
        path = tmp_path / "neg.json"
        path.write_text(json.dumps(spec), encoding="utf-8")
        status, _, err = run_cli(capsys, [
            "simulate", "--scenario-file", str(path), "--hours", "0.01",
        ])
        assert status == 2
        assert "error_code=invalid_argument" in err

    def test_negative_hours_rejected(self, capsys):
        status, _, err = run_cli(capsys, [
            "simulate", "--scenario", "high_noise_low_ramps", "--hours", "-1",
        ])
        assert status == 2
        assert "error_code=invalid_argument" in err


class TestAnalyze:
    def test_table_to_stdout(self, sim_csv, capsys):
        status, out, err = run_cli(capsys, ["analyze", str(sim_csv)])
        assert status == 0
        assert err == ""
        lines = out.splitlines()
        assert lines[0].startswith("label")
        assert lines[1].startswith("grid")

    def test_json_bundle_validates(self, sim_csv, capsys):
        status, out, _ = run_cli(capsys, [
            "analyze", str(sim_csv), "--format", "json",
        ])
        assert status == 0
        doc = json.loads(out)
        validate_bundle_dict(doc)
        assert doc["label"] == "grid"
        assert doc["schema_version"] == 1
        prov = doc["provenance"]
        assert prov["window_length"] == 180
        # Requested lag range exceeds the window; it clamps to n - 1.
        assert prov["max_lag"] == 179
        assert prov["estimator"] == "biased"
        assert prov["nominal_hz"] == 50.0
        assert set(doc["band_minutes"]) == {"100", "200"}

    def test_label_flag_overrides_stem(self, sim_csv, capsys):
        status, out, _ = run_cli(capsys, [
            "analyze", str(sim_csv), "--label", "Node A", "--format", "json",
        ])
        assert status == 0
        assert json.loads(out)["label"] == "Node A"

    def test_output_file_keeps_stdout_quiet(self, tmp_path, sim_csv, capsys):
        out_path = tmp_path / "bundle.json"
        status, out, _ = run_cli(capsys, [
            "analyze", str(sim_csv), "--format", "json", "-o", str(out_path),
        ])
        assert status == 0
        assert out == ""
        doc = json.loads(out_path.read_text(encoding="utf-8"))
        validate_bundle_dict(doc)

    def test_window_flags_reach_provenance(self, sim_csv, capsys):
        status, out, _ = run_cli(capsys, [
            "analyze", str(sim_csv), "--window-offset", "20",
            "--window-len", "100", "--format", "json",
        ])
        assert status == 0
        prov = json.loads(out)["provenance"]
        assert prov["window_offset"] == 20
        assert prov["window_length"] == 100

    def test_window_len_full(self, sim_csv, capsys):
        status, out, _ = run_cli(capsys, [
            "analyze", str(sim_csv), "--window-len", "full", "--format", "json",
        ])
        assert status == 0
        assert json.loads(out)["provenance"]["window_length"] == 180

    def test_window_len_garbage(self, sim_csv, capsys):
        status, _, err = run_cli(capsys, [
            "analyze", str(sim_csv), "--window-len", "wide",
        ])
        assert status == 2
        assert "error_code=invalid_argument" in err

    def test_window_beyond_series(self, sim_csv, capsys):
        status, _, err = run_cli(capsys, [
            "analyze", str(sim_csv), "--window-len", "100000",
        ])
        assert status == 2
        assert "error_code=out_of_range" in err

    def test_default_window_clamps_to_10000(self, tmp_path, capsys, rng):
        values = 50.0 + 0.01 * rng.standard_normal(12000)
        path = tmp_path / "long.csv"
        path.write_text(series_to_csv(make_series(values)), encoding="utf-8")
        status, out, _ = run_cli(capsys, [
            "analyze", str(path), "--max-lag", "50", "--format", "json",
        ])
        assert status == 0
        prov = json.loads(out)["provenance"]
        assert prov["window_length"] == 10000
        assert prov["max_lag"] == 50

    def test_custom_bands(self, sim_csv, capsys):
        status, out, _ = run_cli(capsys, [
            "analyze", str(sim_csv), "--bands", "50,150", "--format", "json",
        ])
        assert status == 0
        doc = json.loads(out)
        assert set(doc["band_minutes"]) == {"50", "150"}
        assert doc["metrics"]["minutes_outside"] == doc["band_minutes"]["50"]

    @pytest.mark.parametrize("bands", ["a,b", "0,200", "-5"])
    def test_bad_bands(self, sim_csv, capsys, bands):
        status, _, err = run_cli(capsys, [
            "analyze", str(sim_csv), "--bands", bands,
        ])
        assert status == 2
        assert "error_code=invalid_argument" in err

    def test_constant_series_keeps_metrics_exits_3(self, tmp_path, capsys):
        path = write_constant_csv(tmp_path)
        status, out, err = run_cli(capsys, [
            "analyze", str(path), "--format", "json",
        ])
        assert status == 3
        assert "error_code=variance_zero" in err
        assert "stage acf failed" in err
        # Partial results still reach stdout before the failing exit.
        doc = json.loads(out)
        assert doc["stages"] == {
            "metrics": "ok", "acf": "variance_zero", "fit": "skipped",
        }
        assert doc["fit"] is None
        assert doc["metrics"]["sigma_f"] == 0.0

    def test_too_few_samples(self, tmp_path, capsys):
        path = write_constant_csv(tmp_path, n=5)
        status, _, err = run_cli(capsys, ["analyze", str(path)])
        assert status == 2
        assert "error_code=series_too_short" in err

    def test_missing_file(self, tmp_path, capsys):
        status, _, err = run_cli(capsys, [
            "analyze", str(tmp_path / "absent.csv"),
        ])
        assert status == 2
        assert "error_code=io_error" in err

    def test_malformed_row(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text(
            "time_s,frequency_hz\n0,50.0\n1,abc\n", encoding="utf-8",
        )
        status, _, err = run_cli(capsys, ["analyze", str(path)])
        assert status == 2
        assert "error_code=malformed_row" in err

    def test_gap_strict_then_hold_filled(self, tmp_path, capsys):
        times = [0, 1, 2, 3, 4, 6, 7, 8, 9]
        rows = "\n".join(f"{t}.000000,{50 + 0.01 * t:.6f}" for t in times)
        path = tmp_path / "gap.csv"
        path.write_text(f"time_s,frequency_hz\n{rows}\n", encoding="utf-8")

        status, _, err = run_cli(capsys, ["analyze", str(path)])
        assert status == 2
        assert "error_code=non_uniform_sampling" in err

        status, out, _ = run_cli(capsys, [
            "analyze", str(path), "--fill-gaps", "hold", "--format", "json",
        ])
        assert status == 0
        prov = json.loads(out)["provenance"]
        assert prov["window_length"] == 10
        assert prov["filled_samples"] == 1

    def test_unbiased_estimator_recorded(self, sim_csv, capsys):
        status, out, _ = run_cli(capsys, [
            "analyze", str(sim_csv), "--unbiased", "--max-lag", "20",
            "--format", "json",
        ])
        assert status == 0
        doc = json.loads(out)
        assert doc["provenance"]["estimator"] == "unbiased"
        assert doc["stages"]["acf"] == "ok"

    def test_unbiased_at_deep_lags_degrades(self, sim_csv, capsys):
        # The N/(N-k) rescale near k = N leaves [-1, 1] on this trace; the
        # acf stage fails typed instead of emitting a non-correlation.
        status, out, err = run_cli(capsys, [
            "analyze", str(sim_csv), "--unbiased", "--format", "json",
        ])
        assert status == 2
        assert "error_code=lag_too_large" in err
        doc = json.loads(out)
        assert doc["stages"] == {
            "metrics": "ok", "acf": "lag_too_large", "fit": "skipped",
        }
        assert doc["fit"] is None

    def test_nominal_hz_flag(self, tmp_path, capsys, rng):
        values = 60.0 + 0.01 * rng.standard_normal(30)
        path = tmp_path / "sixty.csv"
        path.write_text(
            series_to_csv(make_series(values, nominal_hz=60.0)),
            encoding="utf-8",
        )
        status, out, _ = run_cli(capsys, [
            "analyze", str(path), "--nominal-hz", "60", "--format", "json",
        ])
        assert status == 0
        doc = json.loads(out)
        assert doc["provenance"]["nominal_hz"] == 60.0
        assert doc["metrics"]["minutes_outside"] == 0.0

    def test_figures_flag_renders_pngs(self, tmp_path, sim_csv, capsys):
        fig_dir = tmp_path / "figs"
        status, out, err = run_cli(capsys, [
            "analyze", str(sim_csv), "--figures", str(fig_dir),
        ])
        assert status == 0
        assert out.startswith("label")
        names = sorted(p.name for p in fig_dir.iterdir())
        assert names == ["grid_acf_fit.png", "grid_trace.png"]
        for name in names:
            assert (fig_dir / name).read_bytes()[:8] == PNG_MAGIC
        figure_lines = [l for l in err.splitlines() if l.startswith("figure=")]
        assert len(figure_lines) == 2


class TestAcf:
    def test_csv_to_stdout(self, sim_csv, capsys):
        status, out, _ = run_cli(capsys, [
            "acf", str(sim_csv), "--max-lag", "20",
        ])
        assert status == 0
        lines = out.splitlines()
        assert lines[0] == "lag_s,acf"
        assert len(lines) == 22
        assert lines[1] == "0,1.000000"

    def test_output_file_parses_back(self, tmp_path, sim_csv, capsys):
        path = tmp_path / "acf.csv"
        status, _, _ = run_cli(capsys, [
            "acf", str(sim_csv), "--max-lag", "20", "--unbiased",
            "-o", str(path),
        ])
        assert status == 0
        curve = acf_from_csv(path.read_text(encoding="utf-8"))
        assert curve.values.size == 21
        assert curve.values[0] == 1.0

    def test_lag_beyond_series(self, sim_csv, capsys):
        status, _, err = run_cli(capsys, [
            "acf", str(sim_csv), "--max-lag", "400",
        ])
        assert status == 2
        assert "error_code=lag_too_large" in err


class TestFit:
    @pytest.fixture()
    def acf_csv(self, tmp_path, sim_csv, capsys):
        path = tmp_path / "acf.csv"
        status, _, _ = run_cli(capsys, [
            "acf", str(sim_csv), "--max-lag", "60", "-o", str(path),
        ])
        assert status == 0
        return path

    def test_fit_json(self, acf_csv, capsys):
        status, out, _ = run_cli(capsys, ["fit", str(acf_csv)])
        assert status == 0
        doc = json.loads(out)
        assert doc["n_lags"] == 61
        assert doc["n_starts"] == 108
        assert set(doc["params"]) == {"u1", "alpha_fast", "alpha_slow", "omega"}

    def test_emit_curve(self, tmp_path, acf_csv, capsys):
        curve_path = tmp_path / "curve.csv"
        status, _, _ = run_cli(capsys, [
            "fit", str(acf_csv), "--emit-curve", str(curve_path),
        ])
        assert status == 0
        lines = curve_path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "lag_s,acf,fit"
        assert len(lines) == 62
        # The model is pinned to 1 at lag zero by construction.
        assert lines[1] == "0,1.000000,1.000000"

    def test_short_curve_is_degenerate(self, tmp_path, capsys):
        rows = "\n".join(f"{k},{0.9 ** k:.6f}" for k in range(7))
        path = tmp_path / "short.csv"
        path.write_text(f"lag_s,acf\n{rows}\n", encoding="utf-8")
        status, _, err = run_cli(capsys, ["fit", str(path)])
        assert status == 2
        assert "error_code=degenerate_input" in err

    def test_missing_file(self, tmp_path, capsys):
        status, _, err = run_cli(capsys, ["fit", str(tmp_path / "none.csv")])
        assert status == 2
        assert "error_code=io_error" in err


class TestReport:
    def test_two_files_two_rows(self, sim_csv, sim_csv_b, capsys):
        status, out, err = run_cli(capsys, [
            "report", str(sim_csv), str(sim_csv_b),
        ])
        assert status == 0
        assert err == ""
        lines = out.splitlines()
        assert len(lines) == 3
        assert lines[0].startswith("label")
        assert lines[1].startswith("grid")
        assert lines[2].startswith("coastal")

    def test_labels_flag(self, sim_csv, sim_csv_b, capsys):
        status, out, _ = run_cli(capsys, [
            "report", str(sim_csv), str(sim_csv_b), "--labels", "North,South",
        ])
        assert status == 0
        lines = out.splitlines()
        assert lines[1].startswith("North")
        assert lines[2].startswith("South")

    def test_label_count_mismatch(self, sim_csv, sim_csv_b, capsys):
        status, _, err = run_cli(capsys, [
            "report", str(sim_csv), str(sim_csv_b), "--labels", "Only",
        ])
        assert status == 2
        assert "error_code=invalid_argument" in err

    def test_json_document(self, sim_csv, sim_csv_b, capsys):
        status, out, _ = run_cli(capsys, [
            "report", str(sim_csv), str(sim_csv_b), "--format", "json",
        ])
        assert status == 0
        doc = json.loads(out)
        assert doc["schema_version"] == 1
        labels = [b["label"] for b in doc["bundles"]]
        assert labels == ["grid", "coastal"]
        assert "schema_version" not in doc["bundles"][0]

    def test_partial_failure_keeps_other_rows(self, tmp_path, sim_csv, capsys):
        flat = write_constant_csv(tmp_path)
        status, out, err = run_cli(capsys, [
            "report", str(sim_csv), str(flat),
        ])
        assert status == 3
        assert "error_code=variance_zero" in err
        lines = out.splitlines()
        assert len(lines) == 3
        assert lines[2].startswith("flat")
        assert lines[2].rstrip().endswith("--")

    def test_figures_for_each_input(self, tmp_path, sim_csv, sim_csv_b, capsys):
        fig_dir = tmp_path / "figs"
        status, _, err = run_cli(capsys, [
            "report", str(sim_csv), str(sim_csv_b), "--figures", str(fig_dir),
        ])
        assert status == 0
        names = sorted(p.name for p in fig_dir.iterdir())
        assert names == [
            "coastal_acf_fit.png", "coastal_trace.png",
            "grid_acf_fit.png", "grid_trace.png",
        ]
        assert len([l for l in err.splitlines() if l.startswith("figure=")]) == 4
