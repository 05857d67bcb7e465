"""Command-line pipeline: outputs, determinism, schema conformance."""

import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from tailmix.cli import main
from tailmix.experiments import PRESETS, RecoveryPlan
from tailmix.ingest import read_series_file

SCHEMA = json.loads(
    (Path(__file__).resolve().parent.parent / "docs" / "report-schema.json")
    .read_text()
)


def check_report(path):
    report = json.loads(Path(path).read_text())
    jsonschema.validate(report, SCHEMA)
    return report


@pytest.fixture()
def flow_file(tmp_path):
    rng = np.random.default_rng(77)
    times = np.sort(rng.uniform(0, 4000, size=1500))
    path = tmp_path / "trace.csv"
    lines = ["flow_id,start_time,bytes"]
    lines += [f"f{i},{t:.3f},{100 + i}" for i, t in enumerate(times)]
    path.write_text("\n".join(lines) + "\n")
    return path


class TestBinCommand:
    def test_bin_writes_series_and_report(self, flow_file, tmp_path):
        out = tmp_path / "out"
        rc = main(["bin", "--input", str(flow_file), "--windows", "8,32",
                   "--out-dir", str(out)])
        assert rc == 0
        report = check_report(out / "trace.bin-report.json")
        assert report["kind"] == "bin"
        assert len(report["results"]) == 2
        s8 = read_series_file(out / "trace.w8.series")
        assert s8.bin_seconds == 8.0
        assert s8.counts.sum() == 1500

    def test_bin_with_uptime(self, flow_file, tmp_path):
        up = tmp_path / "up.csv"
        up.write_text("begin,end\n0,2000\n")
        out = tmp_path / "out"
        rc = main(["bin", "--input", str(flow_file), "--uptime", str(up),
                   "--windows", "8", "--out-dir", str(out)])
        assert rc == 0
        report = check_report(out / "trace.bin-report.json")
        assert report["results"][0]["meta"]["n_bins_dropped_uptime"] > 0
        assert len(report["manifest"]["inputs"]) == 2

    def test_bin_missing_input_fails(self, tmp_path, capsys):
        rc = main(["bin", "--input", str(tmp_path / "nope.csv")])
        assert rc == 1
        assert "error:" in capsys.readouterr().err


@pytest.fixture()
def series_file(tmp_path):
    out = tmp_path / "sim"
    rc = main(["simulate", "--model", "EP", "--weights", "0.5,0.5",
               "--lambdas", "0.2", "--alpha", "1.6", "--n", "1500",
               "--seed", "3", "--out-dir", str(out)])
    assert rc == 0
    return out / "sim-ep-n1500.series"


class TestSimulateCommand:
    def test_outputs_and_determinism(self, tmp_path):
        args = ["simulate", "--model", "EEP", "--weights", "0.3,0.4,0.3",
                "--lambdas", "1.5,0.15", "--alpha", "1.6", "--n", "500",
                "--seed", "8"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out-dir", str(a)]) == 0
        assert main(args + ["--out-dir", str(b)]) == 0
        name = "sim-eep-n500.series"
        assert (a / name).read_bytes() == (b / name).read_bytes()
        report = check_report(a / "sim-eep-n500.sim-report.json")
        assert report["manifest"]["seed"] == 8
        assert report["results"]["output"]["sha256"]

    def test_weights_required_for_exponential_models(self, capsys):
        rc = main(["simulate", "--model", "EP", "--alpha", "1.6", "--n", "10"])
        assert rc == 1
        assert "weights" in capsys.readouterr().err

    def test_pure_tail_needs_no_weights(self, tmp_path):
        rc = main(["simulate", "--model", "P", "--alpha", "2.0", "--n", "100",
                   "--seed", "1", "--out-dir", str(tmp_path)])
        assert rc == 0
        s = read_series_file(tmp_path / "sim-p-n100.series")
        assert s.n == 100


class TestFitSelectCommand:
    def test_single_file(self, series_file, tmp_path):
        out = tmp_path / "fit"
        rc = main(["fit-select", "--input", str(series_file), "--restarts", "6",
                   "--seed", "5", "--out-dir", str(out)])
        assert rc == 0
        report = check_report(out / "sim-ep-n1500.fit-report.json")
        sel = report["results"]["selection"]
        assert sel["chosen"] == "EP"
        assert sel["log_bf_ep_p"] > 10
        assert sel["strengths"]["EP_vs_P"]["log10"]["label"] == "decisive"
        assert report["manifest"]["config"]["restarts"] == 6

    def test_reports_byte_identical_across_runs(self, series_file, tmp_path):
        args = ["fit-select", "--input", str(series_file), "--restarts", "5",
                "--seed", "5"]
        a, b = tmp_path / "r1", tmp_path / "r2"
        assert main(args + ["--out-dir", str(a)]) == 0
        assert main(args + ["--out-dir", str(b)]) == 0
        name = "sim-ep-n1500.fit-report.json"
        assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_directory_mode_writes_summary_csv(self, series_file, tmp_path):
        out = tmp_path / "fits"
        rc = main(["fit-select", "--input", str(series_file.parent),
                   "--restarts", "4", "--seed", "5", "--out-dir", str(out)])
        assert rc == 0
        lines = (out / "summary.csv").read_text().strip().splitlines()
        assert len(lines) == 2  # header plus one series
        assert lines[0].startswith("file,source_id,bin_seconds,n,chosen")
        assert ",EP," in lines[1]

    def test_empty_directory_fails(self, tmp_path, capsys):
        rc = main(["fit-select", "--input", str(tmp_path)])
        assert rc == 1
        assert "no .series" in capsys.readouterr().err

    def test_seed_env_variable_used(self, series_file, tmp_path, monkeypatch):
        out1, out2 = tmp_path / "e1", tmp_path / "e2"
        monkeypatch.setenv("TAILMIX_SEED", "99")
        assert main(["fit-select", "--input", str(series_file),
                     "--restarts", "4", "--out-dir", str(out1)]) == 0
        report = check_report(out1 / "sim-ep-n1500.fit-report.json")
        assert report["manifest"]["seed"] == 99
        monkeypatch.setenv("TAILMIX_SEED", "not-a-number")
        rc = main(["fit-select", "--input", str(series_file),
                   "--restarts", "4", "--out-dir", str(out2)])
        assert rc == 1

    def test_runtime_sidecar_not_in_report(self, series_file, tmp_path):
        out = tmp_path / "fit"
        main(["fit-select", "--input", str(series_file), "--restarts", "4",
              "--seed", "5", "--out-dir", str(out)])
        sidecar = out / "sim-ep-n1500.fit-report.json.runtime.json"
        assert sidecar.exists()
        assert "wall_seconds" in json.loads(sidecar.read_text())
        report = json.loads((out / "sim-ep-n1500.fit-report.json").read_text())
        assert "wall_seconds" not in json.dumps(report)


class TestClassifyCommand:
    def test_classify_report(self, series_file, tmp_path):
        out = tmp_path / "cls"
        rc = main(["classify", "--input", str(series_file), "--restarts", "5",
                   "--seed", "5", "--out-dir", str(out)])
        assert rc == 0
        report = check_report(out / "sim-ep-n1500.classify-report.json")
        res = report["results"]
        assert res["tail_threshold"] >= 1
        assert res["n_tail_bins"] + res["n_body_bins"] == res["n"]
        assert 0.0 <= res["tail_bin_fraction"] <= 1.0
        values = [pv["value"] for pv in res["per_value"]]
        assert values == sorted(values)
        for pv in res["per_value"]:
            assert 0.0 <= pv["tail_responsibility"] <= 1.0


class TestValidateCommand:
    def test_mini_preset_end_to_end(self, tmp_path, monkeypatch, capsys):
        mini = RecoveryPlan("mini-check", alphas=(1.6,), n_samples=1200,
                            n_replicates=2, restarts=4)
        monkeypatch.setitem(PRESETS, "mini-check", mini)
        out = tmp_path / "val"
        rc = main(["validate", "--preset", "mini-check", "--seed", "2",
                   "--out-dir", str(out)])
        assert rc == 0
        report = check_report(out / "mini-check-report.json")
        assert report["results"]["study"] == "alpha-recovery"
        csv_text = (out / "mini-check-records.csv").read_text()
        assert csv_text.splitlines()[0] == "alpha,replicate,estimator,estimate"
        assert len(csv_text.strip().splitlines()) == 5
        assert "mini-check:" in capsys.readouterr().out
