"""CLI: subcommands, config files, flag precedence, exit codes."""

import json
import subprocess
import sys

import pytest

from nqs_overlap.cli import main

FAST = ["--length", "8", "--samples", "256", "--reps", "8", "--pairs", "3", "--seed", "5"]


class TestExitCodes:
    def test_success_is_zero(self, tmp_path):
        out = tmp_path / "v.json"
        rc = main(["variance", "--ansatz", "arnn", *FAST, "--out", str(out)])
        assert rc == 0
        assert out.exists()

    def test_validation_error_is_one(self):
        assert main(["variance", "--ansatz", "arnn", "--length", "0"]) == 1

    def test_bad_flag_value_is_one(self):
        assert main(["variance", "--ansatz", "tensor-train"]) == 1

    def test_io_error_is_two(self, tmp_path):
        missing = tmp_path / "nope" / "out.json"
        rc = main(["variance", "--ansatz", "arnn", *FAST, "--out", str(missing)])
        assert rc == 2

    def test_plan_without_inputs_is_one(self):
        assert main(["plan"]) == 1


class TestPlan:
    def test_sample_budget(self, tmp_path, capsys):
        rc = main(["plan", "--epsilon", "0.01", "--delta", "0.32"])
        assert rc == 0
        assert "31250" in capsys.readouterr().out

    def test_bound_report_row(self, tmp_path):
        out = tmp_path / "plan.json"
        rc = main(
            ["plan", "--fidelity", "0.5", "--samples", "65536", "--delta", "0.32", "--out", str(out)]
        )
        assert rc == 0
        payload = json.loads(out.read_text())
        row = payload["rows"][0]
        assert row["fidelity_halfwidth"] == pytest.approx(6.906e-3, abs=1e-6)
        assert row["chebyshev_tighter"] is True


class TestExact:
    def test_single_comparison_row(self, tmp_path):
        out = tmp_path / "exact.json"
        rc = main(
            [
                "exact",
                "--ansatz",
                "rbm",
                "--length",
                "8",
                "--t",
                "2.0",
                "--samples",
                "1024",
                "--seed",
                "3",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        row = json.loads(out.read_text())["rows"][0]
        assert 0.0 <= row["fidelity_exact"] <= 1.0 + 1e-12
        assert row["fidelity_error"] >= 0.0

    def test_requires_magnitude(self):
        assert main(["exact", "--ansatz", "rbm"]) == 1


class TestConfigFile:
    def test_config_supplies_values(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text(
            "# benchmark settings\n"
            "ansatz=arnn\nlength=8\nsamples=256\nreps=8\npairs=3\nseed=5\nformat=json\n"
        )
        out = tmp_path / "out.json"
        rc = main(["variance", "--config", str(config), "--out", str(out)])
        assert rc == 0
        payload = json.loads(out.read_text())
        assert payload["spec"]["ansatz_kind"] == "arnn"
        assert payload["spec"]["n_samples"] == 256

    def test_flags_override_config(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("ansatz=arnn\nlength=8\nsamples=256\nreps=8\npairs=3\nseed=5\n")
        out = tmp_path / "out.json"
        rc = main(["variance", "--config", str(config), "--samples", "128", "--out", str(out)])
        assert rc == 0
        assert json.loads(out.read_text())["spec"]["n_samples"] == 128

    def test_unknown_key_rejected(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("temperature=3\n")
        assert main(["variance", "--config", str(config)]) == 1

    def test_malformed_line_rejected(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("just some words\n")
        assert main(["variance", "--config", str(config)]) == 1


class TestOutputs:
    def test_csv_format(self, tmp_path):
        out = tmp_path / "v.csv"
        rc = main(["variance", "--ansatz", "arnn", *FAST, "--format", "csv", "--out", str(out)])
        assert rc == 0
        header = out.read_text().splitlines()[0]
        assert "empirical_variance" in header

    def test_scaling_grid_flag(self, tmp_path):
        out = tmp_path / "s.json"
        rc = main(
            [
                "scaling",
                "--ansatz",
                "arnn",
                *FAST,
                "--pairs",
                "2",
                "--n-grid",
                "64,256",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        payload = json.loads(out.read_text())
        assert [row["n_samples"] for row in payload["rows"]] == [64, 256]

    def test_module_entry_point(self):
        # the installed console script path, exercised end to end
        proc = subprocess.run(
            [sys.executable, "-m", "nqs_overlap.cli", "plan", "--epsilon", "0.1", "--delta", "0.5"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "required_samples_normalized=200" in proc.stdout
