"""
End-to-end tests of the ``cqd`` command line, run as a subprocess.
"""

import csv
import io
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from cqd.cli import SCAN_HEADER, SIMULATE_HEADER

REPO_ROOT = Path(__file__).resolve().parent.parent


def run_cli(*args, env=None):
    environment = {key: value for key, value in os.environ.items()
                   if key not in ("CQD_CONFIG", "CQD_LOG_FILE", "CQD_METRICS_FILE")}
    environment["LOG_LEVEL"] = "WARNING"
    environment.update(env or {})
    return subprocess.run([sys.executable, "-m", "cqd", *args], cwd=REPO_ROOT, env=environment,
                          capture_output=True, text=True, timeout=300)


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestUsage:
    """Help, usage errors and exit codes."""

    def test_help_lists_subcommands(self):
        result = run_cli("--help")
        assert result.returncode == 0
        for command in ("scan", "stats", "fit-ki", "mc-collapse", "simulate", "schrodinger-check",
                        "fields", "uncertainty", "two-stage", "entangle", "verify"):
            assert command in result.stdout

    def test_unknown_command_exits_1(self):
        assert run_cli("teleport").returncode == 1

    def test_missing_required_option_exits_1(self):
        result = run_cli("mc-collapse")
        assert result.returncode == 1
        assert "--theta-e" in result.stderr

    def test_invalid_seed_exits_1(self):
        assert run_cli("entangle", "--seed", "-1").returncode == 1

    def test_bad_dataset_exits_2(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("current_A,flip_fraction\n0.1,2.0\n")
        result = run_cli("stats", "--data", str(path))
        assert result.returncode == 2
        assert "cqd: error" in result.stderr
        assert "line=2" in result.stderr

    def test_bad_config_exits_2(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"unknown": 1}))
        result = run_cli("fields", "--config", str(path))
        assert result.returncode == 2

    def test_unsupported_format_exits_2(self):
        assert run_cli("entangle", "--n", "2000", "--format", "svg").returncode == 2


class TestScan:
    """Flip-fraction scan output."""

    def test_csv(self):
        result = run_cli("scan")
        assert result.returncode == 0
        rows = parse_csv(result.stdout)
        assert result.stdout.splitlines()[0] == ",".join(SCAN_HEADER)
        assert len(rows) == 50
        assert 0.35 <= max(float(row["W4"]) for row in rows) <= 0.39

    def test_provenance_goes_to_stderr(self):
        result = run_cli("scan", "--points", "5", "--seed", "9")
        assert "seed" in result.stderr
        assert "seed" not in result.stdout

    def test_json_peak(self):
        result = run_cli("scan", "--points", "10", "--format", "json")
        document = json.loads(result.stdout)
        assert len(document["rows"]) == 10
        assert 0.08 <= document["peak"]["current"] <= 0.13
        assert 0.35 <= document["peak"]["W4"] <= 0.39

    def test_induction_lowers_the_curve(self):
        plain = parse_csv(run_cli("scan", "--points", "5").stdout)
        damped = parse_csv(run_cli("scan", "--points", "5", "--ki", "7.4e-4").stdout)
        for before, after in zip(plain, damped):
            assert float(after["W_cqd"]) < float(before["W_cqd"])
            assert float(after["W4"]) == pytest.approx(float(before["W4"]))

    def test_svg(self):
        result = run_cli("scan", "--points", "10", "--format", "svg")
        assert result.returncode == 0
        assert "<svg" in result.stdout

    def test_out_file(self, tmp_path):
        path = tmp_path / "scan.csv"
        result = run_cli("scan", "--points", "5", "--out", str(path))
        assert result.stdout == ""
        assert len(parse_csv(path.read_text())) == 5


class TestCommands:
    """One run of each remaining subcommand."""

    def test_fields(self):
        rows = parse_csv(run_cli("fields").stdout)
        kappa = {(row["density"], row["averaging"]): float(row["kappa"]) for row in rows}
        assert kappa[("tophat", "torque")] == pytest.approx(0.3125, rel=1e-3)
        assert kappa[("tophat", "self")] == pytest.approx(0.5)

    def test_two_stage(self):
        document = json.loads(run_cli("two-stage", "--alpha", repr(math.pi / 3)).stdout)
        assert document["ratio"] == pytest.approx(1.125)
        assert document["p_quadrature"] == pytest.approx(0.84375, abs=1e-6)

    def test_mc_collapse_is_deterministic(self):
        args = ("mc-collapse", "--theta-e", "1.0", "--n", "150000", "--seed", "5")
        first = run_cli(*args)
        second = run_cli(*args, "--workers", "3")
        assert first.returncode == 0
        assert first.stdout == second.stdout
        document = json.loads(first.stdout)
        assert document["dist"] == "isotropic"
        assert set(document) == {"estimate", "stderr", "n", "analytic", "theta_e", "dist"}
        assert abs(document["estimate"] - document["analytic"]) <= 4.5 * document["stderr"]

    def test_stats(self):
        document = json.loads(run_cli("stats").stdout)
        assert document["model"] == "w4"
        assert document["r_squared"] == pytest.approx(0.9787, abs=0.02)
        assert document["p_value"] < 1e-5
        assert document["n"] == 10

    def test_fit_ki(self):
        document = json.loads(run_cli("fit-ki").stdout)
        assert document["c_ri_hat"] == pytest.approx(0.57, rel=0.3)
        assert 150.0 < document["n_c_hat"] < 320.0

    def test_simulate(self):
        result = run_cli("simulate", "--ki", "0.01", "--hold-nucleus", "--samples", "11", "--t-end", "1e-6")
        assert result.returncode == 0
        assert result.stdout.splitlines()[0] == ",".join(SIMULATE_HEADER)
        rows = parse_csv(result.stdout)
        assert len(rows) == 11
        assert float(rows[-1]["theta_e"]) < float(rows[0]["theta_e"])

    def test_schrodinger_check(self):
        rows = parse_csv(run_cli("schrodinger-check").stdout)
        assert [float(row["k"]) for row in rows] == [0.1, 0.5, 1.0, 2.0]
        assert all(float(row["relative_error"]) < 0.02 for row in rows)

    def test_uncertainty(self):
        document = json.loads(run_cli("uncertainty", "--grid", "20").stdout)
        assert document["points"] == 400
        assert document["max_residual"] <= 1e-12
        assert document["inequality_violations"] == 0

    def test_entangle(self):
        document = json.loads(run_cli("entangle", "--n", "20000", "--correlated").stdout)
        assert document["correlated"] is True
        assert document["prediction_holds_fraction"] == 1.0
        assert set(document) == {"n", "correlated", "p_branch1_plus", "stderr",
                                 "prediction_holds_fraction", "undetermined"}

    def test_verify(self):
        result = run_cli("verify")
        assert result.returncode == 0
        assert json.loads(result.stdout)["passed"] is True

    def test_metrics_file(self, tmp_path):
        path = tmp_path / "cqd.prom"
        result = run_cli("fields", env={"CQD_METRICS_FILE": str(path)})
        assert result.returncode == 0
        text = path.read_text()
        assert "cqd_build_info" in text
        assert 'command="fields"' in text
