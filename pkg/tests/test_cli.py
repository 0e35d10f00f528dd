"""Tests for the fairprice command line and its exit codes."""

from __future__ import annotations

import json

import pytest

from fair_pricing.cli.main import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, build_parser, main

FAST = ["--c-trisect", "1e-6", "--c-checkpoint", "1e-3"]


# ======================================================================
# Parser
# ======================================================================
class TestParser:

    def test_run_arguments(self):
        args = build_parser().parse_args(["run", "--policy", "fdp-dl", "--lambda", "0.5", "--T", "1000"])
        assert args.command == "run"
        assert args.lam == 0.5
        assert args.T == 1000
        assert args.instance == "exp-paper"
        assert args.mode is None

    def test_log_level_is_global(self):
        args = build_parser().parse_args(["--log-level", "debug", "verify-lb", "--A", "20", "--h", "0.005"])
        assert args.log_level == "DEBUG"

    def test_non_numeric_lambda(self):
        with pytest.raises(SystemExit) as excinfo:
            build_parser().parse_args(["run", "--policy", "fdp-dl", "--lambda", "half", "--T", "10"])
        assert excinfo.value.code == EXIT_USAGE

    def test_sweep_needs_one_source(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["sweep"])


# ======================================================================
# run
# ======================================================================
class TestRunCommand:

    def test_writes_trace_and_summary(self, tmp_path):
        argv = [
            "run", "--instance", "linear-paper", "--policy", "fdp-dl", "--lambda", "0.5",
            "--T", "3000", "--seed", "1", "--out", str(tmp_path), *FAST,
        ]
        assert main(argv) == EXIT_OK
        stem = "fdp-dl_linear-paper_lam0.5_T3000_seed1"
        assert (tmp_path / f"{stem}.csv").exists()
        summary = json.loads((tmp_path / f"{stem}.json").read_text())
        assert summary["T"] == 3000
        assert sum(summary["stage_periods"].values()) == 3000

        assert main(argv) == EXIT_USAGE
        assert main([*argv, "--force"]) == EXIT_OK

    def test_soft_policy_defaults_to_soft_mode(self, tmp_path):
        argv = [
            "run", "--policy", "fdp-gfm", "--measure", "demand", "--lambda", "0.5",
            "--T", "2000", "--out", str(tmp_path), *FAST,
        ]
        assert main(argv) == EXIT_OK

    def test_lambda_out_of_range(self, tmp_path):
        argv = ["run", "--policy", "fdp-dl", "--lambda", "1.5", "--T", "100", "--out", str(tmp_path)]
        assert main(argv) == EXIT_USAGE

    def test_incompatible_policy(self, tmp_path):
        argv = ["run", "--policy", "fdp-dl", "--measure", "demand", "--lambda", "0.5", "--T", "100", "--out", str(tmp_path)]
        assert main(argv) == EXIT_USAGE

    def test_unknown_instance(self, tmp_path):
        argv = ["run", "--instance", "nope", "--policy", "fdp-dl", "--lambda", "0.5", "--T", "100", "--out", str(tmp_path)]
        assert main(argv) == EXIT_USAGE


# ======================================================================
# sweep
# ======================================================================
class TestSweepCommand:

    def test_preset_dry_run(self):
        assert main(["sweep", "--preset", "desk-scale-fig1", "--dry-run"]) == EXIT_OK

    def test_empty_policy_list(self, tmp_path):
        path = tmp_path / "sweep.yaml"
        path.write_text("instance: exp-paper\npolicies: []\nlambdas: [0.5]\nhorizons: [100]\n", encoding="utf-8")
        assert main(["sweep", str(path), "--dry-run"]) == EXIT_USAGE

    def test_small_sweep(self, tmp_path):
        path = tmp_path / "sweep.yaml"
        path.write_text(
            "instance: exp-paper\n"
            "policies: [baseline-etc]\n"
            "lambdas: [0.5]\n"
            "horizons: [200, 400, 800]\n"
            "trials: 2\n"
            "schedule: {c_trisect: 1.0e-6, c_checkpoint: 1.0e-3}\n",
            encoding="utf-8",
        )
        out = tmp_path / "out"
        argv = ["sweep", str(path), "--workers", "1", "--quiet", "--out", str(out)]
        assert main(argv) == EXIT_OK
        assert (out / "results.csv").exists()
        assert (out / "slopes.csv").exists()
        assert (out / "manifest.json").exists()
        assert main(argv) == EXIT_USAGE


# ======================================================================
# oracle / verify-lb
# ======================================================================
class TestOracleCommand:

    def test_json_output(self, capsys):
        assert main(["--log-level", "ERROR", "oracle", "--instance", "linear-paper", "--lambda", "0.5", "--json"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["lambda"] == 0.5
        assert data["p_star"] == pytest.approx([3.25, 3.75], abs=1e-5)

    def test_panel_output(self):
        assert main(["oracle", "--instance", "exp-paper", "--lambda", "0.2"]) == EXIT_OK


class TestVerifyLowerBoundCommand:

    @pytest.mark.parametrize("A,h", [("50", "0.005"), ("20", "0.02")])
    def test_out_of_range(self, A, h):
        assert main(["verify-lb", "--A", A, "--h", h]) == EXIT_USAGE

    def test_failed_report(self, capsys):
        assert main(["--log-level", "ERROR", "verify-lb", "--A", "20", "--h", "0.005", "--json"]) == EXIT_RUNTIME
        data = json.loads(capsys.readouterr().out)
        assert data["passed"] is False

    def test_known_d3_failure_is_explained(self, capsys):
        assert main(["--log-level", "ERROR", "verify-lb", "--A", "20", "--h", "0.005"]) == EXIT_RUNTIME
        out = " ".join(capsys.readouterr().out.split())
        assert "item (c) fails only for d3" in out
        assert "not a regression" in out


# ======================================================================
# Live display
# ======================================================================
class TestSweepProgress:

    def test_add_counts_cells_and_failures(self):
        from fair_pricing.cli.rich_display import SweepProgress
        from fair_pricing.experiments import CellResult, SweepCell

        progress = SweepProgress(total_cells=2)
        progress.add(CellResult(SweepCell(0, "fdp-dl", 0.5, 100, (1, 2, 3))))
        progress.add(CellResult(SweepCell(1, "fdp-dl", 0.5, 200, (4,)), error="DomainError: boom"))
        assert progress.cells_done == 2
        assert progress.trials_done == 4
        assert progress.last == "fdp-dl λ=0.5 T=200"
        assert progress.failed == ["fdp-dl λ=0.5 T=200: DomainError: boom"]

    def test_live_sweep(self, tmp_path):
        path = tmp_path / "sweep.yaml"
        path.write_text(
            "instance: linear-paper\n"
            "policies: [baseline-dpa]\n"
            "lambdas: [0.0]\n"
            "horizons: [100, 200, 300]\n"
            "trials: 1\n",
            encoding="utf-8",
        )
        assert main(["sweep", str(path), "--workers", "1", "--out", str(tmp_path / "out")]) == EXIT_OK
