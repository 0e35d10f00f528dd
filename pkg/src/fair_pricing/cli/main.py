import argparse
import json
import logging
import re
import sys
from pathlib import Path
from typing import Optional

from rich.logging import RichHandler

from fair_pricing.cli.rich_display import (
    console,
    print_error_panel,
    print_lb_report,
    print_plan_table,
    print_run_summary,
    print_solution_panel,
    print_sweep_result,
    run_live_sweep,
)
from fair_pricing.errors import ConfigError, DomainError
from fair_pricing.settings import get_settings

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

logger = logging.getLogger(__name__)


class HelpFormatter(argparse.ArgumentDefaultsHelpFormatter, argparse.RawDescriptionHelpFormatter):
    pass


def _add_spec_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lam", type=float, required=True, help="Fairness level λ in [0, 1]")
    parser.add_argument("--measure", choices=["price", "demand"], default="price", help="Fairness measure")
    parser.add_argument(
        "--discrepancy",
        choices=["difference", "log_ratio"],
        default="difference",
        help="Discrepancy between group measures",
    )


def build_parser() -> argparse.ArgumentParser:
    """Build and return the argument parser for the CLI."""
    from fair_pricing.experiments.presets import PRESETS
    from fair_pricing.policies.registry import POLICY_NAMES

    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="fairprice",
        description="Simulate fairness-aware dynamic pricing policies and their regret.",
        formatter_class=HelpFormatter,
        epilog="""
Examples:
  # One trial of the hard price-fairness learner
  fairprice run --instance exp-paper --policy fdp-dl --lambda 0.5 --T 100000 --seed 1

  # Soft demand fairness, penalty weight 1
  fairprice run --policy fdp-gfm --measure demand --lambda 0.5 --T 20000

  # Preview and run a bundled sweep
  fairprice sweep --preset desk-scale-fig1 --dry-run
  fairprice sweep sweep.yaml --workers 8 --out results/fig1

  # Clairvoyant optima and lower-bound instance checks
  fairprice oracle --instance linear-paper --lambda 0.5
  fairprice verify-lb --A 20 --h 0.005
""",
    )
    parser.add_argument(
        "--log-level",
        default=settings.LOG_LEVEL,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        type=str.upper,
        help="Logging level",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # run
    run = subparsers.add_parser("run", help="Run one seeded trial", formatter_class=HelpFormatter)
    run.add_argument("--instance", default="exp-paper", help="Instance name, lb-pair(A,h) or a catalog entry")
    run.add_argument("--policy", required=True, choices=POLICY_NAMES, help="Pricing policy")
    _add_spec_arguments(run)
    run.add_argument("--T", dest="T", type=int, required=True, help="Horizon length")
    run.add_argument("--seed", type=int, default=0, help="Noise seed (FAIRPRICE_SEED overrides)")
    run.add_argument("--gamma", type=float, default=1.0, help="Soft-penalty weight γ")
    run.add_argument("--mode", choices=["hard", "soft"], default=None, help="Constraint mode (default: the policy's)")
    run.add_argument("--c-trisect", type=float, default=1.0, help="Stage-I sample-count multiplier")
    run.add_argument("--c-checkpoint", type=float, default=1.0, help="Stage-II sample-count multiplier")
    run.add_argument("--checkpoint-scale", type=float, default=1.0, help="Checkpoint grid density multiplier")
    run.add_argument("--stop-coef", type=float, default=4.0, help="Trisection stop width as a multiple of T^-1/5")
    run.add_argument("--slack-coef", type=float, default=8.0, help="Commit slack as a multiple of T^-1/5")
    run.add_argument(
        "--noise",
        choices=["bernoulli", "truncated_additive", "deterministic"],
        default=None,
        help="Override the instance noise model",
    )
    run.add_argument("--sigma", type=float, default=0.0, help="Noise sd for truncated_additive")
    run.add_argument("--full-trace", action="store_true", help="Store every period, not a sample")
    run.add_argument("--out", type=Path, default=Path(settings.OUTPUT_DIR), help="Output directory")
    run.add_argument("--force", action="store_true", help="Overwrite existing output files")
    run.add_argument("--catalog", type=Path, default=None, help="YAML instance catalog")

    # sweep
    sweep = subparsers.add_parser("sweep", help="Run a sweep from a YAML config or preset", formatter_class=HelpFormatter)
    source = sweep.add_mutually_exclusive_group(required=True)
    source.add_argument("config", nargs="?", type=Path, default=None, help="YAML sweep config")
    source.add_argument("--preset", choices=list(PRESETS), default=None, help="Bundled sweep config")
    sweep.add_argument("--dry-run", action="store_true", help="Print the cells and trial count without running")
    sweep.add_argument("--workers", type=int, default=settings.WORKERS, help="Worker processes (default: cores)")
    sweep.add_argument("--out", type=Path, default=None, help="Output directory (default: config, then OUTPUT_DIR)")
    sweep.add_argument("--force", action="store_true", help="Overwrite existing output files")
    sweep.add_argument("--quiet", "-q", action="store_true", help="No live progress display")

    # oracle
    oracle = subparsers.add_parser("oracle", help="Clairvoyant optima of an instance", formatter_class=HelpFormatter)
    oracle.add_argument("--instance", default="exp-paper", help="Instance name")
    _add_spec_arguments(oracle)
    oracle.add_argument("--tol", type=float, default=settings.ORACLE_TOL, help="Oracle tolerance")
    oracle.add_argument("--catalog", type=Path, default=None, help="YAML instance catalog")
    oracle.add_argument("--json", action="store_true", help="Print the solution as JSON")

    # verify-lb
    verify = subparsers.add_parser("verify-lb", help="Check the lower-bound instance properties", formatter_class=HelpFormatter)
    verify.add_argument("--A", dest="A", type=float, required=True, help="Instance parameter A in [20, 30]")
    verify.add_argument("--h", dest="h", type=float, required=True, help="Instance parameter h in (0, 0.01)")
    verify.add_argument("--grid-step", type=float, default=settings.LB_VERIFY_GRID_STEP, help="Price grid step")
    verify.add_argument("--json", action="store_true", help="Print the report as JSON")

    return parser


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


def _stem(*parts: object) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", "_".join(str(p) for p in parts)).strip("-")


def cmd_run(args: argparse.Namespace) -> int:
    from fair_pricing.api.main import default_mode
    from fair_pricing.demand.catalog import load_catalog, resolve_instance
    from fair_pricing.demand.market import NoiseModel
    from fair_pricing.experiments.config import ScheduleConfig, SpecConfig
    from fair_pricing.simulator.trial import run_trial

    settings = get_settings()
    spec = SpecConfig(
        measure=args.measure,
        mode=args.mode or default_mode(args.policy),
        gamma=args.gamma,
        discrepancy=args.discrepancy,
    ).to_spec(args.lam)
    schedule = ScheduleConfig(
        c_trisect=args.c_trisect,
        c_checkpoint=args.c_checkpoint,
        checkpoint_count_scale=args.checkpoint_scale,
        stop_coef=args.stop_coef,
        slack_coef=args.slack_coef,
    ).to_schedule()
    instance = resolve_instance(args.instance, load_catalog(args.catalog) if args.catalog else None)
    if args.noise:
        instance = instance.with_noise(NoiseModel(args.noise, args.sigma))
    seed = settings.FAIRPRICE_SEED if settings.FAIRPRICE_SEED is not None else args.seed

    stem = _stem(args.policy, instance.name, f"lam{args.lam:g}", f"T{args.T}", f"seed{seed}")
    for path in (args.out / f"{stem}.csv", args.out / f"{stem}.json"):
        if path.exists() and not args.force:
            raise ConfigError("output files already exist", [("out", f"{path} exists (use --force to overwrite)")])

    trace = run_trial(instance, spec, args.policy, schedule, args.T, seed, full_trace=args.full_trace)
    paths = trace.write(args.out, stem, force=args.force)
    print_run_summary(trace.summary, paths)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    from fair_pricing.experiments.config import load_sweep_config
    from fair_pricing.experiments.presets import get_preset
    from fair_pricing.experiments.sweep import output_paths, plan_sweep, run_sweep, write_sweep_outputs

    config = get_preset(args.preset) if args.preset else load_sweep_config(args.config)
    if args.dry_run:
        print_plan_table(plan_sweep(config))
        return EXIT_OK

    existing = [p for p in output_paths(config, args.out).values() if p.exists()]
    if existing and not args.force:
        raise ConfigError("output files already exist", [("out", f"{p} exists (use --force to overwrite)") for p in existing])

    result = run_sweep(config, args.workers) if args.quiet else run_live_sweep(config, args.workers)
    paths = write_sweep_outputs(result, args.out, force=args.force)
    print_sweep_result(result, paths)
    failed = [c for c in result.cells if c.error]
    if failed:
        print_error_panel(f"{len(failed)} of {len(result.cells)} cells failed; see the error column of {paths['results']}")
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    from fair_pricing.api.main import solve

    solution = solve(
        args.instance,
        args.lam,
        measure=args.measure,
        discrepancy=args.discrepancy,
        tol=args.tol,
        catalog=args.catalog,
    )
    if args.json:
        print(solution.to_json())
    else:
        print_solution_panel(solution, args.instance)
    return EXIT_OK


def cmd_verify_lb(args: argparse.Namespace) -> int:
    from fair_pricing.demand.lower_bound import verify_lb_properties

    report = verify_lb_properties(args.A, args.h, args.grid_step)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print_lb_report(report)
    return EXIT_OK if report.passed else EXIT_RUNTIME


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "verify-lb": cmd_verify_lb,
}


def main(argv: Optional[list[str]] = None) -> int:
    """Entry point of the CLI."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.log_level)

    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError) as e:
        print_error_panel(str(e))
        return EXIT_USAGE
    except Exception as e:
        logger.debug("Unhandled error", exc_info=True)
        print_error_panel(f"Error during {args.command}: {e}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
