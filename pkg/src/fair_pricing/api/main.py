"""Public API for fairness-aware pricing simulations."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from fair_pricing.demand.catalog import load_catalog, resolve_instance
from fair_pricing.demand.fairness import ConstraintMode
from fair_pricing.demand.market import MarketInstance
from fair_pricing.experiments.config import ScheduleConfig, SpecConfig, SweepConfig, load_sweep_config
from fair_pricing.experiments.presets import get_preset
from fair_pricing.experiments.sweep import SweepResult, run_sweep
from fair_pricing.oracle.solver import ClairvoyantSolution, solve_clairvoyant
from fair_pricing.policies.registry import POLICIES
from fair_pricing.policies.schedule import ExplorationSchedule
from fair_pricing.settings import get_settings, reset_settings_cache
from fair_pricing.simulator.trace import TrialTrace
from fair_pricing.simulator.trial import run_trial


def _instance(instance: Union[str, MarketInstance], catalog: Optional[Path]) -> MarketInstance:
    if isinstance(instance, MarketInstance):
        return instance
    return resolve_instance(instance, load_catalog(catalog) if catalog else None)


def default_mode(policy: str) -> str:
    """Soft for policies that only run soft, hard otherwise."""
    definition = POLICIES.get(policy)
    if definition is not None and ConstraintMode.HARD not in definition.modes:
        return ConstraintMode.SOFT.value
    return ConstraintMode.HARD.value


def simulate(
    instance: Union[str, MarketInstance],
    policy: str,
    lam: float,
    T: int,
    seed: Optional[int] = None,
    gamma: float = 1.0,
    measure: str = "price",
    mode: Optional[str] = None,
    discrepancy: str = "difference",
    schedule: Optional[Union[ExplorationSchedule, dict]] = None,
    full_trace: bool = False,
    catalog: Optional[Path] = None,
) -> TrialTrace:
    """
    Run one seeded trial of a pricing policy.

    Args:
        instance: Built-in or catalog instance name, or a MarketInstance.
        policy: Registered policy name, e.g. "fdp-dl".
        lam: Fairness level λ in [0, 1].
        T: Horizon length.
        seed: Noise seed; Settings.FAIRPRICE_SEED wins when set, 0 when neither is given.
        gamma: Soft-penalty weight.
        measure: "price" or "demand".
        mode: "hard" or "soft"; defaults to what the policy runs.
        discrepancy: "difference" or "log_ratio".
        schedule: ExplorationSchedule or a dict of its fields.
        full_trace: Keep a row for every period.
        catalog: Optional YAML instance catalog.

    Returns:
        The TrialTrace of the run.

    Example:
        >>> from fair_pricing import simulate
        >>> trace = simulate("exp-paper", "fdp-dl", lam=0.5, T=20_000, seed=1,
        ...                  schedule={"c_trisect": 1.5e-5, "c_checkpoint": 0.05, "slack_coef": 10.0})
        >>> trace.summary.stage_periods
        {'I': ..., 'II': ..., 'III': ...}
    """
    settings = get_settings()
    try:
        if settings.FAIRPRICE_SEED is not None:
            seed = settings.FAIRPRICE_SEED
        spec = SpecConfig(
            measure=measure,
            mode=mode or default_mode(policy),
            gamma=gamma,
            discrepancy=discrepancy,
        ).to_spec(lam)
        if schedule is None or isinstance(schedule, dict):
            schedule = ScheduleConfig(**(schedule or {})).to_schedule()
        return run_trial(
            _instance(instance, catalog), spec, policy, schedule, T, seed or 0, full_trace=full_trace,
        )
    finally:
        reset_settings_cache()


def sweep(
    config: Union[SweepConfig, str, Path],
    workers: Optional[int] = None,
    show_progress: bool = False,
) -> SweepResult:
    """
    Run a sweep from a SweepConfig, a preset name or a YAML file path.

    Args:
        config: The sweep to run.
        workers: Worker processes; defaults to Settings.WORKERS.
        show_progress: If True, show a live cell table.

    Returns:
        The SweepResult; write it with ``write_sweep_outputs``.
    """
    if not isinstance(config, SweepConfig):
        path = Path(config)
        config = load_sweep_config(path) if path.suffix in {".yaml", ".yml"} or path.exists() else get_preset(str(config))
    try:
        if show_progress:
            return _run_with_progress(config, workers)
        return run_sweep(config, workers)
    finally:
        reset_settings_cache()


def solve(
    instance: Union[str, MarketInstance],
    lam: float,
    measure: str = "price",
    discrepancy: str = "difference",
    tol: Optional[float] = None,
    catalog: Optional[Path] = None,
) -> ClairvoyantSolution:
    """Clairvoyant unconstrained and constrained optima for one λ."""
    spec = SpecConfig(measure=measure, discrepancy=discrepancy).to_spec(lam)
    return solve_clairvoyant(_instance(instance, catalog), spec, tol)


def _run_with_progress(config: SweepConfig, workers: Optional[int]) -> SweepResult:
    """Run a sweep with a Rich live cell table.

    Imports from ``fair_pricing.cli`` are deferred so that Rich is only
    required when the caller explicitly requests progress output.
    """
    from fair_pricing.cli import print_sweep_result, run_live_sweep

    result = run_live_sweep(config, workers)
    print_sweep_result(result)
    return result
