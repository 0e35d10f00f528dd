from __future__ import annotations

import logging
import math

import numpy as np

from fair_pricing.demand.fairness import FairnessSpec
from fair_pricing.demand.market import MarketInstance
from fair_pricing.errors import DomainError, FairPricingError
from fair_pricing.oracle.solver import solve_clairvoyant
from fair_pricing.policies.environment import EnvironmentHandle
from fair_pricing.policies.registry import PolicyContext, validate_policy
from fair_pricing.policies.schedule import ExplorationSchedule
from fair_pricing.settings import get_settings
from fair_pricing.simulator.trace import TraceRecorder, TrialSummary, TrialTrace, config_fingerprint

logger = logging.getLogger(__name__)


def run_trial(
    instance: MarketInstance,
    spec: FairnessSpec,
    policy: str,
    schedule: ExplorationSchedule,
    T: int,
    seed: int,
    *,
    full_trace: bool = False,
    sample_every: int | None = None,
    tol: float | None = None,
) -> TrialTrace:
    """
    Run one policy for exactly T periods and account for every period.

    Args:
        instance: Market the policy prices in.
        spec: Fairness level, measure and mode; also the regret benchmark.
        policy: Registered policy name.
        schedule: Exploration sample-count knobs.
        T: Horizon length.
        seed: Seed of the trial's demand noise.
        full_trace: Keep a row for every period instead of a sample.
        sample_every: Sampling stride; defaults to Settings.TRACE_SAMPLE_EVERY.
        tol: Oracle tolerance; defaults to Settings.ORACLE_TOL.

    Returns:
        The TrialTrace with summary, segments and stored rows.
    """
    settings = get_settings()
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    if seed < 0:
        raise DomainError(f"seed must be >= 0, got {seed}")
    definition = validate_policy(policy, instance, spec)

    solution = solve_clairvoyant(instance, spec, tol)
    recorder = TraceRecorder(
        instance,
        spec,
        solution,
        sample_every=sample_every or settings.TRACE_SAMPLE_EVERY,
        full_trace=full_trace,
        slack=settings.FEASIBILITY_SLACK,
    )
    env = EnvironmentHandle(instance, T, np.random.default_rng(seed), recorder)
    outcome = definition.runner(PolicyContext(env=env, spec=spec, schedule=schedule, solution=solution))
    if env.remaining:
        raise FairPricingError(f"policy {policy} stopped with {env.remaining} of {T} periods unserved")

    regret = recorder.cumulative_regret()
    fingerprint = config_fingerprint(
        {
            "instance": instance.name,
            "policy": policy,
            "lambda": spec.lam,
            "gamma": spec.gamma,
            "mode": spec.mode.value,
            "measure": spec.measure.kind.value,
            "discrepancy": spec.discrepancy.kind.value,
            "schedule": schedule.to_dict(),
            "T": T,
            "seed": seed,
        }
    )
    summary = TrialSummary(
        policy=policy,
        instance=instance.name,
        lam=spec.lam,
        gamma=spec.gamma,
        mode=spec.mode.value,
        measure=spec.measure.kind.value,
        T=T,
        seed=seed,
        regret=regret,
        penalized_regret=regret + recorder.cumulative_penalty(),
        violation_periods=recorder.violation_periods(),
        committed_prices=outcome.committed_prices,
        sharp_estimates=outcome.sharp_estimates,
        stage_periods=recorder.stage_periods(),
        degenerate=outcome.degenerate,
        realized_revenue=math.fsum(s.realized_revenue for s in recorder.segments),
        fingerprint=fingerprint,
    )
    logger.debug(
        "Trial %s seed=%d T=%d: regret=%.6g penalized=%.6g violations=%d",
        policy, seed, T, summary.regret, summary.penalized_regret, summary.violation_periods,
    )
    return TrialTrace(summary=summary, segments=recorder.segments, rows=recorder.rows, solution=solution)
