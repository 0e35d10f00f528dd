"""Named pricing policies and the compatibility rules checked before a trial starts."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from fair_pricing.demand.fairness import ConstraintMode, DiscrepancyKind, FairnessSpec, MeasureKind
from fair_pricing.demand.market import MarketInstance
from fair_pricing.errors import ConfigError
from fair_pricing.oracle.solver import ClairvoyantSolution
from fair_pricing.policies.baselines import run_dpa_same_price, run_etc_same_price, run_trisection_same_price
from fair_pricing.policies.environment import EnvironmentHandle
from fair_pricing.policies.explore import MAX_JOINT_GROUPS
from fair_pricing.policies.graph import get_pipeline
from fair_pricing.policies.schedule import ExplorationSchedule
from fair_pricing.policies.state import StageTwoVariant

logger = logging.getLogger(__name__)

BOTH_MODES = frozenset({ConstraintMode.HARD, ConstraintMode.SOFT})
HARD_ONLY = frozenset({ConstraintMode.HARD})
SOFT_ONLY = frozenset({ConstraintMode.SOFT})
ALL_MEASURES = frozenset(MeasureKind)
PRICE_ONLY = frozenset({MeasureKind.PRICE})


@dataclass
class PolicyContext:
    env: EnvironmentHandle
    spec: FairnessSpec
    schedule: ExplorationSchedule
    solution: ClairvoyantSolution

    @property
    def instance(self) -> MarketInstance:
        return self.env.instance


@dataclass
class PolicyOutcome:
    """What a policy reports back besides the periods it posted."""

    committed_prices: list[float] | None
    sharp_estimates: list[float] | None = None
    checkpoints_completed: int | None = None
    degenerate: bool = False
    stage_periods: dict[str, int] = field(default_factory=dict)


PolicyRunner = Callable[[PolicyContext], PolicyOutcome]


@dataclass(frozen=True)
class PolicyDefinition:
    name: str
    runner: PolicyRunner
    description: str
    modes: frozenset[ConstraintMode] = BOTH_MODES
    measures: frozenset[MeasureKind] = ALL_MEASURES
    min_groups: int = 2
    max_groups: int | None = None
    difference_only: bool = False


def _run_pipeline(ctx: PolicyContext, variant: StageTwoVariant, multi_group: bool) -> PolicyOutcome:
    result = get_pipeline().invoke(
        {
            "env": ctx.env,
            "spec": ctx.spec,
            "schedule": ctx.schedule,
            "variant": variant,
            "multi_group": multi_group,
            "stage_periods": {},
        }
    )
    return PolicyOutcome(
        committed_prices=result.get("committed_prices"),
        sharp_estimates=result.get("sharp_estimates"),
        checkpoints_completed=result.get("checkpoints_completed"),
        degenerate=result.get("degenerate", False),
        stage_periods=dict(result.get("stage_periods", {})),
    )


def _same_price(run: Callable[[EnvironmentHandle, ExplorationSchedule], np.ndarray]) -> PolicyRunner:
    def runner(ctx: PolicyContext) -> PolicyOutcome:
        committed = run(ctx.env, ctx.schedule)
        return PolicyOutcome(committed_prices=[float(p) for p in committed])

    return runner


def _replay(prices: Callable[[ClairvoyantSolution], list[float]]) -> PolicyRunner:
    def runner(ctx: PolicyContext) -> PolicyOutcome:
        committed = prices(ctx.solution)
        ctx.env.commit(committed)
        return PolicyOutcome(committed_prices=list(committed))

    return runner


# ======================================================================
# fdp-dl
# ======================================================================
def run_fdp_dl(ctx: PolicyContext) -> PolicyOutcome:
    """Explore-then-commit under hard price fairness; the window search takes over above two groups."""
    if ctx.instance.n_groups == 2:
        return _run_pipeline(ctx, "price", multi_group=False)
    return _run_pipeline(ctx, "multi", multi_group=True)


# ======================================================================
# fdp-multi
# ======================================================================
def run_fdp_multi(ctx: PolicyContext) -> PolicyOutcome:
    return _run_pipeline(ctx, "multi", multi_group=True)


# ======================================================================
# fdp-gfm / fdp-gfm-multi
# ======================================================================
def run_fdp_gfm(ctx: PolicyContext) -> PolicyOutcome:
    return _run_pipeline(ctx, "general", multi_group=False)


def run_fdp_gfm_multi(ctx: PolicyContext) -> PolicyOutcome:
    return _run_pipeline(ctx, "general", multi_group=True)


# ======================================================================
# fdp-discrepancy
# ======================================================================
def run_fdp_discrepancy(ctx: PolicyContext) -> PolicyOutcome:
    return _run_pipeline(ctx, "discrepancy", multi_group=False)


# ======================================================================
# etc-independent
# ======================================================================
def run_etc_independent(ctx: PolicyContext) -> PolicyOutcome:
    """Same exploration as fdp-gfm, each group committing its own best checkpoint."""
    return _run_pipeline(ctx, "independent", multi_group=ctx.instance.n_groups > 2)


POLICIES: dict[str, PolicyDefinition] = {
    definition.name: definition
    for definition in (
        PolicyDefinition(
            "fdp-dl", run_fdp_dl,
            "three-stage learner under hard price fairness",
            modes=HARD_ONLY, measures=PRICE_ONLY, difference_only=True,
        ),
        PolicyDefinition(
            "fdp-multi", run_fdp_multi,
            "multi-group hard price fairness with clamped checkpoint windows",
            modes=HARD_ONLY, measures=PRICE_ONLY, difference_only=True,
        ),
        PolicyDefinition(
            "fdp-gfm", run_fdp_gfm,
            "two-group learner under a soft constraint on any fairness measure",
            modes=SOFT_ONLY, max_groups=2,
        ),
        PolicyDefinition(
            "fdp-gfm-multi", run_fdp_gfm_multi,
            "joint checkpoint search with pairwise penalties",
            modes=SOFT_ONLY, max_groups=MAX_JOINT_GROUPS,
        ),
        PolicyDefinition(
            "fdp-discrepancy", run_fdp_discrepancy,
            "hard price fairness under a general discrepancy function",
            modes=HARD_ONLY, measures=PRICE_ONLY, max_groups=2,
        ),
        PolicyDefinition(
            "baseline-trisect", _same_price(run_trisection_same_price),
            "shared-price trisection on the summed revenue",
        ),
        PolicyDefinition(
            "baseline-etc", _same_price(run_etc_same_price),
            "shared-price explore-then-commit over T^(1/3) prices",
        ),
        PolicyDefinition(
            "baseline-dpa", _same_price(run_dpa_same_price),
            "shared-price shrinking-grid learner",
        ),
        PolicyDefinition(
            "oracle-replay", _replay(lambda solution: solution.p_star),
            "posts the clairvoyant constrained optimum every period",
        ),
        PolicyDefinition(
            "sharp-replay", _replay(lambda solution: solution.p_sharp),
            "posts the unconstrained optima every period",
        ),
        PolicyDefinition(
            "etc-independent", run_etc_independent,
            "fdp-gfm exploration without any fairness penalty",
            max_groups=None,
        ),
    )
}

POLICY_NAMES: tuple[str, ...] = tuple(POLICIES)


def validate_policy(name: str, instance: MarketInstance, spec: FairnessSpec) -> PolicyDefinition:
    """Look up *name* and check it against the instance and spec; raises ConfigError listing every problem."""
    definition = POLICIES.get(name)
    if definition is None:
        raise ConfigError("unknown policy", [("policy", f"{name!r} is not one of {', '.join(POLICY_NAMES)}")])

    issues: list[tuple[str, str]] = []
    if spec.mode not in definition.modes:
        allowed = "/".join(sorted(m.value for m in definition.modes))
        issues.append(("mode", f"{name} runs in {allowed} mode, got {spec.mode.value}"))
    if spec.measure.kind not in definition.measures:
        issues.append(("measure", f"{name} supports the price measure only, got {spec.measure.kind.value}"))
    if definition.difference_only and spec.discrepancy.kind != DiscrepancyKind.DIFFERENCE:
        issues.append(("discrepancy", f"{name} needs the difference discrepancy, got {spec.discrepancy.kind.value}"))
    n_groups = instance.n_groups
    if n_groups < definition.min_groups:
        issues.append(("instance", f"{name} needs at least {definition.min_groups} groups, got {n_groups}"))
    if definition.max_groups is not None and n_groups > definition.max_groups:
        issues.append(("instance", f"{name} supports at most {definition.max_groups} groups, got {n_groups}"))
    if issues:
        raise ConfigError(f"policy {name} is incompatible with the run configuration", issues)
    return definition


def run_policy(name: str, ctx: PolicyContext) -> PolicyOutcome:
    definition = validate_policy(name, ctx.instance, ctx.spec)
    logger.debug("Running %s on %s for T=%d", name, ctx.instance.name, ctx.env.horizon)
    return definition.runner(ctx)
