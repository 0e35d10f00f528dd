import logging
from typing import Any, Literal

from fair_pricing.policies.environment import STAGE_I, STAGE_II, STAGE_III, EnvironmentHandle
from fair_pricing.policies.explore import (
    StageTwoResult,
    explore_constrained_discrepancy,
    explore_constrained_general,
    explore_constrained_multi,
    explore_constrained_price,
    explore_unconstrained,
)
from fair_pricing.policies.state import PipelineState

logger = logging.getLogger(__name__)


def explore_unconstrained_node(state: PipelineState) -> dict[str, Any]:
    """
    Stage I: estimate every group's unconstrained optimum in index order.

    Args:
        state: Current pipeline state.

    Returns:
        Updates with the p♯ estimates and the Stage-I period count.
    """
    env: EnvironmentHandle = state["env"]
    schedule = state["schedule"]
    multi_group = state.get("multi_group", False)
    before = env.periods_used

    estimates = [
        explore_unconstrained(env, z, schedule, multi_group=multi_group)
        for z in range(env.instance.n_groups)
    ]
    used = env.periods_used - before
    logger.debug("Stage I used %d periods; estimates %s", used, estimates)
    return {"sharp_estimates": estimates, "stage_periods": {STAGE_I: used}}


def _run_stage_two(state: PipelineState) -> StageTwoResult:
    env: EnvironmentHandle = state["env"]
    spec = state["spec"]
    schedule = state["schedule"]
    estimates = state["sharp_estimates"]
    multi_group = state.get("multi_group", False)
    variant = state.get("variant", "price")

    if variant == "price":
        return explore_constrained_price(env, estimates, spec.lam, schedule)
    if variant == "multi":
        return explore_constrained_multi(env, estimates, spec.lam, schedule, multi_group=multi_group)
    if variant == "discrepancy":
        return explore_constrained_discrepancy(env, estimates, spec, schedule)
    return explore_constrained_general(
        env, estimates, spec, schedule,
        multi_group=multi_group,
        independent=variant == "independent",
    )


def explore_constrained_node(state: PipelineState) -> dict[str, Any]:
    """Stage II: pick the prices to commit with the variant's checkpoint search."""
    env: EnvironmentHandle = state["env"]
    before = env.periods_used
    result = _run_stage_two(state)
    used = env.periods_used - before
    logger.debug(
        "Stage II (%s) used %d periods over %d checkpoints; committing %s",
        state.get("variant", "price"), used, result.completed, result.prices,
    )
    return {
        "committed_prices": [float(p) for p in result.prices],
        "checkpoints_completed": result.completed,
        "degenerate": result.degenerate,
        "stage_periods": {STAGE_II: used},
    }


def commit_node(state: PipelineState) -> dict[str, Any]:
    """Stage III: offer the committed prices for every remaining period."""
    env: EnvironmentHandle = state["env"]
    served = env.commit(state["committed_prices"])
    return {"stage_periods": {STAGE_III: served}}


def has_budget_after_stage_one(state: PipelineState) -> Literal["explore_constrained", "__end__"]:
    if state["env"].exhausted:
        return "__end__"
    return "explore_constrained"


def has_budget_after_stage_two(state: PipelineState) -> Literal["commit", "__end__"]:
    if state["env"].exhausted:
        return "__end__"
    return "commit"
