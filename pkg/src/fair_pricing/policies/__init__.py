from fair_pricing.policies.baselines import run_dpa_same_price, run_etc_same_price, run_trisection_same_price
from fair_pricing.policies.environment import STAGE_I, STAGE_II, STAGE_III, EnvironmentHandle
from fair_pricing.policies.explore import (
    StageTwoResult,
    explore_constrained_discrepancy,
    explore_constrained_general,
    explore_constrained_multi,
    explore_constrained_price,
    explore_unconstrained,
)
from fair_pricing.policies.graph import create_graph, get_pipeline
from fair_pricing.policies.registry import (
    POLICIES,
    POLICY_NAMES,
    PolicyContext,
    PolicyDefinition,
    PolicyOutcome,
    run_policy,
    validate_policy,
)
from fair_pricing.policies.schedule import ExplorationSchedule
from fair_pricing.policies.state import PipelineState

__all__ = [
    "POLICIES",
    "POLICY_NAMES",
    "STAGE_I",
    "STAGE_II",
    "STAGE_III",
    "EnvironmentHandle",
    "ExplorationSchedule",
    "PipelineState",
    "PolicyContext",
    "PolicyDefinition",
    "PolicyOutcome",
    "StageTwoResult",
    "create_graph",
    "explore_constrained_discrepancy",
    "explore_constrained_general",
    "explore_constrained_multi",
    "explore_constrained_price",
    "explore_unconstrained",
    "get_pipeline",
    "run_dpa_same_price",
    "run_etc_same_price",
    "run_policy",
    "run_trisection_same_price",
    "validate_policy",
]
