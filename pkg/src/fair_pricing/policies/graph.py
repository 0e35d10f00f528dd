from functools import lru_cache

from langgraph.graph import END, StateGraph

from fair_pricing.policies.nodes import (
    commit_node,
    explore_constrained_node,
    explore_unconstrained_node,
    has_budget_after_stage_one,
    has_budget_after_stage_two,
)
from fair_pricing.policies.state import PipelineState


def create_graph():
    """
    Create the three-stage explore-then-commit pipeline.

    Returns:
        The compiled graph ready to execute.
    """
    graph = StateGraph(PipelineState)

    graph.add_node("explore_unconstrained", explore_unconstrained_node)
    graph.add_node("explore_constrained", explore_constrained_node)
    graph.add_node("commit", commit_node)

    graph.set_entry_point("explore_unconstrained")

    graph.add_conditional_edges(
        "explore_unconstrained",
        has_budget_after_stage_one,
        {
            "explore_constrained": "explore_constrained",
            "__end__": END,
        },
    )

    graph.add_conditional_edges(
        "explore_constrained",
        has_budget_after_stage_two,
        {
            "commit": "commit",
            "__end__": END,
        },
    )

    graph.add_edge("commit", END)

    return graph.compile()


@lru_cache(maxsize=1)
def get_pipeline():
    """Compiled pipeline shared by every trial in the process."""
    return create_graph()
