from typing import Annotated, Any, Literal, Optional

from typing_extensions import TypedDict

StageTwoVariant = Literal["price", "multi", "general", "discrepancy", "independent"]


def stage_periods_reducer(current: dict[str, int], new: dict[str, int]) -> dict[str, int]:
    """Accumulate per-stage period counts across pipeline nodes."""
    if not current:
        current = {}
    if not new:
        return current
    merged = dict(current)
    for stage, periods in new.items():
        merged[stage] = merged.get(stage, 0) + periods
    return merged


class PipelineState(TypedDict, total=False):
    """State of one explore-then-commit run.

    ``env``, ``spec`` and ``schedule`` are inputs; the remaining keys are
    written by the stage nodes.
    """

    env: Any
    spec: Any
    schedule: Any
    variant: StageTwoVariant
    multi_group: bool

    sharp_estimates: list[float]
    committed_prices: Optional[list[float]]
    checkpoints_completed: int
    degenerate: bool

    stage_periods: Annotated[dict[str, int], stage_periods_reducer]
