from __future__ import annotations

import logging
import math
from collections.abc import Iterable

import numpy as np
from pydantic import BaseModel, Field
from scipy import stats

from fair_pricing.errors import ConfigError

logger = logging.getLogger(__name__)

MIN_FIT_POINTS: int = 3


class SlopeFit(BaseModel):
    """OLS fit of ln(mean regret) against ln T."""

    slope: float
    intercept: float
    r_squared: float = Field(ge=0.0, le=1.0)
    points: list[tuple[float, float]]
    dropped: list[tuple[int, float]] = Field(default_factory=list)


def fit_slope(points: Iterable[tuple[float, float]]) -> SlopeFit:
    """
    Fit ln(regret) = intercept + slope · ln(T).

    Args:
        points: (T, mean regret) pairs.

    Returns:
        The fit over the log-transformed points; pairs with non-positive
        regret are dropped and listed in ``dropped``.

    Raises:
        ConfigError: fewer than three usable points remain.
    """
    kept: list[tuple[float, float]] = []
    dropped: list[tuple[int, float]] = []
    for T, regret in points:
        if regret > 0 and T > 0 and math.isfinite(regret):
            kept.append((math.log(T), math.log(regret)))
        else:
            dropped.append((int(T), float(regret)))
    if dropped:
        logger.warning("Dropped %d non-positive regret point(s) from slope fit: %s", len(dropped), dropped)
    if len(kept) < MIN_FIT_POINTS:
        raise ConfigError(
            "not enough points for a slope fit",
            [("points", f"need at least {MIN_FIT_POINTS} positive points, got {len(kept)}")],
        )

    x, y = np.array(kept).T
    result = stats.linregress(x, y)
    r_squared = float(np.clip(result.rvalue**2, 0.0, 1.0)) if math.isfinite(result.rvalue) else 1.0
    return SlopeFit(
        slope=float(result.slope),
        intercept=float(result.intercept),
        r_squared=r_squared,
        points=kept,
        dropped=dropped,
    )
