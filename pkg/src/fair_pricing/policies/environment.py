"""Budgeted pricing environment handed to policies."""

from __future__ import annotations

from typing import Protocol

import numpy as np
from numpy.typing import ArrayLike, NDArray

from fair_pricing.demand.market import MarketInstance
from fair_pricing.errors import BudgetExhausted, DomainError

STAGE_I = "I"
STAGE_II = "II"
STAGE_III = "III"


class PeriodRecorder(Protocol):
    def record_block(self, stage: str, prices: NDArray[np.float64], demands: NDArray[np.float64]) -> None: ...


class EnvironmentHandle:
    """Serves realized demands for posted price vectors until the horizon ends.

    A block of ``count`` identical periods is served at once; when fewer
    periods remain, the block is cut short and the served rows returned.
    Posting with no budget left raises BudgetExhausted.
    """

    def __init__(
        self,
        instance: MarketInstance,
        horizon: int,
        rng: np.random.Generator,
        recorder: PeriodRecorder | None = None,
    ) -> None:
        if horizon < 1:
            raise DomainError(f"horizon must be >= 1, got {horizon}")
        self.instance = instance
        self.horizon = int(horizon)
        self.rng = rng
        self.recorder = recorder
        self.remaining = int(horizon)

    @property
    def periods_used(self) -> int:
        return self.horizon - self.remaining

    @property
    def exhausted(self) -> bool:
        return self.remaining == 0

    def post(self, prices: ArrayLike, count: int = 1, stage: str = STAGE_I) -> NDArray[np.float64]:
        """Offer *prices* for *count* periods; returns realized demands, shape (served, N)."""
        if self.remaining == 0:
            raise BudgetExhausted(f"horizon of {self.horizon} periods already consumed")
        vector = np.asarray(prices, dtype=float)
        if vector.shape != (self.instance.n_groups,):
            raise DomainError(f"expected {self.instance.n_groups} prices, got shape {vector.shape}")
        if not self.instance.domain.contains(vector):
            raise DomainError(f"posted prices {vector} outside {self.instance.domain}")
        served = min(int(count), self.remaining)
        if served < 1:
            return np.empty((0, self.instance.n_groups))
        demands = self.instance.noise.sample(self.instance.demands(vector), self.rng, size=served)
        if self.recorder is not None:
            self.recorder.record_block(stage, vector, demands)
        self.remaining -= served
        return demands

    def post_uniform(self, price: float, count: int, stage: str = STAGE_I) -> NDArray[np.float64]:
        return self.post(np.full(self.instance.n_groups, price), count, stage)

    def commit(self, prices: ArrayLike) -> int:
        """Offer *prices* for every remaining period; returns the number served."""
        if self.remaining == 0:
            return 0
        served = self.remaining
        self.post(prices, served, STAGE_III)
        return served
