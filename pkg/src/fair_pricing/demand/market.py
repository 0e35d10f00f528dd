"""Market instances: N group demand curves plus a realized-demand noise model."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from fair_pricing.demand.curves import DemandCurve, PriceInterval
from fair_pricing.errors import DomainError


class NoiseKind(StrEnum):
    BERNOULLI = "bernoulli"
    TRUNCATED_ADDITIVE = "truncated_additive"
    DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class NoiseModel:
    """Distribution of realized demand around its expectation d(p).

    ``truncated_additive`` adds N(0, sigma²) noise and clips into [0, 1],
    which biases the mean near d = 0 and d = 1. ``deterministic`` returns
    d(p) itself and exists for noise-off diagnostics.
    """

    kind: NoiseKind = NoiseKind.BERNOULLI
    sigma: float = 0.0

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise DomainError(f"noise sigma must be >= 0, got {self.sigma}")

    def sample(
        self,
        mean: ArrayLike,
        rng: np.random.Generator,
        size: int | None = None,
    ) -> NDArray[np.float64]:
        """Draw realized demands with expectation *mean*.

        With *size* the result has shape ``(size, *mean.shape)``.
        """
        mu = np.asarray(mean, dtype=float)
        shape = mu.shape if size is None else (size, *mu.shape)
        if self.kind == NoiseKind.BERNOULLI:
            return (rng.random(shape) < mu).astype(float)
        if self.kind == NoiseKind.TRUNCATED_ADDITIVE:
            return np.clip(mu + self.sigma * rng.standard_normal(shape), 0.0, 1.0)
        return np.broadcast_to(mu, shape).astype(float)


@dataclass(frozen=True)
class MarketInstance:
    """One pricing environment: ordered group curves sharing domain and cost."""

    curves: tuple[DemandCurve, ...]
    noise: NoiseModel = NoiseModel()
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if len(self.curves) < 2:
            raise DomainError(f"a market instance needs at least 2 groups, got {len(self.curves)}")
        first = self.curves[0]
        for idx, curve in enumerate(self.curves[1:], start=2):
            if curve.domain != first.domain:
                raise DomainError(f"group {idx} domain {curve.domain} differs from group 1 {first.domain}")
            if curve.cost != first.cost:
                raise DomainError(f"group {idx} cost {curve.cost} differs from group 1 {first.cost}")

    @property
    def n_groups(self) -> int:
        return len(self.curves)

    @property
    def domain(self) -> PriceInterval:
        return self.curves[0].domain

    @property
    def cost(self) -> float:
        return self.curves[0].cost

    @property
    def regular(self) -> bool:
        return all(curve.regular for curve in self.curves)

    def with_noise(self, noise: NoiseModel) -> MarketInstance:
        return replace(self, noise=noise)

    def demands(self, prices: ArrayLike) -> NDArray[np.float64]:
        """Expected demands for price vectors along the last axis."""
        arr = np.asarray(prices, dtype=float)
        return np.stack(
            [np.asarray(curve.demand(arr[..., i])) for i, curve in enumerate(self.curves)],
            axis=-1,
        )

    def revenues(self, prices: ArrayLike) -> NDArray[np.float64]:
        arr = np.asarray(prices, dtype=float)
        return (arr - self.cost) * self.demands(arr)

    def total_revenue(self, prices: ArrayLike) -> NDArray[np.float64] | float:
        total = self.revenues(prices).sum(axis=-1)
        return float(total) if np.ndim(total) == 0 else total


def sample_demand(
    curve: DemandCurve,
    p: float,
    rng: np.random.Generator,
    noise: NoiseModel | None = None,
    size: int | None = None,
):
    """Realized demand at price *p*; deterministic given the generator state."""
    values = (noise or NoiseModel()).sample(curve.demand(p), rng, size=size)
    return float(values) if values.ndim == 0 else values
