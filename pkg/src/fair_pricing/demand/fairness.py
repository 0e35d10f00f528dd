"""Fairness measures, discrepancy functions and FairnessSpec."""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable
from dataclasses import dataclass, replace
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq

from fair_pricing.demand.curves import DemandCurve
from fair_pricing.errors import ConfigError, DomainError, InfeasibleError

MeasureFn = Callable[[NDArray[np.float64], NDArray[np.float64]], NDArray[np.float64]]
DiscrepancyFn = Callable[[NDArray[np.float64], NDArray[np.float64]], NDArray[np.float64]]

# Root-finding tolerance of the numerical discrepancy inverse.
INVERSE_XTOL: float = 1e-12
# Bracket expansion attempts before a custom inverse is declared infeasible.
INVERSE_MAX_EXPANSIONS: int = 60


class MeasureKind(StrEnum):
    PRICE = "price"
    DEMAND = "demand"
    CUSTOM = "custom"


class ConstraintMode(StrEnum):
    HARD = "hard"
    SOFT = "soft"


class DiscrepancyKind(StrEnum):
    DIFFERENCE = "difference"
    LOG_RATIO = "log_ratio"
    CUSTOM = "custom"


@dataclass(frozen=True)
class FairnessMeasure:
    """Quantity M_i(p) whose cross-group gap is constrained.

    The price measure returns the price, the demand measure the expected
    demand (true value) or the realized demand (observation). A custom
    measure applies ``fn(p, demand)`` and is clipped into ``[0, M̄]``.
    ``observation_bound`` defaults to 1 for demand and ``max(1, p̄)``
    otherwise.
    """

    kind: MeasureKind = MeasureKind.PRICE
    observation_bound: float | None = None
    fn: MeasureFn | None = None

    def __post_init__(self) -> None:
        if self.kind == MeasureKind.CUSTOM and self.fn is None:
            raise ConfigError("custom fairness measure needs a function", [("measure.fn", "missing")])
        if self.observation_bound is not None and self.observation_bound < 1:
            raise ConfigError(
                "invalid fairness measure",
                [("measure.observation_bound", f"must be >= 1, got {self.observation_bound}")],
            )

    @classmethod
    def price(cls) -> FairnessMeasure:
        return cls(MeasureKind.PRICE)

    @classmethod
    def demand(cls) -> FairnessMeasure:
        return cls(MeasureKind.DEMAND)

    def bound(self, curve: DemandCurve) -> float:
        if self.observation_bound is not None:
            return self.observation_bound
        if self.kind == MeasureKind.DEMAND:
            return 1.0
        return max(1.0, curve.domain.hi)

    def true_value(self, curve: DemandCurve, p: ArrayLike) -> NDArray[np.float64]:
        """Noise-free measure M_i(p) computed from the true curve."""
        prices = np.asarray(p, dtype=float)
        if self.kind == MeasureKind.PRICE:
            return prices
        demand = np.asarray(curve.demand(prices))
        if self.kind == MeasureKind.DEMAND:
            return demand
        return np.clip(np.asarray(self.fn(prices, demand), dtype=float), 0.0, self.bound(curve))

    def observe(self, curve: DemandCurve, p: ArrayLike, realized: ArrayLike) -> NDArray[np.float64]:
        """Observation revealed after one period at price *p* with demand *realized*."""
        prices = np.asarray(p, dtype=float)
        realized_arr = np.asarray(realized, dtype=float)
        if self.kind == MeasureKind.PRICE:
            return np.broadcast_to(prices, np.broadcast_shapes(prices.shape, realized_arr.shape)).copy()
        if self.kind == MeasureKind.DEMAND:
            return realized_arr
        return np.clip(np.asarray(self.fn(prices, realized_arr), dtype=float), 0.0, self.bound(curve))


def observe_measure(measure: FairnessMeasure, curve: DemandCurve, p, realized_demand):
    """Observation of *measure* for one simulated period."""
    value = measure.observe(curve, p, realized_demand)
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class DiscrepancyFunction:
    """Pairwise discrepancy f(x, y) generalizing the difference x − y.

    ``log_ratio`` is ln((x + ε)/(y + ε)). Custom functions must satisfy
    f(x, x) = 0 and have |f(x, ·)| increasing away from x.
    """

    kind: DiscrepancyKind = DiscrepancyKind.DIFFERENCE
    epsilon: float = 0.0
    lipschitz_bound: float = 1.0
    fn: DiscrepancyFn | None = None

    def __post_init__(self) -> None:
        if self.lipschitz_bound < 1:
            raise ConfigError(
                "invalid discrepancy function",
                [("discrepancy.lipschitz_bound", f"must be >= 1, got {self.lipschitz_bound}")],
            )
        if self.epsilon < 0:
            raise ConfigError(
                "invalid discrepancy function",
                [("discrepancy.epsilon", f"must be >= 0, got {self.epsilon}")],
            )
        if self.kind == DiscrepancyKind.CUSTOM:
            if self.fn is None:
                raise ConfigError("custom discrepancy needs a function", [("discrepancy.fn", "missing")])
            sample = np.array([0.5, 1.0, 2.0, 3.5])
            if np.any(np.abs(np.asarray(self.fn(sample, sample), dtype=float)) > 1e-12):
                raise DomainError("custom discrepancy must satisfy f(x, x) = 0")

    @classmethod
    def difference(cls) -> DiscrepancyFunction:
        return cls(DiscrepancyKind.DIFFERENCE)

    @classmethod
    def log_ratio(cls, epsilon: float = 0.0, lipschitz_bound: float = 1.0) -> DiscrepancyFunction:
        return cls(DiscrepancyKind.LOG_RATIO, epsilon=epsilon, lipschitz_bound=lipschitz_bound)

    def __call__(self, x: ArrayLike, y: ArrayLike) -> NDArray[np.float64]:
        xa = np.asarray(x, dtype=float)
        ya = np.asarray(y, dtype=float)
        if self.kind == DiscrepancyKind.DIFFERENCE:
            return xa - ya
        if self.kind == DiscrepancyKind.LOG_RATIO:
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.log((xa + self.epsilon) / (ya + self.epsilon))
        return np.asarray(self.fn(xa, ya), dtype=float)

    def f_inverse(self, x: float, xi: float, upper: float | None = None) -> float:
        """Return y >= x with |f(x, y)| = xi.

        Closed form for ``difference`` and ``log_ratio``; bracketed Brent
        search otherwise. Raises InfeasibleError when no such y exists (or
        none below *upper* for custom functions).
        """
        if xi < 0:
            raise DomainError(f"discrepancy target must be >= 0, got {xi}")
        if xi == 0:
            return float(x)
        if self.kind == DiscrepancyKind.DIFFERENCE:
            return float(x + xi)
        if self.kind == DiscrepancyKind.LOG_RATIO:
            base = x + self.epsilon
            if base <= 0:
                raise InfeasibleError(f"log-ratio inverse undefined at x={x} with epsilon={self.epsilon}")
            return float(base * math.exp(xi) - self.epsilon)
        return self._numeric_inverse(x, xi, upper)

    def f_inverse_array(self, xs: ArrayLike, xi: float, upper: float | None = None) -> NDArray[np.float64]:
        """Vectorized f_inverse; infeasible entries are NaN."""
        arr = np.asarray(xs, dtype=float)
        if xi == 0:
            return arr.copy()
        if self.kind == DiscrepancyKind.DIFFERENCE:
            return arr + xi
        if self.kind == DiscrepancyKind.LOG_RATIO:
            base = arr + self.epsilon
            return np.where(base > 0, base * math.exp(xi) - self.epsilon, np.nan)
        out = np.empty_like(arr)
        for idx, x in np.ndenumerate(arr):
            try:
                out[idx] = self._numeric_inverse(float(x), xi, upper)
            except InfeasibleError:
                out[idx] = np.nan
        return out

    def _numeric_inverse(self, x: float, xi: float, upper: float | None) -> float:
        def excess(y: float) -> float:
            return abs(float(self(x, y))) - xi

        step = max(1e-3, abs(x) * 1e-3)
        hi = x + step
        for _ in range(INVERSE_MAX_EXPANSIONS):
            if upper is not None and hi > upper:
                hi = upper
            if excess(hi) >= 0:
                return float(brentq(excess, x, hi, xtol=INVERSE_XTOL))
            if upper is not None and hi >= upper:
                break
            step *= 2.0
            hi = x + step
        raise InfeasibleError(f"no y >= {x} with |f(x, y)| = {xi}")


@dataclass(frozen=True)
class FairnessSpec:
    """Fairness level λ, measure, hard/soft mode and soft penalty weight γ."""

    measure: FairnessMeasure = FairnessMeasure()
    lam: float = 1.0
    mode: ConstraintMode = ConstraintMode.HARD
    gamma: float = 1.0
    discrepancy: DiscrepancyFunction = DiscrepancyFunction()

    def __post_init__(self) -> None:
        issues: list[tuple[str, str]] = []
        if not (0.0 <= self.lam <= 1.0) or math.isnan(self.lam):
            issues.append(("lambda", f"must lie in [0, 1], got {self.lam}"))
        if self.gamma < 0 or not math.isfinite(self.gamma):
            issues.append(("gamma", f"must be finite and >= 0, got {self.gamma}"))
        if issues:
            raise ConfigError("invalid fairness spec", issues)

    def with_lambda(self, lam: float) -> FairnessSpec:
        return replace(self, lam=lam)

    def pairwise_gaps(self, values: ArrayLike) -> NDArray[np.float64]:
        """|f(M_i, M_j)| for every pair i < j along the last axis."""
        arr = np.asarray(values, dtype=float)
        n = arr.shape[-1]
        gaps = [np.abs(self.discrepancy(arr[..., i], arr[..., j])) for i, j in itertools.combinations(range(n), 2)]
        return np.stack(gaps, axis=-1)

    def max_gap(self, values: ArrayLike) -> NDArray[np.float64]:
        return self.pairwise_gaps(values).max(axis=-1)
