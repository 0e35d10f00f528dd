"""Expected-demand curves, their revenue functions and regularity checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import StrEnum
from typing import overload

import numpy as np
from numpy.typing import ArrayLike, NDArray

from fair_pricing.errors import DomainError

# Prices this close outside the interval are treated as on the boundary.
DOMAIN_TOL: float = 1e-12


class DemandKind(StrEnum):
    LINEAR = "linear"
    EXPONENTIAL = "exponential"
    INVERSE_PROPORTIONAL = "inverse_proportional"
    LOWER_BOUND_PROFILE = "lower_bound_profile"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class PriceInterval:
    """The known feasible price range ``[lo, hi]``."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DomainError(f"price interval bounds must be finite, got [{self.lo}, {self.hi}]")
        if self.lo < 0:
            raise DomainError(f"price interval must be non-negative, got lo={self.lo}")
        if not self.lo < self.hi:
            raise DomainError(f"price interval needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, p: ArrayLike) -> bool:
        arr = np.asarray(p, dtype=float)
        return bool(np.all((arr >= self.lo - DOMAIN_TOL) & (arr <= self.hi + DOMAIN_TOL)))

    def clip(self, p: ArrayLike) -> NDArray[np.float64]:
        return np.clip(np.asarray(p, dtype=float), self.lo, self.hi)

    def grid(self, step: float) -> NDArray[np.float64]:
        """Equally spaced grid from lo to hi (both included) with spacing close to *step*."""
        if step <= 0:
            raise DomainError(f"grid step must be positive, got {step}")
        n = max(2, int(round(self.width / step)) + 1)
        return np.linspace(self.lo, self.hi, n)


# ----------------------------------------------------------------------
# Lower-bound revenue profiles
# ----------------------------------------------------------------------


def lower_bound_breakpoints(h: float) -> tuple[float, float]:
    """Breakpoints of the piecewise R2 profile: 1 + 5√h/4 and 1 + 7√h/4."""
    root = math.sqrt(h)
    return 1.0 + 5.0 * root / 4.0, 1.0 + 7.0 * root / 4.0


def _r1(p: NDArray[np.float64], A: float, h: float) -> NDArray[np.float64]:
    return 0.25 - (p - 1.0 - math.sqrt(h) / 4.0) ** 2 / A


def _r2_first(p: NDArray[np.float64], A: float, h: float) -> NDArray[np.float64]:
    return 0.25 - (p - 1.0 + math.sqrt(h) / 4.0) ** 2 / (2.0 * A)


def _r2_middle(p: NDArray[np.float64], A: float, h: float) -> NDArray[np.float64]:
    return 0.25 - 3.0 * (p - 1.0 - 3.0 * math.sqrt(h) / 4.0) ** 2 / (2.0 * A) - 3.0 * h / (4.0 * A)


def _r3(p: NDArray[np.float64], A: float, h: float) -> NDArray[np.float64]:
    return 0.125 - (p - 2.0) ** 2 / A


# The three pieces of R2 in price order; the last piece coincides with R1.
R2_PIECES = (_r2_first, _r2_middle, _r1)


def lower_bound_revenue(which: int, p: ArrayLike, A: float, h: float) -> NDArray[np.float64]:
    """Revenue profile R_which(p) of the hard instances (c = 0, domain [1, 2])."""
    arr = np.asarray(p, dtype=float)
    if which == 1:
        return _r1(arr, A, h)
    if which == 3:
        return _r3(arr, A, h)
    if which == 2:
        b1, b2 = lower_bound_breakpoints(h)
        return np.select(
            [arr < b1, arr < b2],
            [_r2_first(arr, A, h), _r2_middle(arr, A, h)],
            default=_r1(arr, A, h),
        )
    raise DomainError(f"lower-bound profile must be 1, 2 or 3, got {which}")


# ----------------------------------------------------------------------
# Demand curves
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class DemandCurve:
    """Expected demand d(p) of one customer group on a price interval.

    ``params`` holds the kind-specific parameters:

    - linear: ``(slope, intercept)`` with d = intercept + slope·p
    - exponential: ``(scale, rate)`` with d = scale·exp(rate·(1 − p))
    - inverse_proportional: ``(numerator,)`` with d = numerator/p − 1
    - lower_bound_profile: ``(which, A, h)`` with d = R_which(p)/p
    - tabulated: unused, the table lives in ``table``

    Every kind is clamped into [0, 1].
    """

    kind: DemandKind
    domain: PriceInterval
    params: tuple[float, ...] = ()
    cost: float = 0.0
    table: tuple[tuple[float, float], ...] = ()
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.cost < 0 or not math.isfinite(self.cost):
            raise DomainError(f"marginal cost must be finite and >= 0, got {self.cost}")
        expected = {
            DemandKind.LINEAR: 2,
            DemandKind.EXPONENTIAL: 2,
            DemandKind.INVERSE_PROPORTIONAL: 1,
            DemandKind.LOWER_BOUND_PROFILE: 3,
            DemandKind.TABULATED: 0,
        }[self.kind]
        if len(self.params) != expected:
            raise DomainError(
                f"{self.kind} curve needs {expected} parameters, got {len(self.params)}"
            )
        if self.kind == DemandKind.TABULATED:
            self._validate_table()
        if self.kind == DemandKind.LOWER_BOUND_PROFILE and int(self.params[0]) not in (1, 2, 3):
            raise DomainError(f"lower-bound profile must be 1, 2 or 3, got {self.params[0]}")

    def _validate_table(self) -> None:
        if len(self.table) < 2:
            raise DomainError("tabulated curve needs at least two (p, d) points")
        xs = np.array([pt[0] for pt in self.table])
        ys = np.array([pt[1] for pt in self.table])
        if np.any(np.diff(xs) <= 0):
            raise DomainError("tabulated prices must be strictly increasing")
        if np.any(ys < 0) or np.any(ys > 1):
            raise DomainError("tabulated demands must lie in [0, 1]")
        if not (math.isclose(xs[0], self.domain.lo) and math.isclose(xs[-1], self.domain.hi)):
            raise DomainError("tabulated grid must span exactly the curve's domain")

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def linear(
        cls, slope: float, intercept: float, domain: PriceInterval, cost: float = 0.0, label: str = ""
    ) -> DemandCurve:
        return cls(DemandKind.LINEAR, domain, (float(slope), float(intercept)), cost, label=label)

    @classmethod
    def exponential(
        cls, scale: float, rate: float, domain: PriceInterval, cost: float = 0.0, label: str = ""
    ) -> DemandCurve:
        if scale <= 0 or rate <= 0:
            raise DomainError("exponential curve needs scale > 0 and rate > 0")
        return cls(DemandKind.EXPONENTIAL, domain, (float(scale), float(rate)), cost, label=label)

    @classmethod
    def inverse_proportional(
        cls, numerator: float, domain: PriceInterval, cost: float = 0.0, label: str = ""
    ) -> DemandCurve:
        if numerator <= 0:
            raise DomainError("inverse-proportional curve needs numerator > 0")
        return cls(DemandKind.INVERSE_PROPORTIONAL, domain, (float(numerator),), cost, label=label)

    @classmethod
    def lower_bound_profile(cls, which: int, A: float, h: float, label: str = "") -> DemandCurve:
        return cls(
            DemandKind.LOWER_BOUND_PROFILE,
            PriceInterval(1.0, 2.0),
            (float(which), float(A), float(h)),
            0.0,
            label=label or f"d{which}",
        )

    @classmethod
    def tabulated(
        cls, points: list[tuple[float, float]], cost: float = 0.0, label: str = ""
    ) -> DemandCurve:
        table = tuple((float(p), float(d)) for p, d in points)
        if not table:
            raise DomainError("tabulated curve needs at least two (p, d) points")
        domain = PriceInterval(table[0][0], table[-1][0])
        return cls(DemandKind.TABULATED, domain, (), cost, table=table, label=label)

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    @property
    def regular(self) -> bool:
        """Whether the curve is expected to satisfy the regularity assumptions.

        Inverse-proportional curves have piecewise-linear revenue and are
        flagged nonregular; tabulated curves are regular only when the table
        is strictly decreasing.
        """
        if self.kind == DemandKind.INVERSE_PROPORTIONAL:
            return False
        if self.kind == DemandKind.TABULATED:
            ys = np.array([pt[1] for pt in self.table])
            return bool(np.all(np.diff(ys) < 0))
        return True

    @overload
    def demand(self, p: float) -> float: ...

    @overload
    def demand(self, p: NDArray[np.float64]) -> NDArray[np.float64]: ...

    def demand(self, p):
        arr = np.asarray(p, dtype=float)
        if not self.domain.contains(arr):
            raise DomainError(
                f"price outside domain [{self.domain.lo}, {self.domain.hi}]: "
                f"{arr if arr.ndim == 0 else (arr.min(), arr.max())}"
            )
        arr = self.domain.clip(arr)
        values = np.clip(self._raw_demand(arr), 0.0, 1.0)
        return float(values) if values.ndim == 0 else values

    def revenue(self, p):
        arr = np.asarray(p, dtype=float)
        values = (arr - self.cost) * np.asarray(self.demand(arr))
        return float(values) if np.ndim(values) == 0 else values

    def _raw_demand(self, p: NDArray[np.float64]) -> NDArray[np.float64]:
        kind = self.kind
        if kind == DemandKind.LINEAR:
            slope, intercept = self.params
            return intercept + slope * p
        if kind == DemandKind.EXPONENTIAL:
            scale, rate = self.params
            return scale * np.exp(rate * (1.0 - p))
        if kind == DemandKind.INVERSE_PROPORTIONAL:
            (numerator,) = self.params
            with np.errstate(divide="ignore"):
                ratio = np.where(p > 0, numerator / np.where(p > 0, p, 1.0), np.inf)
            return ratio - 1.0
        if kind == DemandKind.LOWER_BOUND_PROFILE:
            which, A, h = self.params
            return lower_bound_revenue(int(which), p, A, h) / p
        xs = np.array([pt[0] for pt in self.table])
        ys = np.array([pt[1] for pt in self.table])
        return np.interp(p, xs, ys)


def eval_demand(curve: DemandCurve, p):
    """Expected demand d(p); raises DomainError outside the curve's domain."""
    return curve.demand(p)


def eval_revenue(curve: DemandCurve, p):
    """Expected single-period revenue (p − c)·d(p)."""
    return curve.revenue(p)


# ----------------------------------------------------------------------
# Regularity
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class RegularityReport:
    monotone: bool
    lipschitz: bool
    max_abs_slope: float

    @property
    def passed(self) -> bool:
        return self.monotone and self.lipschitz


def check_regularity(curve: DemandCurve, K: float = 1.0, grid_step: float = 1e-4) -> RegularityReport:
    """Check strict decrease and the Lipschitz bound K on a dense grid.

    Saturated stretches (d == 0 or d == 1) are excluded from the strict
    monotonicity test; the Lipschitz bound covers the whole grid.
    """
    grid = curve.domain.grid(grid_step)
    d = np.asarray(curve.demand(grid))
    dd = np.diff(d)
    dp = np.diff(grid)
    interior = (d[:-1] > 0.0) & (d[:-1] < 1.0) & (d[1:] > 0.0) & (d[1:] < 1.0)
    monotone = bool(np.all(dd[interior] < 0.0))
    slopes = np.abs(dd) / dp
    max_slope = float(slopes.max()) if slopes.size else 0.0
    return RegularityReport(
        monotone=monotone,
        lipschitz=max_slope <= K * (1.0 + 1e-9) + 1e-12,
        max_abs_slope=max_slope,
    )
