"""Hard instance pair for the T^{4/5} lower bound and a numerical verifier.

Both instances live on [1, 2] with zero cost and Bernoulli demand. Instance I
carries (d1, d3), instance I′ carries (d2, d3), where d_i(p) = R_i(p)/p and
R2 agrees with R1 beyond 1 + 7√h/4.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.special import rel_entr

from fair_pricing.demand.curves import (
    R2_PIECES,
    DemandCurve,
    PriceInterval,
    lower_bound_breakpoints,
    lower_bound_revenue,
)
from fair_pricing.demand.market import MarketInstance, NoiseModel
from fair_pricing.errors import DomainError

logger = logging.getLogger(__name__)

# Parameter ranges under which the lower-bound properties are claimed.
A_RANGE: tuple[float, float] = (20.0, 30.0)
H_RANGE: tuple[float, float] = (0.0, 0.01)

DEMAND_BOUNDS: tuple[float, float] = (1.0 / 20.0, 1.0 / 4.0)
SLOPE_BOUND: float = -1.0 / 40.0

# Finite-difference steps: price step for derivatives, demand step for the
# concavity-in-demand check.
PRICE_FD_STEP: float = 1e-5
DEMAND_FD_STEP: float = 1e-4
CONTINUITY_TOL: float = 1e-12
# Multiplier on machine epsilon for the second-order check.
SECOND_ORDER_EPS_FACTOR: float = 10.0


def validate_lower_bound_params(A: float, h: float) -> None:
    issues = []
    if not (A_RANGE[0] <= A <= A_RANGE[1]):
        issues.append(f"A must lie in [{A_RANGE[0]:g}, {A_RANGE[1]:g}], got {A:g}")
    if not (H_RANGE[0] < h < H_RANGE[1]):
        issues.append(f"h must lie in ({H_RANGE[0]:g}, {H_RANGE[1]:g}), got {h:g}")
    if issues:
        raise DomainError(
            "invalid lower-bound parameters: " + "; ".join(issues)
        )


def make_lower_bound_pair(A: float, h: float, *, strict: bool = True) -> tuple[MarketInstance, MarketInstance]:
    """Build the instance pair (I, I′).

    With ``strict=False`` out-of-range parameters are accepted for
    diagnostics; ``h`` must still be positive.
    """
    if strict:
        validate_lower_bound_params(A, h)
    elif h <= 0 or A <= 0:
        raise DomainError(f"A and h must be positive, got A={A}, h={h}")
    d1, d2, d3 = (DemandCurve.lower_bound_profile(which, A, h) for which in (1, 2, 3))
    noise = NoiseModel()
    tag = f"({A:g},{h:g})"
    return (
        MarketInstance((d1, d3), noise, name=f"lb-pair{tag}"),
        MarketInstance((d2, d3), noise, name=f"lb-pair-alt{tag}"),
    )


# ----------------------------------------------------------------------
# Verification report
# ----------------------------------------------------------------------


@dataclass
class PropertyCheck:
    item: str
    description: str
    passed: bool
    detail: str
    values: dict[str, Any] = field(default_factory=dict)


@dataclass
class LowerBoundReport:
    A: float
    h: float
    grid_step: float
    checks: list[PropertyCheck]
    max_demand_gap: float

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def only_d3_fails(self) -> bool:
        """True when item (c) is the only failing item and d3 the only curve failing it.

        d3'(1) = (24 − A)/8A, which is above −1/40 whenever A <= 30.
        """
        failing = [c for c in self.checks if not c.passed]
        if [c.item for c in failing] != ["c"]:
            return False
        curves = failing[0].values
        failing_curves = [name for name, v in curves.items() if not (v["slope_ok"] and v["concave_ok"])]
        return failing_curves == ["d3"]

    def check(self, item: str) -> PropertyCheck:
        for entry in self.checks:
            if entry.item == item:
                return entry
        raise KeyError(item)

    def to_dict(self) -> dict[str, Any]:
        return {
            "A": self.A,
            "h": self.h,
            "grid_step": self.grid_step,
            "passed": self.passed,
            "only_d3_fails": self.only_d3_fails,
            "max_demand_gap": self.max_demand_gap,
            "checks": [
                {
                    "item": c.item,
                    "description": c.description,
                    "passed": c.passed,
                    "detail": c.detail,
                    "values": c.values,
                }
                for c in self.checks
            ],
        }


def _demand(which: int, p: NDArray[np.float64], A: float, h: float) -> NDArray[np.float64]:
    return lower_bound_revenue(which, p, A, h) / p


def _check_bounds(grid: NDArray[np.float64], A: float, h: float) -> PropertyCheck:
    lo, hi = DEMAND_BOUNDS
    values = {}
    ok = True
    for which in (1, 2, 3):
        d = _demand(which, grid, A, h)
        values[f"d{which}_min"] = float(d.min())
        values[f"d{which}_max"] = float(d.max())
        ok &= bool(d.min() >= lo - CONTINUITY_TOL and d.max() <= hi + CONTINUITY_TOL)
    return PropertyCheck("a", "d_i(p) in [1/20, 1/4]", ok, "all grid values inside" if ok else "bound exceeded", values)


def _check_smoothness(A: float, h: float) -> PropertyCheck:
    values: dict[str, Any] = {}
    ok = True
    # Second derivative of R2 is bounded by 3/A, so one-sided slopes may
    # differ by at most 2·(3/A)·step.
    slope_tol = 2.0 * (3.0 / A) * PRICE_FD_STEP + 1e-9
    for idx, b in enumerate(lower_bound_breakpoints(h), start=1):
        left_piece, right_piece = R2_PIECES[idx - 1], R2_PIECES[idx]
        pt = np.array(b)
        left = float(left_piece(pt, A, h))
        right = float(right_piece(pt, A, h))
        step = PRICE_FD_STEP
        slope_left = float((left_piece(pt, A, h) - left_piece(pt - step, A, h)) / step)
        slope_right = float((right_piece(pt + step, A, h) - right_piece(pt, A, h)) / step)
        value_gap = abs(left - right) / b
        slope_gap = abs(slope_left - slope_right)
        values[f"breakpoint_{idx}"] = {
            "p": b,
            "demand_jump": value_gap,
            "revenue_slope_left": slope_left,
            "revenue_slope_right": slope_right,
        }
        ok &= value_gap <= CONTINUITY_TOL and slope_gap <= slope_tol
    detail = "R2 continuous with matching one-sided slopes" if ok else "R2 kink or jump at a breakpoint"
    return PropertyCheck("b", "d2 continuously differentiable at breakpoints", ok, detail, values)


def _concave_in_demand(which: int, A: float, h: float, grid: NDArray[np.float64]) -> tuple[bool, float]:
    """Second divided differences of R as a function of d on a demand grid."""
    d = _demand(which, grid, A, h)
    if np.any(np.diff(d) >= 0):
        return False, float("nan")
    levels = np.arange(d.min(), d.max(), DEMAND_FD_STEP)
    # d is decreasing in p; invert by interpolation then evaluate exactly.
    prices = np.interp(levels, d[::-1], grid[::-1])
    dl = _demand(which, prices, A, h)
    rl = lower_bound_revenue(which, prices, A, h)
    order = np.argsort(dl)
    dl, rl = dl[order], rl[order]
    first = np.diff(rl) / np.diff(dl)
    second = np.diff(first) / (dl[2:] - dl[:-2])
    spacing = float(np.min(np.diff(dl)))
    slack = SECOND_ORDER_EPS_FACTOR * np.finfo(float).eps * float(np.abs(rl).max()) / spacing**2
    worst = float(second.max())
    return bool(worst < slack), worst


def _check_slopes(grid: NDArray[np.float64], A: float, h: float) -> PropertyCheck:
    step = PRICE_FD_STEP
    inner = grid[(grid >= 1.0 + step) & (grid <= 2.0 - step)]
    values: dict[str, Any] = {}
    ok = True
    for which in (1, 2, 3):
        derivative = (_demand(which, inner + step, A, h) - _demand(which, inner - step, A, h)) / (2 * step)
        worst_idx = int(np.argmax(derivative))
        slope_ok = bool(derivative.max() < SLOPE_BOUND)
        concave_ok, worst_second = _concave_in_demand(which, A, h, grid)
        values[f"d{which}"] = {
            "max_slope": float(derivative.max()),
            "max_slope_at": float(inner[worst_idx]),
            "slope_ok": slope_ok,
            "max_second_difference": worst_second,
            "concave_ok": concave_ok,
        }
        ok &= slope_ok and concave_ok
    failing = [name for name, v in values.items() if not (v["slope_ok"] and v["concave_ok"])]
    detail = "all curves decreasing and concave in demand" if ok else f"fails for {', '.join(failing)}"
    return PropertyCheck("c", "dd/dp < -1/40 and R concave in d", ok, detail, values)


def _window(grid: NDArray[np.float64], h: float) -> NDArray[np.float64]:
    _, b2 = lower_bound_breakpoints(h)
    return grid[grid <= b2 + 1e-15]


def _check_closeness(grid: NDArray[np.float64], A: float, h: float) -> tuple[PropertyCheck, float]:
    window = _window(grid, h)
    gap = np.abs(_demand(1, window, A, h) - _demand(2, window, A, h))
    bound = h / (4.0 * A)
    worst = float(gap.max())
    ok = worst <= bound
    return (
        PropertyCheck("d", "|d1 - d2| <= h/4A on [1, 1+7√h/4]", ok, f"max gap {worst:.3e} vs bound {bound:.3e}",
                      {"max_gap": worst, "bound": bound}),
        worst,
    )


def _check_kl(grid: NDArray[np.float64], A: float, h: float) -> PropertyCheck:
    window = _window(grid, h)
    d1 = _demand(1, window, A, h)
    d2 = _demand(2, window, A, h)
    kl = rel_entr(d1, d2) + rel_entr(1.0 - d1, 1.0 - d2)
    bound = 5.0 * h**2 / (3.0 * A**2)
    worst = float(kl.max())
    ok = worst <= bound
    return PropertyCheck("e", "KL(Ber(d1) || Ber(d2)) <= 5h²/3A²", ok, f"max KL {worst:.3e} vs bound {bound:.3e}",
                         {"max_kl": worst, "bound": bound})


def _check_argmax(grid: NDArray[np.float64], A: float, h: float, step: float) -> PropertyCheck:
    expected = {1: 1.0 + math.sqrt(h) / 4.0, 2: 1.0, 3: 2.0}
    values = {}
    ok = True
    for which, target in expected.items():
        found = float(grid[int(np.argmax(lower_bound_revenue(which, grid, A, h)))])
        values[f"d{which}"] = {"argmax": found, "expected": target}
        ok &= abs(found - target) <= step + 1e-12
    return PropertyCheck("f", "argmax locations 1+√h/4, 1, 2", ok, "match" if ok else "mismatch", values)


def verify_lb_properties(
    A: float,
    h: float,
    grid_step: float = 1e-4,
    *,
    diagnostic: bool = False,
) -> LowerBoundReport:
    """Numerically check the regularity properties of the hard instances.

    Failures are reported, not raised. ``diagnostic=True`` skips the
    parameter-range validation (the h → 0 limit, for instance).
    """
    if diagnostic:
        if A <= 0 or h <= 0:
            raise DomainError(f"A and h must be positive, got A={A}, h={h}")
    else:
        validate_lower_bound_params(A, h)
    if grid_step > 1e-4 and not diagnostic:
        raise DomainError(f"grid_step must be <= 1e-4, got {grid_step}")

    grid = PriceInterval(1.0, 2.0).grid(grid_step)
    closeness, max_gap = _check_closeness(grid, A, h)
    checks = [
        _check_bounds(grid, A, h),
        _check_smoothness(A, h),
        _check_slopes(grid, A, h),
        closeness,
        _check_kl(grid, A, h),
        _check_argmax(grid, A, h, grid_step),
    ]
    report = LowerBoundReport(A=A, h=h, grid_step=grid_step, checks=checks, max_demand_gap=max_gap)
    for check in checks:
        if not check.passed:
            logger.warning("Lower-bound item (%s) failed for A=%g, h=%g: %s", check.item, A, h, check.detail)
    return report
