"""Clairvoyant solutions of the unconstrained and fairness-constrained static problems."""

from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from fair_pricing.demand.curves import DemandCurve
from fair_pricing.demand.fairness import DiscrepancyKind, FairnessMeasure, FairnessSpec, MeasureKind
from fair_pricing.demand.market import MarketInstance
from fair_pricing.errors import ConfigError, InfeasibleError
from fair_pricing.oracle.search import grid_argmax, maximize_unimodal, window_argmax
from fair_pricing.settings import get_settings

logger = logging.getLogger(__name__)

# Guard on the number of grid points evaluated by the dense exhaustive path.
MAX_DENSE_POINTS: int = 200_000_000
# Elements per vectorized block of the dense path.
DENSE_BLOCK_ELEMENTS: int = 4_000_000
MAX_BRUTE_FORCE_GROUPS: int = 3
MIN_GRID_STEP: float = 1e-4


class ClairvoyantSolution(BaseModel):
    """Unconstrained optima p♯ and constrained optima p* of the static problem."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    p_sharp: list[float]
    p_star: list[float]
    revenue_sharp: float
    revenue_star: float
    gap_sharp: float
    lam: float = Field(alias="lambda")

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


def _resolve_tol(tol: float | None) -> float:
    tol = get_settings().ORACLE_TOL if tol is None else tol
    if not (0.0 < tol <= 1e-2):
        raise ConfigError("invalid oracle tolerance", [("tol", f"must lie in (0, 1e-2], got {tol}")])
    return tol


# ----------------------------------------------------------------------
# Unconstrained problem
# ----------------------------------------------------------------------


@lru_cache(maxsize=512)
def _unconstrained_cached(curve: DemandCurve, tol: float, max_iterations: int) -> float:
    lo, hi = curve.domain.lo, curve.domain.hi
    if curve.regular:
        return maximize_unimodal(curve.revenue, lo, hi, tol, max_iterations)
    return grid_argmax(curve.revenue, lo, hi, tol)


def unconstrained_optimum(curve: DemandCurve, tol: float | None = None) -> float:
    """Revenue-maximizing price p♯ of one curve, within *tol*.

    Regular curves use coarse bracketing plus golden section; nonregular
    curves an exhaustive grid at step *tol*.
    """
    return _unconstrained_cached(curve, _resolve_tol(tol), get_settings().GOLDEN_MAX_ITERATIONS)


def sharp_prices(instance: MarketInstance, tol: float | None = None) -> NDArray[np.float64]:
    return np.array([unconstrained_optimum(curve, tol) for curve in instance.curves])


def measure_values(instance: MarketInstance, measure: FairnessMeasure, prices) -> NDArray[np.float64]:
    """True measures M_i(p_i) for price vectors along the last axis."""
    arr = np.asarray(prices, dtype=float)
    return np.stack(
        [np.asarray(measure.true_value(curve, arr[..., i])) for i, curve in enumerate(instance.curves)],
        axis=-1,
    )


def sharp_gap(instance: MarketInstance, spec: FairnessSpec, p_sharp: NDArray[np.float64]) -> float:
    """Max pairwise measure discrepancy at the unconstrained optimum."""
    return float(spec.max_gap(measure_values(instance, spec.measure, p_sharp)))


# ----------------------------------------------------------------------
# Structural solvers
# ----------------------------------------------------------------------


def _require_price_hard(instance: MarketInstance, spec: FairnessSpec, n_groups: int | None = None) -> None:
    issues = []
    if spec.measure.kind != MeasureKind.PRICE:
        issues.append(("measure", "structural solvers need the price measure"))
    if n_groups is not None and instance.n_groups != n_groups:
        issues.append(("instance", f"needs exactly {n_groups} groups, got {instance.n_groups}"))
    if issues:
        raise ConfigError("unsupported oracle request", issues)


def constrained_pair_optimum(
    instance: MarketInstance,
    spec: FairnessSpec,
    tol: float | None = None,
) -> NDArray[np.float64]:
    """Two-group price-fair optimum using gap tightness.

    The constrained gap equals λ times the unconstrained gap with the same
    sign, so only the lower price of the pair is searched. Nonregular
    instances fall back to the brute-force oracle.
    """
    _require_price_hard(instance, spec, n_groups=2)
    tol = _resolve_tol(tol)
    if not instance.regular:
        logger.info("Instance %s is nonregular; using brute force", instance.name)
        return brute_force_constrained(instance, spec, max(MIN_GRID_STEP, tol))

    p_sharp = sharp_prices(instance, tol)
    lo_idx = int(np.argmin(p_sharp))
    hi_idx = 1 - lo_idx
    delta = float(p_sharp[hi_idx] - p_sharp[lo_idx])
    if delta == 0.0:
        return p_sharp
    gap = spec.lam * delta
    domain = instance.domain
    if gap > domain.width:
        raise InfeasibleError(f"constrained gap {gap} exceeds the price interval width {domain.width}")

    lo_curve, hi_curve = instance.curves[lo_idx], instance.curves[hi_idx]

    def objective(x):
        return lo_curve.revenue(x) + hi_curve.revenue(np.minimum(np.asarray(x) + gap, domain.hi))

    x = maximize_unimodal(objective, domain.lo, domain.hi - gap, tol, get_settings().GOLDEN_MAX_ITERATIONS)
    prices = np.empty(2)
    prices[lo_idx] = x
    prices[hi_idx] = min(x + gap, domain.hi)
    return prices


def constrained_multi_optimum(
    instance: MarketInstance,
    spec: FairnessSpec,
    tol: float | None = None,
) -> NDArray[np.float64]:
    """N-group price-fair optimum via the window structure.

    Every group's optimal price is its p♯ clamped into a window
    [L, L + λ·Δmax]; the window position L is found by a 1-D search.
    """
    _require_price_hard(instance, spec)
    tol = _resolve_tol(tol)
    p_sharp = sharp_prices(instance, tol)
    width = spec.lam * float(p_sharp.max() - p_sharp.min())
    domain = instance.domain

    def objective(L):
        left = np.asarray(L, dtype=float)[..., None]
        return instance.total_revenue(np.clip(p_sharp, left, left + width))

    L = maximize_unimodal(objective, domain.lo, domain.hi - width, tol, get_settings().GOLDEN_MAX_ITERATIONS)
    return np.clip(p_sharp, L, L + width)


def constrained_discrepancy_optimum(
    instance: MarketInstance,
    spec: FairnessSpec,
    tol: float | None = None,
) -> NDArray[np.float64]:
    """Two-group optimum under |f(p1, p2)| <= λ·|f(p♯1, p♯2)|.

    The lower-p♯ group's price x is searched; the other group gets
    min(p̄, f⁻¹(x; λ·|f(p♯)|)).
    """
    _require_price_hard(instance, spec, n_groups=2)
    tol = _resolve_tol(tol)
    p_sharp = sharp_prices(instance, tol)
    lo_idx = int(np.argmin(p_sharp))
    hi_idx = 1 - lo_idx
    if p_sharp[lo_idx] == p_sharp[hi_idx]:
        return p_sharp
    target = spec.lam * abs(float(spec.discrepancy(p_sharp[lo_idx], p_sharp[hi_idx])))
    domain = instance.domain
    lo_curve, hi_curve = instance.curves[lo_idx], instance.curves[hi_idx]
    f = spec.discrepancy

    def partner(x):
        return np.minimum(f.f_inverse_array(x, target, domain.hi), domain.hi)

    def objective(x):
        other = partner(x)
        safe = np.where(np.isnan(other), domain.hi, other)
        value = lo_curve.revenue(x) + hi_curve.revenue(safe)
        return np.where(np.isnan(other), -np.inf, value)

    x = maximize_unimodal(objective, domain.lo, domain.hi, tol, get_settings().GOLDEN_MAX_ITERATIONS)
    other = float(partner(x))
    if np.isnan(other):
        raise InfeasibleError(f"discrepancy inverse infeasible at the optimum x={x}")
    prices = np.empty(2)
    prices[lo_idx] = x
    prices[hi_idx] = other
    return prices


# ----------------------------------------------------------------------
# Brute force
# ----------------------------------------------------------------------


def _brute_force_windows(
    revenues: list[NDArray[np.float64]],
    grid: NDArray[np.float64],
    allowed: float,
) -> NDArray[np.int64]:
    """Exact grid optimum for price fairness: scan windows [a, a + k]."""
    step = float(grid[1] - grid[0])
    k = int(np.floor(allowed / step + 1e-9))
    n = len(grid)
    starts = np.arange(n, dtype=np.int64)
    stops = np.minimum(starts + k, n - 1)
    total = np.zeros(n)
    wheres = []
    for values in revenues:
        best, where = window_argmax(values, starts, stops)
        total += best
        wheres.append(where)
    a = int(np.argmax(total))
    return np.array([where[a] for where in wheres], dtype=np.int64)


def _brute_force_banded(
    revenues: list[NDArray[np.float64]],
    measures: list[NDArray[np.float64]],
    allowed: float,
) -> NDArray[np.int64] | None:
    """Two groups with measures non-increasing in price: feasible partners form bands."""
    m1, m2 = measures
    if np.any(np.diff(m1) > 0) or np.any(np.diff(m2) > 0):
        return None
    neg_m2 = -m2
    starts = np.searchsorted(neg_m2, -(m1 + allowed), side="left").astype(np.int64)
    stops = (np.searchsorted(neg_m2, -(m1 - allowed), side="right") - 1).astype(np.int64)
    best, where = window_argmax(revenues[1], starts, stops)
    total = revenues[0] + best
    i = int(np.argmax(total))
    if not np.isfinite(total[i]):
        raise InfeasibleError("no feasible grid point")
    return np.array([i, where[i]], dtype=np.int64)


def _brute_force_dense(
    revenues: list[NDArray[np.float64]],
    measures: list[NDArray[np.float64]],
    spec: FairnessSpec,
    allowed: float,
) -> NDArray[np.int64]:
    n = len(revenues[0])
    n_groups = len(revenues)
    if n**n_groups > MAX_DENSE_POINTS:
        raise ConfigError(
            "grid too fine for exhaustive search",
            [("grid_step", f"{n}^{n_groups} points exceed the limit of {MAX_DENSE_POINTS}")],
        )
    best_value, best_idx = -np.inf, None
    chunk = max(1, DENSE_BLOCK_ELEMENTS // n ** (n_groups - 1))
    for start in range(0, n, chunk):
        rows = slice(start, min(n, start + chunk))
        if n_groups == 2:
            values = np.stack(np.broadcast_arrays(measures[0][rows, None], measures[1][None, :]), axis=-1)
            total = revenues[0][rows, None] + revenues[1][None, :]
        else:
            values = np.stack(
                np.broadcast_arrays(
                    measures[0][rows, None, None], measures[1][None, :, None], measures[2][None, None, :]
                ),
                axis=-1,
            )
            total = revenues[0][rows, None, None] + revenues[1][None, :, None] + revenues[2][None, None, :]
        total = np.where(spec.max_gap(values) <= allowed, total, -np.inf)
        flat = int(np.argmax(total))
        if total.flat[flat] > best_value:
            best_value = float(total.flat[flat])
            local = np.unravel_index(flat, total.shape)
            best_idx = np.array([local[0] + start, *local[1:]], dtype=np.int64)
    if best_idx is None:
        raise InfeasibleError("no feasible grid point")
    return best_idx


def brute_force_constrained(
    instance: MarketInstance,
    spec: FairnessSpec,
    grid_step: float | None = None,
) -> NDArray[np.float64]:
    """Exhaustive maximizer of total revenue over the feasible price grid.

    Feasible means every pairwise measure discrepancy is at most
    λ·gap_sharp. Price fairness is solved exactly by a window scan, monotone
    two-group measures by bands, everything else by dense enumeration.
    For non-price measures the grid cannot hit equal measures exactly, so
    the allowed gap gets a slack of half the measure's grid resolution.
    """
    settings = get_settings()
    grid_step = settings.BRUTE_FORCE_GRID_STEP if grid_step is None else grid_step
    issues = []
    if instance.n_groups > MAX_BRUTE_FORCE_GROUPS:
        issues.append(("instance", f"brute force supports at most {MAX_BRUTE_FORCE_GROUPS} groups"))
    if grid_step < MIN_GRID_STEP:
        issues.append(("grid_step", f"must be >= {MIN_GRID_STEP}, got {grid_step}"))
    if issues:
        raise ConfigError("brute-force request rejected", issues)

    p_sharp = sharp_prices(instance)
    allowed = spec.lam * sharp_gap(instance, spec, p_sharp) + settings.FEASIBILITY_SLACK
    grid = instance.domain.grid(grid_step)
    revenues = [np.asarray(curve.revenue(grid)) for curve in instance.curves]
    measures = [np.asarray(spec.measure.true_value(curve, grid)) for curve in instance.curves]

    is_difference = spec.discrepancy.kind == DiscrepancyKind.DIFFERENCE
    if spec.measure.kind == MeasureKind.PRICE and is_difference:
        idx = _brute_force_windows(revenues, grid, allowed)
    else:
        allowed += 0.5 * max(float(np.abs(np.diff(m)).max()) for m in measures)
        idx = None
        if instance.n_groups == 2 and is_difference:
            idx = _brute_force_banded(revenues, measures, allowed)
        if idx is None:
            idx = _brute_force_dense(revenues, measures, spec, allowed)
    return grid[idx]


# ----------------------------------------------------------------------
# Dispatch
# ----------------------------------------------------------------------


@lru_cache(maxsize=256)
def _solve_cached(instance: MarketInstance, spec: FairnessSpec, tol: float) -> ClairvoyantSolution:
    p_sharp = sharp_prices(instance, tol)
    price_measure = spec.measure.kind == MeasureKind.PRICE
    difference = spec.discrepancy.kind == DiscrepancyKind.DIFFERENCE
    if price_measure and instance.regular and difference and instance.n_groups == 2:
        method, p_star = "pair", constrained_pair_optimum(instance, spec, tol)
    elif price_measure and instance.regular and difference:
        method, p_star = "window", constrained_multi_optimum(instance, spec, tol)
    elif price_measure and instance.regular and instance.n_groups == 2:
        method, p_star = "discrepancy", constrained_discrepancy_optimum(instance, spec, tol)
    else:
        method, p_star = "brute-force", brute_force_constrained(instance, spec)
    logger.debug("Clairvoyant for %s at lambda=%g solved by %s", instance.name, spec.lam, method)
    return ClairvoyantSolution(
        p_sharp=[float(p) for p in p_sharp],
        p_star=[float(p) for p in p_star],
        revenue_sharp=float(instance.total_revenue(p_sharp)),
        revenue_star=float(instance.total_revenue(p_star)),
        gap_sharp=sharp_gap(instance, spec, p_sharp),
        lam=spec.lam,
    )


def solve_clairvoyant(
    instance: MarketInstance,
    spec: FairnessSpec,
    tol: float | None = None,
) -> ClairvoyantSolution:
    """Hard-constrained clairvoyant for *spec* (soft specs use the same benchmark).

    Results are cached per (instance, spec, tol).
    """
    return _solve_cached(instance, spec, _resolve_tol(tol))


def revenue_loss_curve(
    instance: MarketInstance,
    measure: FairnessMeasure,
    lambda_grid,
    tol: float | None = None,
) -> list[tuple[float, float]]:
    """Revenue lost to fairness, revenue_sharp − revenue_star, for each λ."""
    base = FairnessSpec(measure=measure, lam=0.0)
    curve = []
    for lam in lambda_grid:
        solution = solve_clairvoyant(instance, base.with_lambda(float(lam)), tol)
        curve.append((float(lam), solution.revenue_sharp - solution.revenue_star))
    return curve


def reset_oracle_cache() -> None:
    _unconstrained_cached.cache_clear()
    _solve_cached.cache_clear()
