"""Stage-I and Stage-II explorers of the explore-then-commit pricing policies."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from fair_pricing.demand.fairness import FairnessSpec
from fair_pricing.errors import BudgetExhausted, ConfigError, InfeasibleError
from fair_pricing.policies.environment import STAGE_I, STAGE_II, EnvironmentHandle
from fair_pricing.policies.schedule import ExplorationSchedule

logger = logging.getLogger(__name__)

# J^N joint argmax of the general explorer is enumerated only up to this N.
MAX_JOINT_GROUPS: int = 3


@dataclass
class StageTwoResult:
    """Prices to commit, how many checkpoints finished, and whether none did."""

    prices: NDArray[np.float64]
    completed: int
    degenerate: bool = False


def post_full_block(env: EnvironmentHandle, prices: NDArray[np.float64], count: int, stage: str) -> NDArray[np.float64] | None:
    """Serve a full block or return None when the horizon cuts it short."""
    try:
        rows = env.post(prices, count, stage)
    except BudgetExhausted:
        return None
    return rows if len(rows) == count else None


def _degenerate(env: EnvironmentHandle, checkpoints: NDArray[np.float64]) -> StageTwoResult:
    logger.warning("No Stage-II checkpoint completed before the horizon; falling back to a uniform price")
    return StageTwoResult(np.full(env.instance.n_groups, checkpoints[0]), 0, degenerate=True)


def _order_pair(p_hat: NDArray[np.float64]) -> tuple[int, int]:
    lo_idx = int(np.argmin(p_hat))
    return lo_idx, 1 - lo_idx


# ----------------------------------------------------------------------
# Stage I
# ----------------------------------------------------------------------


def explore_unconstrained(
    env: EnvironmentHandle,
    z: int,
    schedule: ExplorationSchedule,
    *,
    multi_group: bool = False,
    intervals: list[tuple[float, float]] | None = None,
) -> float:
    """Trisection estimate of group *z*'s unconstrained optimum p♯_z.

    Each interior point is offered to all groups for the scheduled count;
    only group *z*'s empirical revenue drives the shrink. Returns the
    interval midpoint on loop exit or when the horizon runs out. When
    *intervals* is given, every bracket visited is appended to it.
    """
    instance = env.instance
    T = env.horizon
    lo, hi = instance.domain.lo, instance.domain.hi
    cost = instance.cost
    stop = schedule.stop_width(T)
    count = schedule.trisect_count(T, hi, instance.n_groups if multi_group else None)

    if intervals is not None:
        intervals.append((lo, hi))
    while hi - lo > stop:
        m1 = (2.0 * lo + hi) / 3.0
        m2 = (lo + 2.0 * hi) / 3.0
        rows1 = post_full_block(env, np.full(instance.n_groups, m1), count, STAGE_I)
        if rows1 is None:
            break
        rows2 = post_full_block(env, np.full(instance.n_groups, m2), count, STAGE_I)
        if rows2 is None:
            break
        if (m1 - cost) * rows1[:, z].mean() > (m2 - cost) * rows2[:, z].mean():
            hi = m2
        else:
            lo = m1
        if intervals is not None:
            intervals.append((lo, hi))
    return (lo + hi) / 2.0


# ----------------------------------------------------------------------
# Stage II
# ----------------------------------------------------------------------


def empirical_revenue(rows: NDArray[np.float64], prices: NDArray[np.float64], cost: float) -> float:
    return float(np.sum((prices - cost) * rows.mean(axis=0)))


def _scan_checkpoints(
    env: EnvironmentHandle,
    offers: list[NDArray[np.float64]],
    count: int,
    checkpoints: NDArray[np.float64],
) -> StageTwoResult:
    """Offer each price vector for *count* periods and keep the best; ties go to the earliest."""
    best, best_revenue, completed = None, -np.inf, 0
    for prices in offers:
        rows = post_full_block(env, prices, count, STAGE_II)
        if rows is None:
            break
        completed += 1
        revenue = empirical_revenue(rows, prices, env.instance.cost)
        if revenue > best_revenue:
            best, best_revenue = prices, revenue
    if best is None:
        return _degenerate(env, checkpoints)
    return StageTwoResult(best.copy(), completed)


def explore_constrained_price(
    env: EnvironmentHandle,
    p_hat: ArrayLike,
    lam: float,
    schedule: ExplorationSchedule,
) -> StageTwoResult:
    """Checkpoint search for the two-group price-fair optimum.

    The group with the smaller p̂♯ gets max(p̲, ℓ_j − λξ/2), the other
    min(p̄, ℓ_j + λξ/2), so every offered gap is at most λξ.
    """
    estimates = np.asarray(p_hat, dtype=float)
    if estimates.shape != (2,) or env.instance.n_groups != 2:
        raise ConfigError("explore_constrained_price needs exactly two groups", [("instance", "N must be 2")])
    T = env.horizon
    domain = env.instance.domain
    xi = max(abs(estimates[0] - estimates[1]) - schedule.slack(T), 0.0)
    half = lam * xi / 2.0
    lo_idx, hi_idx = _order_pair(estimates)
    checkpoints = schedule.checkpoints(T, domain)

    offers = []
    for level in checkpoints:
        prices = np.empty(2)
        prices[lo_idx] = max(domain.lo, level - half)
        prices[hi_idx] = min(domain.hi, level + half)
        offers.append(prices)
    return _scan_checkpoints(env, offers, schedule.checkpoint_count(T), checkpoints)


def explore_constrained_multi(
    env: EnvironmentHandle,
    p_hat: ArrayLike,
    lam: float,
    schedule: ExplorationSchedule,
    *,
    multi_group: bool = True,
) -> StageTwoResult:
    """Window search for N groups: each p̂♯ clamped into [ℓ_j − λξ/2, ℓ_j + λξ/2]."""
    estimates = np.asarray(p_hat, dtype=float)
    instance = env.instance
    T = env.horizon
    domain = instance.domain
    xi = max(float(estimates.max() - estimates.min()) - schedule.slack(T), 0.0)
    half = lam * xi / 2.0
    checkpoints = schedule.checkpoints(T, domain)
    offers = [domain.clip(np.clip(estimates, level - half, level + half)) for level in checkpoints]
    count = schedule.checkpoint_count(T, instance.n_groups if multi_group else None)
    return _scan_checkpoints(env, offers, count, checkpoints)


def explore_constrained_discrepancy(
    env: EnvironmentHandle,
    p_hat: ArrayLike,
    spec: FairnessSpec,
    schedule: ExplorationSchedule,
) -> StageTwoResult:
    """Checkpoint search under a price-based discrepancy f.

    The smaller-p̂♯ group gets ℓ_j and the other min(p̄, f⁻¹(ℓ_j; λξ));
    checkpoints where the inverse does not exist are skipped.
    """
    estimates = np.asarray(p_hat, dtype=float)
    if estimates.shape != (2,) or env.instance.n_groups != 2:
        raise ConfigError("explore_constrained_discrepancy needs exactly two groups", [("instance", "N must be 2")])
    f = spec.discrepancy
    T = env.horizon
    domain = env.instance.domain
    lo_idx, hi_idx = _order_pair(estimates)
    gap = abs(float(f(estimates[lo_idx], estimates[hi_idx])))
    xi = max(gap - f.lipschitz_bound * schedule.slack(T), 0.0)
    target = spec.lam * xi
    checkpoints = schedule.checkpoints(T, domain)

    offers = []
    for level in checkpoints:
        try:
            partner = f.f_inverse(float(level), target, upper=domain.hi)
        except InfeasibleError as e:
            logger.warning("Skipping checkpoint %.6g: %s", level, e)
            continue
        prices = np.empty(2)
        prices[lo_idx] = level
        prices[hi_idx] = min(domain.hi, partner)
        offers.append(prices)
    return _scan_checkpoints(env, offers, schedule.checkpoint_count(T), checkpoints)


def _nearest_checkpoint(checkpoints: NDArray[np.float64], price: float) -> int:
    """Index of the checkpoint closest to *price*; midpoint ties round down."""
    return int(np.argmin(np.abs(checkpoints - price)))


def explore_constrained_general(
    env: EnvironmentHandle,
    p_hat: ArrayLike,
    spec: FairnessSpec,
    schedule: ExplorationSchedule,
    *,
    multi_group: bool = False,
    independent: bool = False,
) -> StageTwoResult:
    """Soft-constraint checkpoint search over all joint checkpoint tuples.

    Every checkpoint is offered to all groups. The penalized objective is

        Ĝ = Σ_i R̂_i(ℓ_{j_i}) − γ Σ_{a<b} max(|f(M̂_a, M̂_b)| − anchor, 0)

    with the anchor λ·max_{a<b} |f(M̂_a(ℓ_{t_a}), M̂_b(ℓ_{t_b}))| at the
    checkpoints nearest to p̂♯. ``independent=True`` drops the penalty and
    takes each group's own argmax.
    """
    estimates = np.asarray(p_hat, dtype=float)
    instance = env.instance
    n_groups = instance.n_groups
    if n_groups > MAX_JOINT_GROUPS and not independent:
        raise ConfigError(
            "joint checkpoint search is limited in group count",
            [("instance", f"at most {MAX_JOINT_GROUPS} groups, got {n_groups}")],
        )
    T = env.horizon
    checkpoints = schedule.checkpoints(T, instance.domain)
    count = schedule.checkpoint_count(T, n_groups if multi_group else None)

    demand_hat: list[NDArray[np.float64]] = []
    measure_hat: list[NDArray[np.float64]] = []
    for level in checkpoints:
        prices = np.full(n_groups, level)
        rows = post_full_block(env, prices, count, STAGE_II)
        if rows is None:
            break
        demand_hat.append(rows.mean(axis=0))
        measure_hat.append(
            np.array([
                np.mean(spec.measure.observe(curve, level, rows[:, i]))
                for i, curve in enumerate(instance.curves)
            ])
        )
    completed = len(demand_hat)
    if completed == 0:
        return _degenerate(env, checkpoints)

    levels = checkpoints[:completed]
    revenue = (levels[None, :] - instance.cost) * np.array(demand_hat).T  # (N, J)
    if independent:
        idx = [int(np.argmax(revenue[i])) for i in range(n_groups)]
        return StageTwoResult(levels[idx], completed)

    measures = np.array(measure_hat).T  # (N, J)
    nearest = [min(_nearest_checkpoint(checkpoints, p), completed - 1) for p in estimates]
    anchor = spec.lam * max(
        abs(float(spec.discrepancy(measures[a, nearest[a]], measures[b, nearest[b]])))
        for a, b in itertools.combinations(range(n_groups), 2)
    )

    def along(axis: int, values: NDArray[np.float64]) -> NDArray[np.float64]:
        shape = [1] * n_groups
        shape[axis] = completed
        return values.reshape(shape)

    objective = sum(along(i, revenue[i]) for i in range(n_groups))
    if spec.gamma > 0:
        penalty = sum(
            np.maximum(np.abs(spec.discrepancy(along(a, measures[a]), along(b, measures[b]))) - anchor, 0.0)
            for a, b in itertools.combinations(range(n_groups), 2)
        )
        objective = objective - spec.gamma * penalty
    best = np.unravel_index(int(np.argmax(objective)), objective.shape)
    return StageTwoResult(levels[list(best)], completed)
