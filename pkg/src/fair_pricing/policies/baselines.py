"""Same-price benchmark policies: one shared price for every group in every period."""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.typing import NDArray

from fair_pricing.policies.environment import STAGE_I, EnvironmentHandle
from fair_pricing.policies.explore import empirical_revenue, post_full_block
from fair_pricing.policies.schedule import ExplorationSchedule

logger = logging.getLogger(__name__)


def _uniform(env: EnvironmentHandle, price: float) -> NDArray[np.float64]:
    return np.full(env.instance.n_groups, price)


def run_trisection_same_price(env: EnvironmentHandle, schedule: ExplorationSchedule) -> NDArray[np.float64]:
    """Trisection on the summed revenue with one shared price.

    Keeps shrinking while two more full blocks fit in the horizon, then
    commits the midpoint for the rest.
    """
    instance = env.instance
    T = env.horizon
    lo, hi = instance.domain.lo, instance.domain.hi
    count = schedule.trisect_count(T, hi)
    while env.remaining >= 2 * count:
        m1 = (2.0 * lo + hi) / 3.0
        m2 = (lo + 2.0 * hi) / 3.0
        r1 = empirical_revenue(env.post_uniform(m1, count, STAGE_I), _uniform(env, m1), instance.cost)
        r2 = empirical_revenue(env.post_uniform(m2, count, STAGE_I), _uniform(env, m2), instance.cost)
        if r1 > r2:
            hi = m2
        else:
            lo = m1
    committed = _uniform(env, (lo + hi) / 2.0)
    env.commit(committed)
    return committed


def run_etc_same_price(env: EnvironmentHandle, schedule: ExplorationSchedule) -> NDArray[np.float64]:
    """Explore ⌈T^{1/3}⌉ shared prices over a T^{2/3} prefix, then commit the best."""
    instance = env.instance
    T = env.horizon
    domain = instance.domain
    n_prices = max(1, math.ceil(T ** (1.0 / 3.0)))
    per_price = max(1, math.floor(T ** (2.0 / 3.0) / n_prices))
    levels = domain.lo + np.arange(1, n_prices + 1) / n_prices * domain.width

    best_price, best_revenue = None, -np.inf
    for level in levels:
        prices = _uniform(env, level)
        rows = post_full_block(env, prices, per_price, STAGE_I)
        if rows is None:
            break
        revenue = empirical_revenue(rows, prices, instance.cost)
        if revenue > best_revenue:
            best_price, best_revenue = prices, revenue
    if best_price is None:
        best_price = _uniform(env, levels[0])
    env.commit(best_price)
    return best_price


def run_dpa_same_price(env: EnvironmentHandle, schedule: ExplorationSchedule) -> NDArray[np.float64]:
    """Shrinking-grid learner with a shared price.

    Each round tests κ = ⌈ln T⌉ + 1 equally spaced prices of the current
    interval for one checkpoint count each, recentres on the best and
    shrinks the interval by 2/(κ − 1). Rounds stop when the next one would
    not fit in the horizon.
    """
    instance = env.instance
    T = env.horizon
    domain = instance.domain
    n_prices = max(3, math.ceil(math.log(max(T, 2))) + 1)
    per_price = schedule.checkpoint_count(T)
    lo, hi = domain.lo, domain.hi
    best = (lo + hi) / 2.0
    rounds = 0
    while env.remaining >= n_prices * per_price and hi - lo > 0:
        levels = np.linspace(lo, hi, n_prices)
        revenues = [
            empirical_revenue(env.post_uniform(level, per_price, STAGE_I), _uniform(env, level), instance.cost)
            for level in levels
        ]
        best = float(levels[int(np.argmax(revenues))])
        half = (hi - lo) / (n_prices - 1)
        lo, hi = max(domain.lo, best - half), min(domain.hi, best + half)
        rounds += 1
    logger.debug("DPA baseline finished %d rounds; committing %.6g", rounds, best)
    committed = _uniform(env, best)
    env.commit(committed)
    return committed
