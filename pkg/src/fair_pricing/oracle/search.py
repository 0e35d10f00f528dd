"""One-dimensional maximizers and windowed grid maxima used by the oracle."""

from __future__ import annotations

import logging
import math
from collections import deque
from collections.abc import Callable

import numpy as np
from numpy.typing import NDArray

logger = logging.getLogger(__name__)

Objective = Callable[[NDArray[np.float64]], NDArray[np.float64]]

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0  # 1/phi^2

# Coarse bracketing grid spacing, in multiples of the requested tolerance.
COARSE_FACTOR: float = 100.0
# Largest grid evaluated in a single vectorized call.
GRID_CHUNK: int = 2_000_000


def golden_section_max(
    obj: Objective,
    a: float,
    b: float,
    tol: float,
    max_iterations: int,
) -> float | None:
    """Golden-section search for the maximum of a unimodal *obj* on [a, b].

    Returns None when reaching *tol* needs more than *max_iterations*.
    """
    dist = b - a
    if dist <= tol:
        return (a + b) / 2.0

    n = int(math.ceil(math.log(tol / dist) / math.log(INV_PHI)))
    if n > max_iterations:
        return None

    c = a + INV_PHI_SQ * dist
    d = a + INV_PHI * dist
    yc = float(obj(c))
    yd = float(obj(d))

    for _ in range(n - 1):
        if yc > yd:
            b = d
            d = c
            yd = yc
            dist = INV_PHI * dist
            c = a + INV_PHI_SQ * dist
            yc = float(obj(c))
        else:
            a = c
            c = d
            yc = yd
            dist = INV_PHI * dist
            d = a + INV_PHI * dist
            yd = float(obj(d))

    if yc > yd:
        return (a + d) / 2.0
    return (c + b) / 2.0


def grid_argmax(obj: Objective, lo: float, hi: float, step: float) -> float:
    """Exhaustive grid maximizer; ties go to the smallest price."""
    n = max(2, int(round((hi - lo) / step)) + 1)
    best_x, best_y = lo, -math.inf
    for start in range(0, n, GRID_CHUNK):
        idx = np.arange(start, min(n, start + GRID_CHUNK))
        xs = lo + (hi - lo) * idx / (n - 1)
        ys = np.asarray(obj(xs), dtype=float)
        k = int(np.argmax(ys))
        if ys[k] > best_y:
            best_x, best_y = float(xs[k]), float(ys[k])
    return best_x


def maximize_unimodal(
    obj: Objective,
    lo: float,
    hi: float,
    tol: float,
    max_iterations: int = 200,
) -> float:
    """Bracket the maximum on a coarse grid, then refine by golden section.

    Falls back to an exhaustive grid at step *tol* when golden section cannot
    converge within *max_iterations*.
    """
    if hi - lo <= tol:
        return (lo + hi) / 2.0
    step = COARSE_FACTOR * tol
    coarse = grid_argmax(obj, lo, hi, step)
    a, b = max(lo, coarse - step), min(hi, coarse + step)
    refined = golden_section_max(obj, a, b, tol, max_iterations)
    if refined is None:
        logger.warning(
            "Golden section did not converge within %d iterations on [%g, %g]; using a grid at step %g",
            max_iterations, a, b, tol,
        )
        return grid_argmax(obj, a, b, tol)
    # Golden section never returns the bracket ends exactly.
    candidates = [refined, a, b]
    values = [float(obj(x)) for x in candidates]
    return candidates[int(np.argmax(values))]


def window_argmax(
    values: NDArray[np.float64],
    starts: NDArray[np.int64],
    stops: NDArray[np.int64],
) -> tuple[NDArray[np.float64], NDArray[np.int64]]:
    """Maximum of ``values[starts[q]:stops[q] + 1]`` for every query q.

    Both bound arrays must be non-decreasing; empty windows give ``-inf`` and
    index -1. Ties resolve to the smallest index.
    """
    vals = np.asarray(values, dtype=float).tolist()
    n_values = len(vals)
    n_queries = len(starts)
    best = np.full(n_queries, -np.inf)
    where = np.full(n_queries, -1, dtype=np.int64)
    window: deque[int] = deque()
    pushed = 0
    for q in range(n_queries):
        start, stop = int(starts[q]), min(int(stops[q]), n_values - 1)
        while pushed <= stop:
            v = vals[pushed]
            while window and vals[window[-1]] < v:
                window.pop()
            window.append(pushed)
            pushed += 1
        while window and window[0] < start:
            window.popleft()
        if window and start <= stop:
            best[q] = vals[window[0]]
            where[q] = window[0]
    return best, where
