"""Tests for oracle/ — 1-D search helpers and the clairvoyant solvers."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fair_pricing.demand import DiscrepancyFunction, FairnessMeasure, FairnessSpec, resolve_instance
from fair_pricing.errors import ConfigError
from fair_pricing.oracle import (
    brute_force_constrained,
    constrained_discrepancy_optimum,
    constrained_multi_optimum,
    constrained_pair_optimum,
    measure_values,
    revenue_loss_curve,
    sharp_prices,
    solve_clairvoyant,
    unconstrained_optimum,
)
from fair_pricing.oracle.search import golden_section_max, grid_argmax, maximize_unimodal, window_argmax
from tests.conftest import demand_spec, price_spec


# ======================================================================
# search helpers
# ======================================================================
class TestSearch:

    def test_golden_section_interior(self):
        x = golden_section_max(lambda p: -(p - 1.3) ** 2, 0.0, 5.0, 1e-8, 200)
        assert x == pytest.approx(1.3, abs=1e-7)

    def test_golden_section_gives_up(self):
        assert golden_section_max(lambda p: -(p - 1.3) ** 2, 0.0, 5.0, 1e-12, 5) is None

    def test_grid_argmax_ties_go_low(self):
        assert grid_argmax(lambda p: np.zeros_like(p), 0.0, 1.0, 0.1) == 0.0

    def test_maximize_unimodal_boundary(self):
        assert maximize_unimodal(lambda p: -np.asarray(p), 1.0, 2.0, 1e-6) == 1.0
        assert maximize_unimodal(lambda p: np.asarray(p), 1.0, 2.0, 1e-6) == 2.0

    def test_window_argmax_empty_window(self):
        best, where = window_argmax(np.array([1.0, 2.0, 3.0]), np.array([2]), np.array([1]))
        assert best[0] == -np.inf
        assert where[0] == -1

    @settings(max_examples=100)
    @given(
        values=st.lists(st.integers(min_value=-3, max_value=3), min_size=1, max_size=40),
        width=st.integers(min_value=0, max_value=10),
        data=st.data(),
    )
    def test_window_argmax_matches_naive(self, values, width, data):
        n = len(values)
        starts = sorted(data.draw(st.lists(st.integers(min_value=0, max_value=n - 1), min_size=1, max_size=20)))
        starts = np.array(starts, dtype=np.int64)
        stops = starts + width
        best, where = window_argmax(np.array(values, dtype=float), starts, stops)
        for q, (a, b) in enumerate(zip(starts, stops)):
            window = values[a : min(b, n - 1) + 1]
            assert best[q] == max(window)
            assert where[q] == a + window.index(max(window))


# ======================================================================
# Unconstrained optima
# ======================================================================
class TestUnconstrained:

    @pytest.mark.parametrize(
        "name,expected",
        [
            ("exp-paper", [1.0, 2.0]),
            ("linear-paper", [3.0, 4.0]),
            ("linear-multi", [3.0, 3.5, 4.0]),
            ("invprop-paper", [1.0, 2.0]),
        ],
    )
    def test_sharp_prices(self, name, expected):
        assert sharp_prices(resolve_instance(name)) == pytest.approx(expected, abs=1e-4)

    def test_tolerance_validated(self, exp_instance):
        with pytest.raises(ConfigError):
            unconstrained_optimum(exp_instance.curves[0], tol=0.1)


# ======================================================================
# Constrained optima
# ======================================================================
class TestConstrained:

    @pytest.mark.parametrize("lam", [0.0, 0.2, 0.5, 0.8, 1.0])
    def test_linear_pair_closed_form(self, linear_instance, lam):
        prices = constrained_pair_optimum(linear_instance, price_spec(lam))
        assert prices == pytest.approx([3.5 - lam / 2.0, 3.5 + lam / 2.0], abs=1e-5)

    @pytest.mark.parametrize("lam", [0.2, 0.5, 0.8])
    def test_gap_is_tight(self, exp_instance, lam):
        solution = solve_clairvoyant(exp_instance, price_spec(lam))
        gap = solution.p_star[1] - solution.p_star[0]
        assert gap == pytest.approx(lam * (solution.p_sharp[1] - solution.p_sharp[0]), abs=1e-9)

    @pytest.mark.parametrize("lam", [0.2, 0.5, 0.8])
    def test_pair_agrees_with_brute_force(self, exp_instance, lam):
        spec = price_spec(lam)
        structural = constrained_pair_optimum(exp_instance, spec)
        brute = brute_force_constrained(exp_instance, spec, grid_step=1e-3)
        assert brute == pytest.approx(structural, abs=2e-3)
        assert exp_instance.total_revenue(brute) <= exp_instance.total_revenue(structural) + 1e-6

    def test_multi_window_is_symmetric(self, linear_multi_instance):
        prices = constrained_multi_optimum(linear_multi_instance, price_spec(0.5))
        assert prices == pytest.approx([3.25, 3.5, 3.75], abs=1e-5)

    def test_multi_agrees_with_brute_force(self, linear_multi_instance):
        spec = price_spec(0.5)
        window = constrained_multi_optimum(linear_multi_instance, spec)
        brute = brute_force_constrained(linear_multi_instance, spec, grid_step=1e-3)
        assert brute == pytest.approx(window, abs=2e-3)

    def test_multi_reduces_to_pair(self, linear_instance):
        spec = price_spec(0.5)
        assert constrained_multi_optimum(linear_instance, spec) == pytest.approx(
            constrained_pair_optimum(linear_instance, spec), abs=1e-5
        )

    def test_log_ratio_discrepancy(self, exp_instance):
        spec = FairnessSpec(lam=0.5, discrepancy=DiscrepancyFunction.log_ratio())
        prices = constrained_discrepancy_optimum(exp_instance, spec)
        assert math.log(prices[1] / prices[0]) == pytest.approx(0.5 * math.log(2.0), abs=1e-5)
        brute = brute_force_constrained(exp_instance, spec, grid_step=5e-3)
        assert brute == pytest.approx(prices, abs=2e-2)

    def test_demand_measure_feasible(self, exp_instance):
        spec = demand_spec(0.5)
        solution = solve_clairvoyant(exp_instance, spec)
        measures = measure_values(exp_instance, spec.measure, solution.p_star)
        assert abs(measures[0] - measures[1]) <= 0.5 * solution.gap_sharp + 1e-3

    def test_sharp_is_optimal_at_lambda_one(self, exp_instance):
        solution = solve_clairvoyant(exp_instance, price_spec(1.0))
        assert solution.p_star == pytest.approx(solution.p_sharp, abs=1e-5)
        assert solution.revenue_star == pytest.approx(solution.revenue_sharp, abs=1e-9)

    def test_nonregular_falls_back_to_grid(self):
        instance = resolve_instance("invprop-paper")
        solution = solve_clairvoyant(instance, price_spec(0.5))
        assert solution.p_star[1] - solution.p_star[0] <= 0.5 * solution.gap_sharp + 1e-9

    def test_brute_force_limits(self, exp_instance):
        with pytest.raises(ConfigError) as excinfo:
            brute_force_constrained(exp_instance, price_spec(0.5), grid_step=1e-5)
        assert excinfo.value.issues[0][0] == "grid_step"

    def test_structural_solver_needs_price_measure(self, exp_instance):
        with pytest.raises(ConfigError):
            constrained_pair_optimum(exp_instance, demand_spec(0.5))


# ======================================================================
# Revenue loss and the solution record
# ======================================================================
class TestRevenueLoss:

    def test_linear_loss_is_quadratic(self, linear_instance):
        curve = revenue_loss_curve(linear_instance, FairnessMeasure.price(), [0.0, 0.5, 1.0])
        assert [lam for lam, _ in curve] == [0.0, 0.5, 1.0]
        assert [loss for _, loss in curve] == pytest.approx([0.05, 0.0125, 0.0], abs=1e-9)

    def test_loss_shrinks_with_lambda(self, exp_instance):
        losses = [loss for _, loss in revenue_loss_curve(exp_instance, FairnessMeasure.price(), [0.0, 0.2, 0.5, 0.8, 1.0])]
        assert all(a >= b - 1e-12 for a, b in zip(losses, losses[1:]))
        assert losses[-1] == pytest.approx(0.0, abs=1e-9)

    def test_solution_json_uses_lambda_key(self, linear_instance):
        data = json.loads(solve_clairvoyant(linear_instance, price_spec(0.5)).to_json())
        assert data["lambda"] == 0.5
        assert data["revenue_sharp"] == pytest.approx(2.5)
        assert data["gap_sharp"] == pytest.approx(1.0, abs=1e-6)
