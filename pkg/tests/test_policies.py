"""Tests for policies/ — schedule, explorers, same-price baselines, registry and pipeline."""

from __future__ import annotations

import math

import numpy as np
import pytest

from fair_pricing.demand import (
    ConstraintMode,
    DemandCurve,
    DiscrepancyFunction,
    FairnessSpec,
    MarketInstance,
    PriceInterval,
)
from fair_pricing.errors import BudgetExhausted, ConfigError, DomainError
from fair_pricing.policies import (
    POLICIES,
    STAGE_III,
    ExplorationSchedule,
    create_graph,
    explore_constrained_discrepancy,
    explore_constrained_general,
    explore_constrained_multi,
    explore_constrained_price,
    explore_unconstrained,
    run_dpa_same_price,
    run_etc_same_price,
    run_trisection_same_price,
    validate_policy,
)
from fair_pricing.policies.state import stage_periods_reducer
from tests.conftest import demand_spec, make_env, price_spec

T_DESK = 100_000


def soft_price_spec(lam: float, gamma: float) -> FairnessSpec:
    return price_spec(lam, mode=ConstraintMode.SOFT, gamma=gamma)


# ======================================================================
# ExplorationSchedule
# ======================================================================
class TestSchedule:

    def test_trisect_count_formula(self):
        schedule = ExplorationSchedule()
        T = T_DESK
        assert schedule.trisect_count(T, 5.0) == math.ceil(625.0 * T**0.8 * math.log(T))
        assert schedule.trisect_count(T, 5.0, n_groups=3) == math.ceil(625.0 * T**0.8 * math.log(3 * T))

    def test_checkpoint_count_formula(self):
        schedule = ExplorationSchedule()
        T = T_DESK
        assert schedule.checkpoint_count(T) == math.ceil(6.0 * T**0.4 * math.log(T))

    def test_counts_are_at_least_one(self):
        schedule = ExplorationSchedule(c_trisect=1e-12, c_checkpoint=1e-12)
        assert schedule.trisect_count(100, 5.0) == 1
        assert schedule.checkpoint_count(100) == 1

    def test_checkpoint_grid(self, exact_schedule):
        grid = exact_schedule.checkpoints(T_DESK, PriceInterval(0.0, 5.0))
        assert len(grid) == 50
        assert grid[0] == pytest.approx(0.1)
        assert grid[-1] == pytest.approx(5.0)

    def test_default_thresholds_shrink_with_T(self):
        schedule = ExplorationSchedule()
        assert schedule.stop_width(T_DESK) == pytest.approx(4.0 * T_DESK**-0.2)
        assert schedule.slack(T_DESK) == pytest.approx(8.0 * T_DESK**-0.2)

    def test_threshold_coefficients(self):
        schedule = ExplorationSchedule(stop_coef=3.0, slack_coef=10.0)
        assert schedule.stop_width(100_000) == pytest.approx(0.3)
        assert schedule.slack(100_000) == pytest.approx(1.0)
        pinned = ExplorationSchedule(slack_coef=10.0, xi_slack=0.25)
        assert pinned.slack(100_000) == 0.25

    def test_stop_coefficient_must_be_positive(self):
        with pytest.raises(ConfigError) as excinfo:
            ExplorationSchedule(stop_coef=0.0, slack_coef=-1.0)
        keys = [key for key, _ in excinfo.value.issues]
        assert keys == ["schedule.stop_coef", "schedule.slack_coef"]

    def test_invalid_multiplier(self):
        with pytest.raises(ConfigError) as excinfo:
            ExplorationSchedule(c_trisect=0.0, xi_slack=-1.0)
        keys = [key for key, _ in excinfo.value.issues]
        assert keys == ["schedule.c_trisect", "schedule.xi_slack"]


# ======================================================================
# EnvironmentHandle
# ======================================================================
class TestEnvironment:

    def test_block_is_cut_at_horizon(self, linear_noise_off):
        env = make_env(linear_noise_off, 10)
        rows = env.post([3.0, 4.0], 25)
        assert rows.shape == (10, 2)
        assert env.exhausted
        with pytest.raises(BudgetExhausted):
            env.post([3.0, 4.0], 1)

    def test_prices_must_be_in_domain(self, linear_noise_off):
        env = make_env(linear_noise_off, 10)
        with pytest.raises(DomainError):
            env.post([3.0, 6.0])
        with pytest.raises(DomainError):
            env.post([3.0])

    def test_commit_serves_the_rest(self, linear_noise_off):
        env = make_env(linear_noise_off, 10)
        env.post([3.0, 4.0], 4)
        assert env.commit([3.0, 4.0]) == 6
        assert env.commit([3.0, 4.0]) == 0


# ======================================================================
# Stage I
# ======================================================================
class TestExploreUnconstrained:

    def test_noise_off_finds_sharp_prices(self, exp_noise_off, exact_schedule):
        env = make_env(exp_noise_off, T_DESK)
        estimates = [explore_unconstrained(env, z, exact_schedule) for z in range(2)]
        assert estimates == pytest.approx([1.0, 2.0], abs=0.005)

    def test_interval_shrinks_by_two_thirds(self, exp_noise_off, exact_schedule):
        env = make_env(exp_noise_off, T_DESK)
        intervals: list[tuple[float, float]] = []
        explore_unconstrained(env, 0, exact_schedule, intervals=intervals)
        assert intervals[0] == (0.0, 5.0)
        widths = [hi - lo for lo, hi in intervals]
        for before, after in zip(widths, widths[1:]):
            assert after == pytest.approx(2.0 / 3.0 * before, rel=1e-9)
        assert widths[-1] <= 0.01 < widths[-2]

    def test_offers_are_uniform(self, exp_noise_off, exact_schedule):
        class Recorder:
            def __init__(self):
                self.blocks = []

            def record_block(self, stage, prices, demands):
                self.blocks.append((stage, prices.copy()))

        recorder = Recorder()
        env = make_env(exp_noise_off, T_DESK, recorder=recorder)
        explore_unconstrained(env, 1, exact_schedule)
        assert recorder.blocks
        for stage, prices in recorder.blocks:
            assert stage == "I"
            assert prices[0] == prices[1]

    def test_budget_runs_out(self, exp_noise_off):
        env = make_env(exp_noise_off, 15)
        estimate = explore_unconstrained(env, 0, ExplorationSchedule())
        assert env.exhausted
        assert estimate == pytest.approx(2.5)


# ======================================================================
# Stage II
# ======================================================================
class TestExploreConstrained:

    def test_price_variant_finds_constrained_optimum(self, linear_noise_off, exact_schedule):
        env = make_env(linear_noise_off, T_DESK)
        result = explore_constrained_price(env, [3.0, 4.0], 0.5, exact_schedule)
        assert result.prices.tolist() == pytest.approx([3.25, 3.75], abs=1e-9)
        assert result.completed == 50
        assert not result.degenerate

    def test_price_variant_orders_by_estimate(self, linear_noise_off, exact_schedule):
        env = make_env(linear_noise_off, T_DESK)
        result = explore_constrained_price(env, [4.0, 3.0], 0.5, exact_schedule)
        assert result.prices[0] > result.prices[1]

    @pytest.mark.parametrize("p_hat,lam", [([3.5, 3.5], 0.5), ([3.0, 4.0], 0.0)])
    def test_equal_prices_when_nothing_to_separate(self, linear_noise_off, exact_schedule, p_hat, lam):
        env = make_env(linear_noise_off, T_DESK)
        result = explore_constrained_price(env, p_hat, lam, exact_schedule)
        assert result.prices[0] == result.prices[1]

    def test_estimates_within_slack_give_equal_prices(self, linear_noise_off, small_schedule):
        env = make_env(linear_noise_off, T_DESK)
        assert small_schedule.slack(T_DESK) > 0.5
        result = explore_constrained_price(env, [3.0, 3.5], 1.0, small_schedule)
        assert result.prices[0] == result.prices[1]

    def test_offered_gaps_never_exceed_lambda_xi(self, exp_instance, exact_schedule):
        class GapRecorder:
            def __init__(self):
                self.gaps = []

            def record_block(self, stage, prices, demands):
                self.gaps.append(abs(prices[1] - prices[0]))

        recorder = GapRecorder()
        env = make_env(exp_instance, T_DESK, seed=3, recorder=recorder)
        explore_constrained_price(env, [1.0, 2.0], 0.5, exact_schedule)
        assert max(recorder.gaps) <= 0.5 + 1e-12

    def test_degenerate_when_no_checkpoint_fits(self, linear_noise_off):
        schedule = ExplorationSchedule()
        assert schedule.checkpoint_count(5) > 5
        env = make_env(linear_noise_off, 5)
        result = explore_constrained_price(env, [3.0, 4.0], 0.5, schedule)
        assert result.degenerate
        assert result.completed == 0
        first = schedule.checkpoints(5, linear_noise_off.domain)[0]
        assert result.prices.tolist() == [first, first]

    def test_multi_variant_on_two_groups_matches_price_variant(self, linear_noise_off, exact_schedule):
        multi = explore_constrained_multi(make_env(linear_noise_off, T_DESK), [3.0, 4.0], 0.5, exact_schedule)
        pair = explore_constrained_price(make_env(linear_noise_off, T_DESK), [3.0, 4.0], 0.5, exact_schedule)
        assert multi.prices.tolist() == pytest.approx(pair.prices.tolist(), abs=1e-9)

    def test_multi_variant_full_lambda(self, linear_multi_noise_off, exact_schedule):
        env = make_env(linear_multi_noise_off, T_DESK)
        result = explore_constrained_multi(env, [3.0, 3.5, 4.0], 1.0, exact_schedule)
        assert result.prices.tolist() == pytest.approx([3.0, 3.5, 4.0], abs=1e-9)

    def test_general_without_penalty_is_independent(self, linear_noise_off, exact_schedule):
        env = make_env(linear_noise_off, T_DESK)
        result = explore_constrained_general(env, [3.0, 4.0], soft_price_spec(0.5, gamma=0.0), exact_schedule)
        assert result.prices.tolist() == pytest.approx([3.0, 4.0], abs=1e-9)

    def test_general_large_penalty_respects_anchor(self, linear_noise_off, exact_schedule):
        env = make_env(linear_noise_off, T_DESK)
        result = explore_constrained_general(env, [3.0, 4.0], soft_price_spec(0.5, gamma=1e3), exact_schedule)
        assert abs(result.prices[1] - result.prices[0]) <= 0.5 + 1e-9
        assert linear_noise_off.total_revenue(result.prices) >= 2.5 - 0.013 - 1e-9

    def test_general_independent_flag(self, linear_noise_off, exact_schedule):
        env = make_env(linear_noise_off, T_DESK)
        spec = soft_price_spec(0.5, gamma=1e3)
        result = explore_constrained_general(env, [3.0, 4.0], spec, exact_schedule, independent=True)
        assert result.prices.tolist() == pytest.approx([3.0, 4.0], abs=1e-9)

    def test_general_demand_measure_runs(self, exp_noise_off, exact_schedule):
        env = make_env(exp_noise_off, T_DESK)
        result = explore_constrained_general(env, [1.0, 2.0], demand_spec(0.5), exact_schedule)
        assert result.completed == 50
        assert exp_noise_off.domain.contains(result.prices)

    def test_general_rejects_many_groups_jointly(self, linear_multi_noise_off, exact_schedule):
        curves = linear_multi_noise_off.curves + (DemandCurve.linear(-0.1, 0.9, PriceInterval(0.0, 5.0)),)
        four = MarketInstance(curves, linear_multi_noise_off.noise)
        env = make_env(four, T_DESK)
        with pytest.raises(ConfigError):
            explore_constrained_general(env, [3.0, 3.5, 4.0, 4.5], soft_price_spec(0.5, 1.0), exact_schedule)

    def test_discrepancy_variant_uses_inverse(self, exp_noise_off, exact_schedule):
        env = make_env(exp_noise_off, T_DESK)
        spec = FairnessSpec(lam=0.5, discrepancy=DiscrepancyFunction.log_ratio())
        result = explore_constrained_discrepancy(env, [1.0, 2.0], spec, exact_schedule)
        low, high = result.prices
        assert high <= 5.0
        if high < 5.0:
            assert math.log(high / low) == pytest.approx(0.5 * math.log(2.0), abs=1e-9)

    def test_discrepancy_difference_matches_price_variant_gap(self, linear_noise_off, exact_schedule):
        env = make_env(linear_noise_off, T_DESK)
        result = explore_constrained_discrepancy(env, [3.0, 4.0], price_spec(0.5), exact_schedule)
        assert result.prices[1] - result.prices[0] == pytest.approx(0.5, abs=1e-9)


# ======================================================================
# Same-price baselines
# ======================================================================
class TestBaselines:

    @pytest.mark.parametrize("run", [run_trisection_same_price, run_etc_same_price, run_dpa_same_price])
    def test_one_price_for_everyone(self, exp_instance, small_schedule, run):
        class Recorder:
            def __init__(self):
                self.blocks = []

            def record_block(self, stage, prices, demands):
                self.blocks.append((stage, prices.copy(), len(demands)))

        recorder = Recorder()
        env = make_env(exp_instance, 5_003, seed=11, recorder=recorder)
        committed = run(env, small_schedule)
        assert env.exhausted
        assert committed[0] == committed[1]
        assert sum(n for _, _, n in recorder.blocks) == 5_003
        assert all(prices[0] == prices[1] for _, prices, _ in recorder.blocks)
        assert recorder.blocks[-1][0] == STAGE_III

    def test_trisection_converges_to_same_price_optimum(self, linear_noise_off, small_schedule):
        env = make_env(linear_noise_off, 20_000)
        committed = run_trisection_same_price(env, small_schedule)
        assert committed.tolist() == pytest.approx([3.5, 3.5], abs=1e-3)


# ======================================================================
# Registry
# ======================================================================
class TestRegistry:

    def test_every_policy_registered(self):
        assert set(POLICIES) == {
            "fdp-dl", "fdp-multi", "fdp-gfm", "fdp-gfm-multi", "fdp-discrepancy",
            "baseline-trisect", "baseline-etc", "baseline-dpa",
            "oracle-replay", "sharp-replay", "etc-independent",
        }

    def test_unknown_policy(self, exp_instance):
        with pytest.raises(ConfigError) as excinfo:
            validate_policy("fdp-magic", exp_instance, price_spec(0.5))
        assert excinfo.value.issues[0][0] == "policy"

    def test_hard_price_policy_rejects_soft_demand(self, exp_instance):
        with pytest.raises(ConfigError) as excinfo:
            validate_policy("fdp-dl", exp_instance, demand_spec(0.5))
        keys = [key for key, _ in excinfo.value.issues]
        assert keys == ["mode", "measure"]

    def test_difference_only(self, exp_instance):
        spec = FairnessSpec(lam=0.5, discrepancy=DiscrepancyFunction.log_ratio())
        with pytest.raises(ConfigError) as excinfo:
            validate_policy("fdp-dl", exp_instance, spec)
        assert excinfo.value.issues[0][0] == "discrepancy"
        assert validate_policy("fdp-discrepancy", exp_instance, spec).name == "fdp-discrepancy"

    def test_group_limits(self, linear_multi_instance):
        with pytest.raises(ConfigError) as excinfo:
            validate_policy("fdp-gfm", linear_multi_instance, demand_spec(0.5))
        assert excinfo.value.issues[0][0] == "instance"
        assert validate_policy("fdp-gfm-multi", linear_multi_instance, demand_spec(0.5)).name == "fdp-gfm-multi"

    def test_baselines_run_in_both_modes(self, exp_instance):
        for name in ("baseline-trisect", "baseline-etc", "baseline-dpa", "etc-independent"):
            validate_policy(name, exp_instance, price_spec(0.5))
            validate_policy(name, exp_instance, demand_spec(0.5))


# ======================================================================
# Pipeline state and graph
# ======================================================================
class TestPipeline:

    def test_reducer_sums_per_stage(self):
        assert stage_periods_reducer({"I": 3}, {"I": 2, "II": 5}) == {"I": 5, "II": 5}

    def test_reducer_empty_inputs(self):
        assert stage_periods_reducer({"I": 3}, {}) == {"I": 3}
        assert stage_periods_reducer({}, {"III": 4}) == {"III": 4}

    def test_graph_has_three_stages(self):
        graph = create_graph()
        assert {"explore_unconstrained", "explore_constrained", "commit"} <= set(graph.nodes)
