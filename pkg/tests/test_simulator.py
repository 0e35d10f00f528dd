"""Tests for simulator/ — trial accounting, traces and violation statistics."""

from __future__ import annotations

import json
import math

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from fair_pricing.errors import ConfigError, DomainError
from fair_pricing.policies import ExplorationSchedule
from fair_pricing.simulator import config_fingerprint, run_trial, violation_rate
from tests.conftest import demand_spec, price_spec

SMALL = ExplorationSchedule(c_trisect=1e-6, c_checkpoint=1e-3)


# ======================================================================
# Stage layout and budget
# ======================================================================
class TestStages:

    def test_tiny_horizon_never_leaves_stage_one(self, exp_instance):
        trace = run_trial(exp_instance, price_spec(0.5), "fdp-dl", ExplorationSchedule(), 15, seed=1)
        assert trace.summary.stage_periods == {"I": 15, "II": 0, "III": 0}
        assert trace.summary.committed_prices is None
        assert trace.summary.violation_periods == 0
        assert trace.stage_sequence() == ["I"]

    def test_three_stages_in_order(self, exp_instance):
        trace = run_trial(exp_instance, price_spec(0.5), "fdp-dl", SMALL, 20_000, seed=2)
        assert trace.stage_sequence() == ["I", "II", "III"]
        assert sum(trace.summary.stage_periods.values()) == 20_000
        assert len(trace.summary.sharp_estimates) == 2

    @settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(
        policy=st.sampled_from(["fdp-dl", "fdp-multi", "baseline-trisect", "baseline-etc", "baseline-dpa", "sharp-replay"]),
        T=st.integers(min_value=1, max_value=3_000),
        seed=st.integers(min_value=0, max_value=2**32),
    )
    def test_budget_is_conserved(self, exp_instance, policy, T, seed):
        trace = run_trial(exp_instance, price_spec(0.5), policy, SMALL, T, seed)
        assert sum(trace.summary.stage_periods.values()) == T
        assert sum(s.count for s in trace.segments) == T
        order = {"I": 0, "II": 1, "III": 2}
        sequence = [order[stage] for stage in trace.stage_sequence()]
        assert sequence == sorted(sequence)

    def test_rejects_bad_arguments(self, exp_instance):
        with pytest.raises(DomainError):
            run_trial(exp_instance, price_spec(0.5), "fdp-dl", SMALL, 0, seed=1)
        with pytest.raises(DomainError):
            run_trial(exp_instance, price_spec(0.5), "fdp-dl", SMALL, 100, seed=-1)
        with pytest.raises(ConfigError):
            run_trial(exp_instance, demand_spec(0.5), "fdp-dl", SMALL, 100, seed=1)


# ======================================================================
# Regret and violations
# ======================================================================
class TestAccounting:

    def test_oracle_replay_has_no_regret(self, exp_instance):
        T = 5_000
        trace = run_trial(exp_instance, price_spec(0.5), "oracle-replay", SMALL, T, seed=3)
        assert abs(trace.regret) <= T * 1e-9
        assert trace.summary.violation_periods == 0
        assert trace.stage_sequence() == ["III"]

    def test_sharp_replay_is_free_at_full_lambda(self, exp_instance):
        T = 5_000
        trace = run_trial(exp_instance, price_spec(1.0), "sharp-replay", SMALL, T, seed=3)
        assert abs(trace.regret) <= T * 1e-6
        assert trace.summary.violation_periods == 0

    def test_sharp_replay_violates_tight_constraint(self, exp_instance):
        T = 1_000
        trace = run_trial(exp_instance, price_spec(0.5), "sharp-replay", SMALL, T, seed=3)
        assert trace.summary.violation_periods == T
        assert trace.regret < 0

    @pytest.mark.parametrize("policy", ["baseline-trisect", "baseline-etc", "baseline-dpa"])
    def test_same_price_baselines_never_violate(self, exp_instance, policy):
        trace = run_trial(exp_instance, price_spec(0.3), policy, SMALL, 5_000, seed=4)
        assert trace.summary.violation_periods == 0
        prices = trace.summary.committed_prices
        assert prices[0] == prices[1]

    def test_fdp_dl_without_noise_never_violates(self, exp_noise_off):
        for lam in (0.2, 0.5, 0.8):
            trace = run_trial(exp_noise_off, price_spec(lam), "fdp-dl", SMALL, 30_000, seed=5)
            assert trace.summary.violation_periods == 0

    def test_zero_penalty_matches_independent_learner(self, exp_instance):
        spec = demand_spec(0.5, gamma=0.0)
        gfm = run_trial(exp_instance, spec, "fdp-gfm", SMALL, 10_000, seed=6, full_trace=True)
        independent = run_trial(exp_instance, spec, "etc-independent", SMALL, 10_000, seed=6, full_trace=True)
        assert gfm.summary.committed_prices == independent.summary.committed_prices
        assert gfm.regret == independent.regret
        assert gfm.rows == independent.rows

    def test_soft_penalty_counts_only_excess(self, linear_instance):
        trace = run_trial(linear_instance, demand_spec(0.0, gamma=2.0), "sharp-replay", SMALL, 100, seed=7)
        step = trace.segments[0]
        assert step.violation
        assert step.penalty_inc == pytest.approx(2.0 * 0.1, abs=1e-5)
        assert trace.penalized_regret - trace.regret == pytest.approx(100 * step.penalty_inc)

    def test_full_trace_rows_sum_to_regret(self, exp_instance):
        trace = run_trial(exp_instance, price_spec(0.5), "fdp-dl", SMALL, 4_000, seed=8, full_trace=True)
        assert len(trace.rows) == 4_000
        assert math.fsum(row["regret_inc"] for row in trace.rows) == trace.summary.regret
        assert [row["period"] for row in trace.rows] == list(range(1, 4_001))

    def test_sampled_rows(self, exp_instance):
        trace = run_trial(exp_instance, price_spec(0.5), "fdp-dl", SMALL, 4_000, seed=8, sample_every=1_000)
        assert [row["period"] for row in trace.rows] == [1_000, 2_000, 3_000, 4_000]

    def test_same_seed_same_trial(self, exp_instance):
        first = run_trial(exp_instance, price_spec(0.5), "fdp-dl", SMALL, 6_000, seed=9)
        second = run_trial(exp_instance, price_spec(0.5), "fdp-dl", SMALL, 6_000, seed=9)
        assert first.summary == second.summary
        assert first.rows == second.rows


# ======================================================================
# Violation statistics
# ======================================================================
class TestViolationRate:

    def test_rates(self, exp_instance):
        clean = run_trial(exp_instance, price_spec(0.5), "oracle-replay", SMALL, 100, seed=1)
        dirty = run_trial(exp_instance, price_spec(0.5), "sharp-replay", SMALL, 300, seed=1)
        trials, periods = violation_rate([clean, dirty])
        assert trials == 0.5
        assert periods == pytest.approx(300 / 400)

    def test_empty_list(self):
        with pytest.raises(ConfigError):
            violation_rate([])


# ======================================================================
# Output files
# ======================================================================
class TestTraceOutput:

    def test_write_and_refuse_overwrite(self, exp_instance, tmp_path):
        trace = run_trial(exp_instance, price_spec(0.5), "fdp-dl", SMALL, 3_000, seed=2)
        csv_path, json_path = trace.write(tmp_path, stem="run")
        assert csv_path.read_text().splitlines()[0].startswith("period,stage,p_1,p_2,D_1,D_2,regret_inc")
        data = json.loads(json_path.read_text())
        assert data["lambda"] == 0.5
        assert data["fingerprint"] == trace.summary.fingerprint
        with pytest.raises(ConfigError):
            trace.write(tmp_path, stem="run")
        trace.write(tmp_path, stem="run", force=True)

    def test_fingerprint_is_order_independent(self):
        assert config_fingerprint({"a": 1, "b": [1, 2]}) == config_fingerprint({"b": [1, 2], "a": 1})
        assert config_fingerprint({"a": 1}) != config_fingerprint({"a": 2})
