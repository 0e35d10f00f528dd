"""Shared fixtures for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from fair_pricing.demand import (
    ConstraintMode,
    FairnessMeasure,
    FairnessSpec,
    NoiseKind,
    NoiseModel,
    resolve_instance,
)
from fair_pricing.oracle import reset_oracle_cache
from fair_pricing.policies import EnvironmentHandle, ExplorationSchedule
from fair_pricing.settings import reset_settings_cache

NOISE_OFF = NoiseModel(NoiseKind.DETERMINISTIC)


@pytest.fixture(autouse=True)
def _clean_caches(monkeypatch):
    """Every test starts from default settings and an empty oracle cache."""
    monkeypatch.delenv("FAIRPRICE_SEED", raising=False)
    reset_settings_cache()
    reset_oracle_cache()
    yield
    reset_settings_cache()


@pytest.fixture
def exp_instance():
    return resolve_instance("exp-paper")


@pytest.fixture
def linear_instance():
    return resolve_instance("linear-paper")


@pytest.fixture
def linear_multi_instance():
    return resolve_instance("linear-multi")


@pytest.fixture
def exp_noise_off(exp_instance):
    return exp_instance.with_noise(NOISE_OFF)


@pytest.fixture
def linear_noise_off(linear_instance):
    return linear_instance.with_noise(NOISE_OFF)


@pytest.fixture
def linear_multi_noise_off(linear_multi_instance):
    return linear_multi_instance.with_noise(NOISE_OFF)


@pytest.fixture
def small_schedule():
    """Tiny sample counts so Stages I and II fit in a few thousand periods."""
    return ExplorationSchedule(c_trisect=1e-6, c_checkpoint=1e-3)


@pytest.fixture
def exact_schedule():
    """Small counts, no ξ slack and 50 checkpoints on [0, 5] at T = 1e5."""
    return ExplorationSchedule(
        c_trisect=1e-6,
        c_checkpoint=1e-3,
        xi_slack=0.0,
        trisect_stop_width=0.01,
        checkpoint_count_scale=0.999,
    )


def price_spec(lam: float, mode: ConstraintMode = ConstraintMode.HARD, gamma: float = 1.0) -> FairnessSpec:
    return FairnessSpec(measure=FairnessMeasure.price(), lam=lam, mode=mode, gamma=gamma)


def demand_spec(lam: float, gamma: float = 1.0) -> FairnessSpec:
    return FairnessSpec(measure=FairnessMeasure.demand(), lam=lam, mode=ConstraintMode.SOFT, gamma=gamma)


def make_env(instance, T: int, seed: int = 0, recorder=None) -> EnvironmentHandle:
    return EnvironmentHandle(instance, T, np.random.default_rng(seed), recorder)
