"""Bundled sweep configurations.

Desk-scale multipliers are set from the sample-count formulas so that
Stages I and II together take about half of the horizon on the desk T
grid. The commit slack is 10·T^{−1/5} (1.0 at T = 10⁵): on ``exp-paper``
the group-2 trisection error is skewed to the right by up to 0.5 at desk
sample counts, and a smaller slack lets more than 5% of trials commit a
gap wider than the true one. ``paper-scale`` keeps the same multipliers
on the larger grid with 1000 trials per cell.
"""

from __future__ import annotations

from typing import Any

from fair_pricing.errors import ConfigError
from fair_pricing.experiments.config import SweepConfig, parse_sweep_config

DESK_HORIZONS = [20_000, 50_000, 100_000, 200_000]
PAPER_HORIZONS = [100_000, 200_000, 500_000, 1_000_000]
LAMBDA_GRID = [0.0, 0.2, 0.5, 0.8, 1.0]
DESK_SCHEDULE = {"c_trisect": 1.5e-5, "c_checkpoint": 0.05, "slack_coef": 10.0}
BASELINES = ["baseline-trisect", "baseline-etc", "baseline-dpa"]

PRESETS: dict[str, dict[str, Any]] = {
    "desk-scale-fig1": {
        "name": "desk-scale-fig1",
        "instance": "exp-paper",
        "policies": ["fdp-dl", *BASELINES],
        "lambdas": LAMBDA_GRID,
        "horizons": DESK_HORIZONS,
        "trials": 50,
        "base_seed": 2024,
        "schedule": DESK_SCHEDULE,
        "spec": {"measure": "price", "mode": "hard"},
    },
    "desk-scale-fig2": {
        "name": "desk-scale-fig2",
        "instance": "exp-paper",
        "policies": ["fdp-gfm", *BASELINES],
        "lambdas": LAMBDA_GRID,
        "horizons": DESK_HORIZONS,
        "trials": 50,
        "base_seed": 2024,
        "schedule": DESK_SCHEDULE,
        "spec": {"measure": "demand", "mode": "soft", "gamma": 1.0},
    },
    "desk-scale-linear": {
        "name": "desk-scale-linear",
        "instance": "linear-paper",
        "policies": ["fdp-dl", *BASELINES],
        "lambdas": LAMBDA_GRID,
        "horizons": DESK_HORIZONS,
        "trials": 50,
        "base_seed": 2024,
        "schedule": DESK_SCHEDULE,
        "spec": {"measure": "price", "mode": "hard"},
    },
    "desk-scale-invprop": {
        "name": "desk-scale-invprop",
        "instance": "invprop-paper",
        "policies": ["fdp-dl", *BASELINES],
        "lambdas": LAMBDA_GRID,
        "horizons": DESK_HORIZONS,
        "trials": 50,
        "base_seed": 2024,
        "schedule": DESK_SCHEDULE,
        "spec": {"measure": "price", "mode": "hard"},
    },
    "paper-scale": {
        "name": "paper-scale",
        "instance": "exp-paper",
        "policies": ["fdp-dl", *BASELINES],
        "lambdas": LAMBDA_GRID,
        "horizons": PAPER_HORIZONS,
        "trials": 1000,
        "base_seed": 2024,
        "schedule": DESK_SCHEDULE,
        "spec": {"measure": "price", "mode": "hard"},
    },
}


def get_preset(name: str) -> SweepConfig:
    if name not in PRESETS:
        raise ConfigError("unknown preset", [("preset", f"{name!r} is not one of {', '.join(PRESETS)}")])
    return parse_sweep_config(PRESETS[name], f"preset {name}")
