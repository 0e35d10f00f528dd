from fair_pricing.experiments.config import (
    NoiseConfig,
    OutputConfig,
    ScheduleConfig,
    SpecConfig,
    SweepConfig,
    load_sweep_config,
    parse_sweep_config,
)
from fair_pricing.experiments.presets import PRESETS, get_preset
from fair_pricing.experiments.seeds import cell_key, splitmix64, trial_seed
from fair_pricing.experiments.slopes import SlopeFit, fit_slope
from fair_pricing.experiments.sweep import (
    CellResult,
    SweepCell,
    SweepPlan,
    SweepResult,
    plan_sweep,
    plan_table,
    run_cell,
    run_sweep,
    write_sweep_outputs,
)

__all__ = [
    "PRESETS",
    "CellResult",
    "NoiseConfig",
    "OutputConfig",
    "ScheduleConfig",
    "SlopeFit",
    "SpecConfig",
    "SweepCell",
    "SweepConfig",
    "SweepPlan",
    "SweepResult",
    "cell_key",
    "fit_slope",
    "get_preset",
    "load_sweep_config",
    "parse_sweep_config",
    "plan_sweep",
    "plan_table",
    "run_cell",
    "run_sweep",
    "splitmix64",
    "trial_seed",
    "write_sweep_outputs",
]
