"""Sweep configuration files: YAML on disk, pydantic models in memory."""

from __future__ import annotations

from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from fair_pricing.demand.fairness import (
    ConstraintMode,
    DiscrepancyFunction,
    DiscrepancyKind,
    FairnessMeasure,
    FairnessSpec,
    MeasureKind,
)
from fair_pricing.demand.market import NoiseKind, NoiseModel
from fair_pricing.errors import ConfigError, validation_issues
from fair_pricing.policies.registry import POLICY_NAMES
from fair_pricing.policies.schedule import ExplorationSchedule


class ScheduleConfig(BaseModel):
    """Exploration multipliers; None thresholds derive from T."""

    model_config = ConfigDict(extra="forbid")

    c_trisect: float = Field(default=1.0, gt=0)
    c_checkpoint: float = Field(default=1.0, gt=0)
    trisect_stop_width: float | None = Field(default=None, ge=0)
    xi_slack: float | None = Field(default=None, ge=0)
    stop_coef: float = Field(default=4.0, gt=0)
    slack_coef: float = Field(default=8.0, ge=0)
    checkpoint_count_scale: float = Field(default=1.0, gt=0)
    K: float = Field(default=1.0, gt=0)
    C: float = Field(default=1.0, gt=0)
    K_prime: float = Field(default=1.0, gt=0)
    M_bar: float = Field(default=1.0, gt=0)

    def to_schedule(self) -> ExplorationSchedule:
        return ExplorationSchedule(**self.model_dump())


class SpecConfig(BaseModel):
    """Fairness measure, mode and soft penalty weight shared by every cell."""

    model_config = ConfigDict(extra="forbid")

    measure: Literal["price", "demand"] = "price"
    mode: Literal["hard", "soft"] = "hard"
    gamma: float = Field(default=1.0, ge=0)
    discrepancy: Literal["difference", "log_ratio"] = "difference"
    epsilon: float = Field(default=0.0, ge=0)

    def to_spec(self, lam: float) -> FairnessSpec:
        if self.discrepancy == DiscrepancyKind.LOG_RATIO:
            discrepancy = DiscrepancyFunction.log_ratio(self.epsilon)
        else:
            discrepancy = DiscrepancyFunction.difference()
        return FairnessSpec(
            measure=FairnessMeasure(MeasureKind(self.measure)),
            lam=lam,
            mode=ConstraintMode(self.mode),
            gamma=self.gamma,
            discrepancy=discrepancy,
        )


class NoiseConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: NoiseKind = NoiseKind.BERNOULLI
    sigma: float = Field(default=0.0, ge=0)

    def to_noise(self) -> NoiseModel:
        return NoiseModel(self.kind, self.sigma)


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dir: str | None = None
    results: str = "results.csv"
    slopes: str = "slopes.csv"
    manifest: str = "manifest.json"


class SweepConfig(BaseModel):
    """One experiment grid: policies × λ × T, ``trials`` seeded trials per cell.

    Example::

        name: fig1
        instance: exp-paper
        policies: [fdp-dl, baseline-trisect, baseline-etc]
        lambdas: [0.0, 0.2, 0.5, 0.8, 1.0]
        horizons: [20000, 50000, 100000, 200000]
        trials: 50
        base_seed: 2024
        schedule: {c_trisect: 1.5e-5, c_checkpoint: 0.05, slack_coef: 10.0}
        spec: {measure: price, mode: hard}
    """

    model_config = ConfigDict(extra="forbid")

    name: str = "sweep"
    instance: str
    catalog: str | None = None
    policies: list[str] = Field(min_length=1)
    lambdas: list[float] = Field(min_length=1)
    horizons: list[int] = Field(min_length=1)
    trials: int = Field(default=10, ge=1)
    base_seed: int = Field(default=0, ge=0)
    schedule: ScheduleConfig = ScheduleConfig()
    spec: SpecConfig = SpecConfig()
    noise: NoiseConfig | None = None
    output: OutputConfig = OutputConfig()

    @field_validator("policies")
    @classmethod
    def _known_policies(cls, value: list[str]) -> list[str]:
        unknown = [name for name in value if name not in POLICY_NAMES]
        if unknown:
            raise ValueError(f"unknown policies {unknown}; expected any of {', '.join(POLICY_NAMES)}")
        if len(set(value)) != len(value):
            raise ValueError("policies must not repeat")
        return value

    @field_validator("lambdas")
    @classmethod
    def _lambda_range(cls, value: list[float]) -> list[float]:
        outside = [lam for lam in value if not 0.0 <= lam <= 1.0]
        if outside:
            raise ValueError(f"lambda values must lie in [0, 1], got {outside}")
        return value

    @field_validator("horizons")
    @classmethod
    def _increasing_horizons(cls, value: list[int]) -> list[int]:
        if any(T < 1 for T in value):
            raise ValueError("horizons must be >= 1")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError(f"horizons must be strictly increasing, got {value}")
        return value

    @property
    def n_cells(self) -> int:
        return len(self.policies) * len(self.lambdas) * len(self.horizons)

    @property
    def n_trials(self) -> int:
        return self.n_cells * self.trials


def parse_sweep_config(raw: object, source: str = "<config>") -> SweepConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"sweep config {source} must be a mapping", [("config", "expected a mapping")])
    try:
        return SweepConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"invalid sweep config {source}", validation_issues(e)) from e


def load_sweep_config(path: Path) -> SweepConfig:
    """Read and validate a YAML sweep config; every schema violation is reported at once."""
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot read sweep config {path}: {e}") from e
    return parse_sweep_config(raw, str(path))
