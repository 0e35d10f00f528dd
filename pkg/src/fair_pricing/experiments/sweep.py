"""Sweep runner: seeded trials per (policy, λ, T) cell, aggregated and fitted."""

from __future__ import annotations

import json
import logging
import math
import os
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from fair_pricing.demand.catalog import load_catalog, resolve_instance
from fair_pricing.demand.fairness import FairnessSpec
from fair_pricing.demand.market import MarketInstance
from fair_pricing.errors import ConfigError
from fair_pricing.experiments.config import SweepConfig
from fair_pricing.experiments.seeds import trial_seed
from fair_pricing.experiments.slopes import fit_slope
from fair_pricing.policies.registry import validate_policy
from fair_pricing.policies.schedule import ExplorationSchedule
from fair_pricing.settings import get_settings
from fair_pricing.simulator.trace import violation_rate
from fair_pricing.simulator.trial import run_trial

logger = logging.getLogger(__name__)

RESULT_COLUMNS = [
    "policy", "instance", "lambda", "T", "trials",
    "mean_regret", "std_regret", "stderr",
    "mean_penalized_regret", "std_penalized_regret", "stderr_penalized",
    "violation_trial_frac", "violation_period_frac", "error",
]
SLOPE_COLUMNS = ["policy", "instance", "lambda", "slope", "intercept", "r2", "n_points", "metric"]


@dataclass(frozen=True)
class SweepCell:
    index: int
    policy: str
    lam: float
    T: int
    seeds: tuple[int, ...]


@dataclass
class CellResult:
    cell: SweepCell
    regrets: list[float] = field(default_factory=list)
    penalized: list[float] = field(default_factory=list)
    violation_trial_frac: float = math.nan
    violation_period_frac: float = math.nan
    error: str | None = None

    def _stats(self, values: list[float]) -> tuple[float, float, float]:
        if self.error or not values:
            return math.nan, math.nan, math.nan
        arr = np.asarray(values, dtype=float)
        std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
        return float(arr.mean()), std, std / math.sqrt(len(arr))

    def to_row(self, instance: str) -> dict[str, Any]:
        mean, std, se = self._stats(self.regrets)
        pmean, pstd, pse = self._stats(self.penalized)
        return {
            "policy": self.cell.policy,
            "instance": instance,
            "lambda": self.cell.lam,
            "T": self.cell.T,
            "trials": len(self.cell.seeds),
            "mean_regret": mean,
            "std_regret": std,
            "stderr": se,
            "mean_penalized_regret": pmean,
            "std_penalized_regret": pstd,
            "stderr_penalized": pse,
            "violation_trial_frac": self.violation_trial_frac,
            "violation_period_frac": self.violation_period_frac,
            "error": self.error or "",
        }


@dataclass
class SweepPlan:
    config: SweepConfig
    instance: MarketInstance
    base_seed: int
    cells: list[SweepCell]

    @property
    def n_trials(self) -> int:
        return sum(len(c.seeds) for c in self.cells)


@dataclass
class SweepResult:
    plan: SweepPlan
    cells: list[CellResult]
    slopes: list[dict[str, Any]]

    def results_frame(self) -> pd.DataFrame:
        return pd.DataFrame([c.to_row(self.plan.instance.name) for c in self.cells], columns=RESULT_COLUMNS)

    def slopes_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.slopes, columns=SLOPE_COLUMNS)

    def manifest(self) -> dict[str, Any]:
        plan = self.plan
        return {
            "config": plan.config.model_dump(mode="json"),
            "instance": plan.instance.name,
            "base_seed": plan.base_seed,
            "seed_mixing": "splitmix64(splitmix64(splitmix64(base) ^ sha256('policy|lambda|T')[:8]) ^ trial)",
            "cells": [
                {"policy": c.policy, "lambda": c.lam, "T": c.T, "seeds": list(c.seeds)}
                for c in plan.cells
            ],
            "failed_cells": [c.cell.index for c in self.cells if c.error],
        }


# ----------------------------------------------------------------------
# Planning
# ----------------------------------------------------------------------


def _specs(config: SweepConfig) -> dict[float, FairnessSpec]:
    specs: dict[float, FairnessSpec] = {}
    issues: list[tuple[str, str]] = []
    for i, lam in enumerate(config.lambdas):
        try:
            specs[lam] = config.spec.to_spec(lam)
        except ConfigError as e:
            issues.extend((f"lambdas.{i}.{key}", msg) for key, msg in e.issues)
    if issues:
        raise ConfigError("invalid fairness settings", issues)
    return specs


def plan_sweep(config: SweepConfig) -> SweepPlan:
    """Resolve the instance, check every policy against it and derive all trial seeds; runs nothing."""
    settings = get_settings()
    catalog = load_catalog(Path(config.catalog)) if config.catalog else None
    instance = resolve_instance(config.instance, catalog)
    if config.noise is not None:
        instance = instance.with_noise(config.noise.to_noise())
    specs = _specs(config)

    issues: list[tuple[str, str]] = []
    for i, policy in enumerate(config.policies):
        try:
            validate_policy(policy, instance, next(iter(specs.values())))
        except ConfigError as e:
            issues.extend((f"policies.{i}", msg) for _, msg in e.issues)
    if issues:
        raise ConfigError("sweep policies are incompatible with the instance or spec", issues)
    config.schedule.to_schedule()

    base_seed = settings.FAIRPRICE_SEED if settings.FAIRPRICE_SEED is not None else config.base_seed
    cells = []
    for policy in config.policies:
        for lam in config.lambdas:
            for T in config.horizons:
                seeds = tuple(trial_seed(base_seed, policy, lam, T, k) for k in range(config.trials))
                cells.append(SweepCell(len(cells), policy, lam, T, seeds))
    return SweepPlan(config=config, instance=instance, base_seed=base_seed, cells=cells)


# ----------------------------------------------------------------------
# Execution
# ----------------------------------------------------------------------


def run_cell(
    cell: SweepCell,
    instance: MarketInstance,
    spec: FairnessSpec,
    schedule: ExplorationSchedule,
) -> CellResult:
    """Run a cell's trials in seed order; any failure marks the whole cell failed."""
    result = CellResult(cell)
    try:
        traces = [run_trial(instance, spec, cell.policy, schedule, cell.T, seed) for seed in cell.seeds]
    except Exception as e:
        logger.warning("Cell %s lambda=%g T=%d failed: %s", cell.policy, cell.lam, cell.T, e)
        result.error = f"{type(e).__name__}: {e}"
        return result
    result.regrets = [t.regret for t in traces]
    result.penalized = [t.penalized_regret for t in traces]
    result.violation_trial_frac, result.violation_period_frac = violation_rate(traces)
    return result


def _resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = get_settings().WORKERS
    if workers is None:
        workers = os.cpu_count() or 1
    if workers < 1:
        raise ConfigError("invalid worker count", [("workers", f"must be >= 1, got {workers}")])
    return workers


def fit_sweep_slopes(plan: SweepPlan, cells: list[CellResult]) -> list[dict[str, Any]]:
    """Log-log slope per (policy, λ) over the horizon grid; soft specs fit the penalized regret."""
    soft = plan.config.spec.mode == "soft"
    metric = "mean_penalized_regret" if soft else "mean_regret"
    rows = []
    for policy in plan.config.policies:
        for lam in plan.config.lambdas:
            group = [c for c in cells if c.cell.policy == policy and c.cell.lam == lam and not c.error]
            if len(group) < 3:
                continue
            points = [
                (c.cell.T, float(np.mean(c.penalized if soft else c.regrets)))
                for c in sorted(group, key=lambda c: c.cell.T)
            ]
            try:
                fit = fit_slope(points)
            except ConfigError as e:
                logger.warning("No slope for %s at lambda=%g: %s", policy, lam, e)
                continue
            rows.append({
                "policy": policy,
                "instance": plan.instance.name,
                "lambda": lam,
                "slope": fit.slope,
                "intercept": fit.intercept,
                "r2": fit.r_squared,
                "n_points": len(fit.points),
                "metric": metric,
            })
    return rows


def run_sweep(
    config: SweepConfig,
    workers: int | None = None,
    on_cell: Callable[[CellResult], None] | None = None,
) -> SweepResult:
    """
    Run every cell of *config* and aggregate.

    Cells run in a process pool when more than one worker is allowed;
    results are reordered by cell index before aggregation so the output
    never depends on completion order.

    Args:
        config: Validated sweep config.
        workers: Worker processes; defaults to Settings.WORKERS, then the core count.
        on_cell: Called in the parent process as each cell finishes.

    Returns:
        The SweepResult with per-cell statistics and slope fits.
    """
    plan = plan_sweep(config)
    specs = _specs(config)
    schedule = config.schedule.to_schedule()
    n_workers = min(_resolve_workers(workers), max(1, len(plan.cells)))
    logger.info("Running %d cells (%d trials) on %d worker(s)", len(plan.cells), plan.n_trials, n_workers)

    finished: dict[int, CellResult] = {}
    if n_workers == 1:
        for cell in plan.cells:
            finished[cell.index] = run_cell(cell, plan.instance, specs[cell.lam], schedule)
            logger.info("Finished cell %s lambda=%g T=%d", cell.policy, cell.lam, cell.T)
            if on_cell:
                on_cell(finished[cell.index])
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            futures = {
                pool.submit(run_cell, cell, plan.instance, specs[cell.lam], schedule): cell
                for cell in plan.cells
            }
            for future in as_completed(futures):
                cell = futures[future]
                try:
                    finished[cell.index] = future.result()
                except Exception as e:
                    logger.warning("Worker for cell %s lambda=%g T=%d died: %s", cell.policy, cell.lam, cell.T, e)
                    finished[cell.index] = CellResult(cell, error=f"{type(e).__name__}: {e}")
                logger.info("Finished cell %s lambda=%g T=%d", cell.policy, cell.lam, cell.T)
                if on_cell:
                    on_cell(finished[cell.index])

    cells = [finished[i] for i in range(len(plan.cells))]
    return SweepResult(plan=plan, cells=cells, slopes=fit_sweep_slopes(plan, cells))


# ----------------------------------------------------------------------
# Output
# ----------------------------------------------------------------------


def output_paths(config: SweepConfig, out_dir: Path | None = None) -> dict[str, Path]:
    root = Path(out_dir or config.output.dir or get_settings().OUTPUT_DIR)
    return {
        "results": root / config.output.results,
        "slopes": root / config.output.slopes,
        "manifest": root / config.output.manifest,
    }


def write_sweep_outputs(result: SweepResult, out_dir: Path | None = None, force: bool = False) -> dict[str, Path]:
    """Write results CSV, slopes CSV and the JSON manifest; existing files need *force*."""
    paths = output_paths(result.plan.config, out_dir)
    existing = [p for p in paths.values() if p.exists()]
    if existing and not force:
        raise ConfigError(
            "output files already exist",
            [("out", f"{p} exists (use --force to overwrite)") for p in existing],
        )
    next(iter(paths.values())).parent.mkdir(parents=True, exist_ok=True)
    result.results_frame().to_csv(paths["results"], index=False, lineterminator="\n")
    result.slopes_frame().to_csv(paths["slopes"], index=False, lineterminator="\n")
    manifest = result.manifest()
    manifest["created_at"] = datetime.now(timezone.utc).isoformat()
    paths["manifest"].write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    logger.info("Wrote sweep outputs to %s", paths["results"].parent)
    return paths


def plan_table(plan: SweepPlan) -> list[dict[str, Any]]:
    """Cell listing for dry runs."""
    return [
        {**asdict(cell), "seeds": len(cell.seeds)}
        for cell in plan.cells
    ]
