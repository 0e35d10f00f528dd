"""Per-period accounting of a trial: expected regret, soft penalty and violation flags."""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from fair_pricing.demand.fairness import FairnessSpec
from fair_pricing.demand.market import MarketInstance
from fair_pricing.errors import ConfigError
from fair_pricing.oracle.solver import ClairvoyantSolution
from fair_pricing.policies.environment import STAGE_I, STAGE_II, STAGE_III

logger = logging.getLogger(__name__)

STAGES = (STAGE_I, STAGE_II, STAGE_III)


@dataclass(frozen=True)
class Segment:
    """A run of identical periods: same stage, same posted prices."""

    start: int
    count: int
    stage: str
    prices: tuple[float, ...]
    regret_inc: float
    penalty_inc: float
    violation: bool
    realized_revenue: float

    @property
    def stop(self) -> int:
        return self.start + self.count - 1


class TrialSummary(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    policy: str
    instance: str
    lam: float = Field(alias="lambda")
    gamma: float
    mode: str
    measure: str
    T: int
    seed: int
    regret: float
    penalized_regret: float
    violation_periods: int
    committed_prices: list[float] | None
    sharp_estimates: list[float] | None = None
    stage_periods: dict[str, int]
    degenerate: bool = False
    realized_revenue: float
    fingerprint: str

    @property
    def violated(self) -> bool:
        return self.violation_periods > 0


def config_fingerprint(payload: dict[str, Any]) -> str:
    """sha256 over the canonical JSON of the run configuration."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class TraceRecorder:
    """Receives blocks of served periods from the environment and accounts for them.

    Per-period rows are stored for every ``sample_every``-th period, or for
    all periods when ``full_trace`` is set; the summary always covers the
    whole horizon.
    """

    def __init__(
        self,
        instance: MarketInstance,
        spec: FairnessSpec,
        solution: ClairvoyantSolution,
        *,
        sample_every: int = 1000,
        full_trace: bool = False,
        slack: float = 1e-9,
    ) -> None:
        if sample_every < 1:
            raise ConfigError("invalid trace sampling", [("sample_every", f"must be >= 1, got {sample_every}")])
        self.instance = instance
        self.spec = spec
        self.solution = solution
        self.sample_every = sample_every
        self.full_trace = full_trace
        self.slack = slack
        self.threshold = spec.lam * solution.gap_sharp
        self.segments: list[Segment] = []
        self.rows: list[dict[str, Any]] = []
        self.periods = 0

    # ------------------------------------------------------------------
    # Per-block accounting
    # ------------------------------------------------------------------

    def true_measures(self, prices: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.array([
            float(self.spec.measure.true_value(curve, p))
            for curve, p in zip(self.instance.curves, prices)
        ])

    def assess(self, prices: NDArray[np.float64]) -> tuple[float, float, bool]:
        """(regret, penalty, violation) of one period at *prices*, from the true curves."""
        regret = self.solution.revenue_star - float(self.instance.total_revenue(prices))
        gaps = self.spec.pairwise_gaps(self.true_measures(prices))
        excess = gaps - self.threshold
        excess = np.where(excess > self.slack, excess, 0.0)
        penalty = self.spec.gamma * float(np.sum(excess))
        return regret, penalty, bool(np.any(excess > 0.0))

    def record_block(self, stage: str, prices: NDArray[np.float64], demands: NDArray[np.float64]) -> None:
        count = len(demands)
        if count == 0:
            return
        regret, penalty, violation = self.assess(prices)
        realized = (prices - self.instance.cost) @ demands.T
        start = self.periods + 1
        self.segments.append(
            Segment(
                start=start,
                count=count,
                stage=stage,
                prices=tuple(float(p) for p in prices),
                regret_inc=regret,
                penalty_inc=penalty,
                violation=violation,
                realized_revenue=math.fsum(realized),
            )
        )
        if self.full_trace:
            offsets = range(count)
        else:
            first = (-start) % self.sample_every
            offsets = range(first, count, self.sample_every)
        for k in offsets:
            row: dict[str, Any] = {"period": start + k, "stage": stage}
            for i, p in enumerate(prices, start=1):
                row[f"p_{i}"] = float(p)
            for i, d in enumerate(demands[k], start=1):
                row[f"D_{i}"] = float(d)
            row["regret_inc"] = regret
            row["penalty_inc"] = penalty
            row["violation"] = violation
            row["realized_revenue_inc"] = float(realized[k])
            self.rows.append(row)
        self.periods += count

    # ------------------------------------------------------------------
    # Totals
    # ------------------------------------------------------------------

    def _exact_total(self, attr: str) -> float:
        return math.fsum(
            itertools.chain.from_iterable(itertools.repeat(getattr(s, attr), s.count) for s in self.segments)
        )

    def cumulative_regret(self) -> float:
        return self._exact_total("regret_inc")

    def cumulative_penalty(self) -> float:
        return self._exact_total("penalty_inc")

    def violation_periods(self) -> int:
        return sum(s.count for s in self.segments if s.violation)

    def stage_periods(self) -> dict[str, int]:
        counts = dict.fromkeys(STAGES, 0)
        for s in self.segments:
            counts[s.stage] += s.count
        return counts


@dataclass
class TrialTrace:
    summary: TrialSummary
    segments: list[Segment]
    rows: list[dict[str, Any]] = field(default_factory=list)
    solution: ClairvoyantSolution | None = None

    @property
    def regret(self) -> float:
        return self.summary.regret

    @property
    def penalized_regret(self) -> float:
        return self.summary.penalized_regret

    def stage_sequence(self) -> list[str]:
        """Stage of each segment with consecutive repeats collapsed."""
        return [stage for stage, _ in itertools.groupby(s.stage for s in self.segments)]

    def to_frame(self) -> pd.DataFrame:
        n = self.summary_groups
        columns = (
            ["period", "stage"]
            + [f"p_{i}" for i in range(1, n + 1)]
            + [f"D_{i}" for i in range(1, n + 1)]
            + ["regret_inc", "penalty_inc", "violation", "realized_revenue_inc"]
        )
        return pd.DataFrame(self.rows, columns=columns)

    @property
    def summary_groups(self) -> int:
        if self.segments:
            return len(self.segments[0].prices)
        return len(self.summary.committed_prices or [])

    def to_json(self) -> str:
        return self.summary.model_dump_json(by_alias=True, indent=2)

    def write(self, out_dir: Path, stem: str = "trace", force: bool = False) -> tuple[Path, Path]:
        """Write ``<stem>.csv`` and ``<stem>.json`` into *out_dir*; refuses to overwrite unless *force*."""
        out_dir = Path(out_dir)
        csv_path = out_dir / f"{stem}.csv"
        json_path = out_dir / f"{stem}.json"
        existing = [p for p in (csv_path, json_path) if p.exists()]
        if existing and not force:
            raise ConfigError(
                "output files already exist",
                [("out", f"{p} exists (use --force to overwrite)") for p in existing],
            )
        out_dir.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(csv_path, index=False, lineterminator="\n")
        json_path.write_text(self.to_json() + "\n", encoding="utf-8")
        logger.info("Wrote trace to %s and summary to %s", csv_path, json_path)
        return csv_path, json_path


def violation_rate(traces: list[TrialTrace]) -> tuple[float, float]:
    """(fraction of trials with any violation, fraction of all periods violating)."""
    if not traces:
        raise ConfigError("violation_rate needs at least one trace", [("traces", "empty")])
    trials = sum(1 for t in traces if t.summary.violated)
    periods = sum(t.summary.violation_periods for t in traces)
    horizon = sum(t.summary.T for t in traces)
    return trials / len(traces), periods / horizon
