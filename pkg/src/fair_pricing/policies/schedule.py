from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray

from fair_pricing.demand.curves import PriceInterval
from fair_pricing.errors import ConfigError


@dataclass(frozen=True)
class ExplorationSchedule:
    """Sample-count knobs of the explore-then-commit policies.

    With both multipliers at 1 the counts are the theoretical ones:
    ``25K⁴p̄²/C² · T^{4/5} · ln T`` per trisection point and
    ``6 · T^{2/5} · ln T`` per checkpoint. Multi-group variants use
    ln(NT) instead of ln T. ``None`` stop width / slack derive from T as
    ``stop_coef · T^{−1/5}`` and ``slack_coef · T^{−1/5}``.
    """

    c_trisect: float = 1.0
    c_checkpoint: float = 1.0
    trisect_stop_width: float | None = None
    xi_slack: float | None = None
    stop_coef: float = 4.0
    slack_coef: float = 8.0
    checkpoint_count_scale: float = 1.0
    K: float = 1.0
    C: float = 1.0
    K_prime: float = 1.0
    M_bar: float = 1.0

    def __post_init__(self) -> None:
        issues = []
        for name in ("c_trisect", "c_checkpoint", "stop_coef", "checkpoint_count_scale", "K", "C", "K_prime", "M_bar"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                issues.append((f"schedule.{name}", f"must be finite and > 0, got {value}"))
        for name in ("trisect_stop_width", "xi_slack", "slack_coef"):
            value = getattr(self, name)
            if value is not None and not (value >= 0 and math.isfinite(value)):
                issues.append((f"schedule.{name}", f"must be >= 0, got {value}"))
        if issues:
            raise ConfigError("invalid exploration schedule", issues)

    # ------------------------------------------------------------------
    # Sample counts
    # ------------------------------------------------------------------

    @staticmethod
    def _log_term(T: int, n_groups: int | None) -> float:
        return math.log(n_groups * T) if n_groups else math.log(T)

    def trisect_count(self, T: int, p_hi: float, n_groups: int | None = None) -> int:
        """Periods per trisection point; pass *n_groups* for the multi-group count."""
        base = 25.0 * self.K**4 * p_hi**2 / self.C**2
        raw = self.c_trisect * base * T**0.8 * self._log_term(T, n_groups)
        return max(1, math.ceil(raw))

    def checkpoint_count(self, T: int, n_groups: int | None = None) -> int:
        raw = self.c_checkpoint * 6.0 * T**0.4 * self._log_term(T, n_groups)
        return max(1, math.ceil(raw))

    # ------------------------------------------------------------------
    # Grids and thresholds
    # ------------------------------------------------------------------

    def n_checkpoints(self, T: int, domain: PriceInterval) -> int:
        return max(1, math.ceil(self.checkpoint_count_scale * domain.width * T**0.2))

    def checkpoints(self, T: int, domain: PriceInterval) -> NDArray[np.float64]:
        """Checkpoint prices ℓ_j = p̲ + (j/J)(p̄ − p̲), j = 1..J."""
        J = self.n_checkpoints(T, domain)
        return domain.lo + np.arange(1, J + 1) / J * domain.width

    def stop_width(self, T: int) -> float:
        return self.stop_coef * T**-0.2 if self.trisect_stop_width is None else self.trisect_stop_width

    def slack(self, T: int) -> float:
        return self.slack_coef * T**-0.2 if self.xi_slack is None else self.xi_slack

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)
