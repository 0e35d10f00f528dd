"""fair-pricing: explore-then-commit dynamic pricing under group fairness constraints."""

from fair_pricing.api.main import simulate, solve, sweep

__all__ = ["simulate", "solve", "sweep"]
