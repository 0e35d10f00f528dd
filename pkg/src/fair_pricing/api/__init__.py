from fair_pricing.api.main import simulate, solve, sweep

__all__ = ["simulate", "solve", "sweep"]
