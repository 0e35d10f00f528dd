from fair_pricing.oracle.solver import (
    ClairvoyantSolution,
    brute_force_constrained,
    constrained_discrepancy_optimum,
    constrained_multi_optimum,
    constrained_pair_optimum,
    measure_values,
    reset_oracle_cache,
    revenue_loss_curve,
    sharp_prices,
    solve_clairvoyant,
    unconstrained_optimum,
)

__all__ = [
    "ClairvoyantSolution",
    "brute_force_constrained",
    "constrained_discrepancy_optimum",
    "constrained_multi_optimum",
    "constrained_pair_optimum",
    "measure_values",
    "reset_oracle_cache",
    "revenue_loss_curve",
    "sharp_prices",
    "solve_clairvoyant",
    "unconstrained_optimum",
]
