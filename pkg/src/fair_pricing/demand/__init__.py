from fair_pricing.demand.catalog import BUILTIN_INSTANCES, load_catalog, resolve_instance
from fair_pricing.demand.curves import (
    DemandCurve,
    DemandKind,
    PriceInterval,
    RegularityReport,
    check_regularity,
    eval_demand,
    eval_revenue,
)
from fair_pricing.demand.fairness import (
    ConstraintMode,
    DiscrepancyFunction,
    DiscrepancyKind,
    FairnessMeasure,
    FairnessSpec,
    MeasureKind,
    observe_measure,
)
from fair_pricing.demand.lower_bound import LowerBoundReport, make_lower_bound_pair, verify_lb_properties
from fair_pricing.demand.market import MarketInstance, NoiseKind, NoiseModel, sample_demand

__all__ = [
    "BUILTIN_INSTANCES",
    "ConstraintMode",
    "DemandCurve",
    "DemandKind",
    "DiscrepancyFunction",
    "DiscrepancyKind",
    "FairnessMeasure",
    "FairnessSpec",
    "LowerBoundReport",
    "MarketInstance",
    "MeasureKind",
    "NoiseKind",
    "NoiseModel",
    "PriceInterval",
    "RegularityReport",
    "check_regularity",
    "eval_demand",
    "eval_revenue",
    "load_catalog",
    "make_lower_bound_pair",
    "observe_measure",
    "resolve_instance",
    "sample_demand",
    "verify_lb_properties",
]
