from fair_pricing.simulator.trace import (
    Segment,
    TraceRecorder,
    TrialSummary,
    TrialTrace,
    config_fingerprint,
    violation_rate,
)
from fair_pricing.simulator.trial import run_trial

__all__ = [
    "Segment",
    "TraceRecorder",
    "TrialSummary",
    "TrialTrace",
    "config_fingerprint",
    "run_trial",
    "violation_rate",
]
