"""Named market instances: the built-ins and YAML catalog files."""

from __future__ import annotations

import re
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from fair_pricing.demand.curves import DemandCurve, PriceInterval
from fair_pricing.demand.lower_bound import make_lower_bound_pair
from fair_pricing.demand.market import MarketInstance, NoiseKind, NoiseModel
from fair_pricing.errors import ConfigError, validation_issues

_LB_PATTERN = re.compile(r"^lb-pair(?P<alt>-alt)?\(\s*(?P<A>[^,\s]+)\s*,\s*(?P<h>[^)\s]+)\s*\)$")

PAPER_DOMAIN = PriceInterval(0.0, 5.0)


def _exp_paper() -> MarketInstance:
    return MarketInstance(
        (
            DemandCurve.exponential(0.5, 1.0, PAPER_DOMAIN, label="d1"),
            DemandCurve.exponential(0.5, 0.5, PAPER_DOMAIN, label="d2"),
        ),
        name="exp-paper",
    )


def _linear_paper() -> MarketInstance:
    return MarketInstance(
        (
            DemandCurve.linear(-0.1, 0.6, PAPER_DOMAIN, label="d1"),
            DemandCurve.linear(-0.1, 0.8, PAPER_DOMAIN, label="d2"),
        ),
        name="linear-paper",
    )


def _linear_multi() -> MarketInstance:
    return MarketInstance(
        tuple(
            DemandCurve.linear(-0.1, intercept, PAPER_DOMAIN, label=f"d{idx}")
            for idx, intercept in enumerate((0.6, 0.7, 0.8), start=1)
        ),
        name="linear-multi",
    )


def _invprop_paper() -> MarketInstance:
    return MarketInstance(
        (
            DemandCurve.inverse_proportional(2.0, PAPER_DOMAIN, label="d1"),
            DemandCurve.inverse_proportional(4.0, PAPER_DOMAIN, label="d2"),
        ),
        name="invprop-paper",
    )


BUILTIN_INSTANCES = {
    "exp-paper": _exp_paper,
    "linear-paper": _linear_paper,
    "linear-multi": _linear_multi,
    "invprop-paper": _invprop_paper,
}


# ----------------------------------------------------------------------
# Catalog file schema
# ----------------------------------------------------------------------


class CurveConfig(BaseModel):
    """One group's curve in a catalog file."""

    kind: Literal["linear", "exponential", "inverse_proportional", "tabulated"]
    slope: float | None = Field(default=None, description="linear: dd/dp")
    intercept: float | None = Field(default=None, description="linear: d(0)")
    scale: float | None = Field(default=None, description="exponential: d(1)")
    rate: float | None = Field(default=None, description="exponential: decay rate")
    numerator: float | None = Field(default=None, description="inverse_proportional: a in a/p - 1")
    points: list[tuple[float, float]] | None = Field(default=None, description="tabulated: (p, d) pairs")
    label: str = ""

    @model_validator(mode="after")
    def _require_params(self) -> CurveConfig:
        required = {
            "linear": ("slope", "intercept"),
            "exponential": ("scale", "rate"),
            "inverse_proportional": ("numerator",),
            "tabulated": ("points",),
        }[self.kind]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.kind} curve needs {', '.join(missing)}")
        return self

    def to_curve(self, domain: PriceInterval, cost: float) -> DemandCurve:
        if self.kind == "linear":
            return DemandCurve.linear(self.slope, self.intercept, domain, cost, self.label)
        if self.kind == "exponential":
            return DemandCurve.exponential(self.scale, self.rate, domain, cost, self.label)
        if self.kind == "inverse_proportional":
            return DemandCurve.inverse_proportional(self.numerator, domain, cost, self.label)
        return DemandCurve.tabulated(self.points, cost, self.label)


class InstanceConfig(BaseModel):
    """One market instance in a catalog file."""

    domain: tuple[float, float] = (0.0, 5.0)
    cost: float = Field(default=0.0, ge=0.0)
    noise: NoiseKind = NoiseKind.BERNOULLI
    sigma: float = Field(default=0.0, ge=0.0)
    curves: list[CurveConfig] = Field(min_length=2)

    def to_instance(self, name: str) -> MarketInstance:
        domain = PriceInterval(*self.domain)
        return MarketInstance(
            tuple(curve.to_curve(domain, self.cost) for curve in self.curves),
            NoiseModel(self.noise, self.sigma),
            name=name,
        )


def load_catalog(path: Path) -> dict[str, MarketInstance]:
    """Load a YAML mapping of instance names to instance definitions.

    Example::

        instances:
          my-pair:
            domain: [0, 5]
            curves:
              - {kind: linear, slope: -0.1, intercept: 0.6}
              - {kind: exponential, scale: 0.5, rate: 0.5}
    """
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot read instance catalog {path}: {e}") from e
    entries = raw.get("instances", raw) if isinstance(raw, dict) else None
    if not isinstance(entries, dict):
        raise ConfigError("instance catalog must be a mapping", [("instances", "expected a mapping")])

    catalog: dict[str, MarketInstance] = {}
    issues: list[tuple[str, str]] = []
    for name, body in entries.items():
        try:
            catalog[str(name)] = InstanceConfig.model_validate(body).to_instance(str(name))
        except ValidationError as e:
            issues.extend(validation_issues(e, f"instances.{name}"))
        except ValueError as e:
            issues.append((f"instances.{name}", str(e)))
    if issues:
        raise ConfigError(f"invalid instance catalog {path}", issues)
    return catalog


def resolve_instance(name: str, catalog: dict[str, MarketInstance] | None = None) -> MarketInstance:
    """Look up *name* in *catalog*, then among the built-ins.

    ``lb-pair(A,h)`` returns instance I of the hard pair and
    ``lb-pair-alt(A,h)`` returns I′.
    """
    if catalog and name in catalog:
        return catalog[name]
    if name in BUILTIN_INSTANCES:
        return BUILTIN_INSTANCES[name]()
    match = _LB_PATTERN.match(name)
    if match:
        try:
            A, h = float(match["A"]), float(match["h"])
        except ValueError as e:
            raise ConfigError(f"cannot parse lower-bound parameters in {name!r}", [("instance", str(e))]) from e
        first, second = make_lower_bound_pair(A, h)
        return second if match["alt"] else first
    known = sorted([*BUILTIN_INSTANCES, "lb-pair(A,h)", "lb-pair-alt(A,h)", *(catalog or {})])
    raise ConfigError(f"unknown instance {name!r}", [("instance", f"expected one of {', '.join(known)}")])
