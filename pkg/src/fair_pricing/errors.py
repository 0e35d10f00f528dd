"""Exception hierarchy shared by every fair_pricing module."""

from __future__ import annotations

from pydantic import ValidationError


class FairPricingError(Exception):
    """Base class for all library errors."""


class DomainError(FairPricingError, ValueError):
    """A price, curve parameter or instance lies outside its valid domain."""


class ConfigError(FairPricingError, ValueError):
    """Invalid run or sweep configuration.

    ``issues`` holds ``(key, message)`` pairs so callers can report every
    violation at once.
    """

    def __init__(self, message: str, issues: list[tuple[str, str]] | None = None) -> None:
        self.issues = list(issues or [])
        if self.issues:
            details = "; ".join(f"{key}: {msg}" for key, msg in self.issues)
            message = f"{message} ({details})"
        super().__init__(message)


class BudgetExhausted(FairPricingError):
    """Raised when a price is posted after the horizon has been consumed."""


class InfeasibleError(FairPricingError):
    """A solver request has no feasible solution."""


def validation_issues(error: ValidationError, prefix: str = "") -> list[tuple[str, str]]:
    """Flatten a pydantic ValidationError into dotted-key issues."""
    issues = []
    for issue in error.errors():
        parts = [prefix] if prefix else []
        parts.extend(str(part) for part in issue["loc"])
        issues.append((".".join(parts) or "config", issue["msg"]))
    return issues
