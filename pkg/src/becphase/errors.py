"""Exception hierarchy shared by the engines, scenarios and the CLI."""

from __future__ import annotations

from dataclasses import dataclass


class BecPhaseError(Exception):
    """Base class for all package errors."""


class ZeroAmplitude(BecPhaseError):
    pass


class NoDensityAtPosition(BecPhaseError):
    pass


class CondensateExhausted(BecPhaseError):
    pass


class ZeroProbabilityOutcome(BecPhaseError):
    pass


class SequenceTooLongForApproxEngine(BecPhaseError):
    pass


class GridTooCoarse(BecPhaseError):
    pass


class SpecOutsideRegion(BecPhaseError):
    pass


class IoFailure(BecPhaseError):
    pass


@dataclass(frozen=True)
class Violation:
    """One failed configuration invariant."""

    code: str
    message: str
    path: str = ""

    def __str__(self) -> str:
        where = f" at {self.path}" if self.path else ""
        return f"{self.code}{where}: {self.message}"


class ConfigError(BecPhaseError):
    """Raised for any configuration problem; carries every violation found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))

    @property
    def codes(self) -> list[str]:
        return [v.code for v in self.violations]


class SchemaVersionUnsupported(ConfigError):
    pass


class UnknownField(ConfigError):
    """Strict parsing found keys outside the schema."""

    @property
    def fields(self) -> list[str]:
        return [v.path.rsplit(".", 1)[-1] for v in self.violations]


class InvariantViolation(ConfigError):
    pass
