from typing import Optional


class PairLinkError(Exception):
    """Base class for every error raised by the package."""


class DomainError(PairLinkError, ValueError):
    """A parameter lies outside its physical domain."""


class OptimizationError(DomainError):
    """Bracket problems or a non-finite objective during a search."""


class ConfigError(PairLinkError):
    """Scenario file could not be parsed or validated."""

    def __init__(
        self, message: str, line: Optional[int] = None, field: Optional[str] = None
    ):
        self.line = line
        self.field = field
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")


class VerificationError(PairLinkError):
    """At least one analytic-versus-oracle check exceeded its tolerance."""


def require_unit_interval(name: str, value: float) -> float:
    """Raise DomainError unless 0 <= value <= 1."""
    if not (0.0 <= value <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return value
