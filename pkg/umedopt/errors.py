"""
Exception hierarchy for the umedopt package.
The CLI maps each branch to an exit code (see cli.py).
"""

from typing import Optional


class UmedOptError(Exception):
    """Base class for every error raised by umedopt."""


class DomainError(UmedOptError, ValueError):
    """Invalid argument or input data: lambda <= 0, eps outside [0, 1), empty sample, ..."""


class ConfigError(DomainError):
    """Malformed simulation config. `field` is the path of the offending entry, e.g. 'lambdas[2]'."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class EstimationError(UmedOptError):
    """A root solve could not be bracketed inside the family's search bounds."""

    def __init__(self, message: str, target: Optional[float] = None):
        self.target = target
        super().__init__(message)


class SimulationError(EstimationError):
    """Too many failed replications in a cell, or cells missing from a result."""


class InvariantError(UmedOptError, RuntimeError):
    """Internal invariant breach (cdf never reaching 0.5, p0 == 0, no sign change where one must exist)."""
