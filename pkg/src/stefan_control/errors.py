"""Exception hierarchy."""
from __future__ import annotations


class StefanError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(StefanError, ValueError):
    """A parameter lies outside its admissible domain."""


class StateError(StefanError):
    """The plant state is invalid (e.g. non-positive interface position)."""


class CFLError(StefanError):
    """An explicit step was requested with a time step above the stability limit."""


class InfeasibleSetpointError(StefanError, ValueError):
    """The requested setpoint cannot be reached with a nonnegative input."""


class TheoremPreconditionError(StefanError, ValueError):
    """Inputs violate the precondition of the bound being evaluated."""


class OracleError(StefanError):
    """The similarity-solution root could not be bracketed."""


class FitError(StefanError, ValueError):
    """Exponential fit requested on nonpositive samples."""


class ValidationError(StefanError):
    """Strict-mode validator failure."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class ScenarioError(StefanError, ValueError):
    """Scenario file could not be parsed or fails an invariant.

    ``path`` is the dotted field path and ``line`` the file line, when known.
    """

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        super().__init__(message)
        self.path = path
        self.line = line
