"""Exception hierarchy.

Errors fall in two families. ``ContractViolation`` marks bad input (the CLI
exits with status 2). ``NumericalError`` marks a computation that could not be
carried out reliably (the CLI exits with status 3).
"""

from typing import Any


class MaslovCountError(Exception):
    """Base class for all package errors."""

    exit_code: int = 1


class ContractViolation(MaslovCountError, ValueError):
    """An operation was called with arguments outside its contract."""

    exit_code = 2


class NumericalError(MaslovCountError, ArithmeticError):
    """A numerical procedure failed or produced an untrustworthy result."""

    exit_code = 3

    def __init__(self, message: str, **evidence: Any) -> None:
        super().__init__(message)
        self.evidence = evidence

    @property
    def reason(self) -> str:
        """Machine-readable reason tag (the class name)."""
        return type(self).__name__


class SingularMatrix(NumericalError):
    """A linear system was singular or too ill-conditioned to solve."""


class IntegrationStall(NumericalError):
    """The ODE integrator could not advance (step-size underflow)."""


class TrackingAmbiguity(NumericalError):
    """Eigen-tracks or eigenphases could not be matched between samples."""


class IndeterminateLimit(NumericalError):
    """An eigen-track neither settled nor clearly diverged."""


class FrameConstruction(NumericalError):
    """A boundary frame could not be built to the requested accuracy."""


class NumericalInconsistency(NumericalError):
    """Two computations that must agree did not."""


class RefinementRequired(NumericalError):
    """A result changed under refinement, so the current resolution is too coarse."""
