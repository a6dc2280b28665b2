"""Exception hierarchy shared by all modules."""

from __future__ import annotations

from typing import Any


class SmaleError(Exception):
    """Base class for every error raised by this package."""


class DegreeMismatchError(SmaleError, ValueError):
    """A multi-index does not have the degree of its block."""


class PatternMismatchError(SmaleError, ValueError):
    """Two systems were combined that live in different spaces."""


class NonUnitaryError(SmaleError, ValueError):
    pass


class ZeroSystemError(SmaleError, ValueError):
    pass


class UnsupportedDegreeError(SmaleError, ValueError):
    """Raised for patterns with D = 1 (plain linear algebra, not handled here)."""


class PreconditionError(SmaleError, ValueError):
    pass


class DegeneratePencilError(SmaleError, ValueError):
    """The two endpoints of a homotopy are (anti)parallel."""


class SingularJacobianError(SmaleError, ArithmeticError):
    """The Jacobian restricted to the tangent space lost rank."""

    def __init__(self, message: str, trace: Any = None):
        super().__init__(message)
        self.trace = trace


class NonConvergenceError(SmaleError, RuntimeError):
    """Path following hit its iteration cap."""

    def __init__(self, message: str, trace: Any = None, start: Any = None):
        super().__init__(message)
        self.trace = trace
        self.start = start


class UnreliableCountError(SmaleError, RuntimeError):
    """Some homotopy paths failed or collided, so a zero count cannot be trusted."""
