"""Exception hierarchy shared by every layer of the engine."""

from __future__ import annotations


class SGVError(Exception):
    """Base class for all engine errors."""


class ChartMismatchError(SGVError):
    pass


class ParityError(SGVError):
    """An input had the wrong or no definite parity."""


class UnknownVariableError(SGVError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class NotNilpotentError(SGVError):
    """A terminating series was requested for an element with nonzero body."""


class NotInvertibleError(SGVError):
    """An element or matrix block has no inverse over the polynomial ring."""


class JacobiError(SGVError):
    """A structure tensor violates the Jacobi identity where one is required."""


class InternalCheckError(SGVError):
    """A built-in self-check failed; this signals a bug, not bad input."""


class ExpressionError(SGVError):
    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class ManifestError(SGVError):
    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)
