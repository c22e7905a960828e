"""Exception hierarchy shared by every module."""

from __future__ import annotations


class QCondError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(QCondError, ValueError):
    pass


class NonSquare(DimensionMismatch):
    pass


class UnknownLabel(QCondError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class NotFinite(QCondError, ValueError):
    pass


class NotHermitian(QCondError, ValueError):
    pass


class NotPositive(QCondError, ValueError):
    pass


class NotIsometry(QCondError, ValueError):
    pass


class NotUnitary(QCondError, ValueError):
    pass


class NotNormalized(QCondError, ValueError):
    pass


class SpaceMismatch(QCondError, ValueError):
    pass


class InvalidPovm(QCondError, ValueError):
    """Raised when atoms fail the POVM axioms; carries the validation report."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class NotProjective(QCondError, ValueError):
    pass


class ZeroProbabilityCondition(QCondError, ValueError):
    pass


class NegativeProbability(QCondError, ValueError):
    pass


class IndexOutOfRange(QCondError, IndexError):
    pass


class HeterogeneousFamily(QCondError, ValueError):
    pass


class LengthMismatch(QCondError, ValueError):
    pass


class OrderViolation(QCondError, ValueError):
    pass


class ParseError(QCondError, ValueError):
    pass


class KindMismatch(QCondError, ValueError):
    pass


class ValidationFailure(QCondError, ValueError):
    pass
