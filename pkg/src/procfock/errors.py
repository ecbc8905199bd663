"""Exception hierarchy shared by every layer of the engine."""

from __future__ import annotations


class ProcessError(Exception):
    """Base class for all engine errors."""


class InvalidDimension(ProcessError, ValueError):
    pass


class DuplicateLabel(ProcessError, ValueError):
    pass


class IndexOutOfRange(ProcessError, IndexError):
    pass


class LabelCollision(ProcessError, ValueError):
    pass


class LabelMismatch(ProcessError, ValueError):
    pass


class DimensionMismatch(ProcessError, ValueError):
    pass


class CoverageError(ProcessError, ValueError):
    """Gate spaces do not tile the process vector's spaces exactly."""


class ShapeError(ProcessError, ValueError):
    pass


class NonUnitary(ProcessError, ValueError):
    pass


class DuplicateSector(ProcessError, ValueError):
    pass


class CircuitError(ProcessError):
    """Error raised while reading a circuit file; carries a source location."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{loc}: {message}"
        super().__init__(message)


class CircuitSyntaxError(CircuitError, ValueError):
    pass


class EmptyCircuit(CircuitError, ValueError):
    pass


class UndeclaredSpace(CircuitError, LabelMismatch):
    pass


class DuplicateWire(CircuitError, LabelCollision):
    pass


class WireDimensionMismatch(CircuitError, DimensionMismatch):
    pass


class CausalOrderError(CircuitError, ValueError):
    """A wire runs backwards with respect to gate declaration order."""


class DuplicateSpace(CircuitError, DuplicateLabel):
    pass


class UnwiredSpace(CircuitError, CoverageError):
    """A space of dimension > 1 is not connected to any wire."""


class InvalidOperation(CircuitError, ValueError):
    """A gate's ``op=`` clause does not fit its spaces."""
