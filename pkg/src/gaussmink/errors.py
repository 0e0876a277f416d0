"""Exception hierarchy.

Every failure the library raises on purpose derives from ``GaussMinkError``.
The class name doubles as the machine-readable error code printed by the CLI.
"""


class GaussMinkError(Exception):
    """Base class for all library errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class InvalidGrid(GaussMinkError, ValueError):
    pass


class GridMismatch(GaussMinkError, ValueError):
    pass


class NonPositiveSupport(GaussMinkError, ValueError):
    pass


class NotConvex(GaussMinkError, ValueError):
    def __init__(self, message: str, node: int = -1, violation: float = 0.0):
        super().__init__(message)
        self.node = node
        self.violation = violation


class DegenerateGauss(GaussMinkError, ValueError):
    pass


class HullDegenerate(GaussMinkError, ValueError):
    pass


class InvalidScale(GaussMinkError, ValueError):
    pass


class DomainError(GaussMinkError, ValueError):
    pass


class UnsupportedExponent(GaussMinkError, ValueError):
    pass


class InvalidMeasure(GaussMinkError, ValueError):
    pass


class MeasureNotEven(GaussMinkError, ValueError):
    pass


class MeasureConcentrated(GaussMinkError, ValueError):
    pass


class NoProgress(GaussMinkError, RuntimeError):
    pass


class MassBoundViolated(GaussMinkError, ValueError):
    pass


class HomotopyStalled(GaussMinkError, RuntimeError):
    pass


class NewtonSingular(GaussMinkError, RuntimeError):
    pass


class NewtonDiverged(GaussMinkError, RuntimeError):
    pass


class NonConvexIterate(GaussMinkError, RuntimeError):
    pass


class NonPositiveIterate(GaussMinkError, ValueError):
    pass


class NoRoot(GaussMinkError, ValueError):
    pass
