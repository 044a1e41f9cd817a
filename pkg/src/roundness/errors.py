"""Exception hierarchy shared by every module."""


class RoundnessError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(RoundnessError, ValueError):
    pass


class ShapeError(RoundnessError, ValueError):
    pass


class EvaluationError(RoundnessError, ArithmeticError):
    """A numerical routine hit a non-finite value or failed to bracket a root."""


class MetricValidationError(RoundnessError, ValueError):
    """A distance table is not a metric.

    ``kind`` is one of ``"shape"``, ``"symmetry"``, ``"diagonal"``,
    ``"positivity"``, ``"triangle"`` and ``indices`` names the offending
    entries (for the triangle inequality ``(i, k, j)`` means
    ``d(i, k) > d(i, j) + d(j, k)``).
    """

    def __init__(self, kind, indices, message):
        super().__init__(message)
        self.kind = kind
        self.indices = tuple(int(i) for i in indices)


class CostGuardError(RoundnessError, ValueError):
    """An exhaustive enumeration would exceed the configured size limit."""

    def __init__(self, message, configurations):
        super().__init__(message)
        self.configurations = configurations


class InvalidT0Error(InvalidParameterError):
    """The Orlicz example-1 parameter t0 does not give an increasing convex function."""

    def __init__(self, message, offending_point):
        super().__init__(message)
        self.offending_point = offending_point


class NonIntegrableError(RoundnessError, ValueError):
    pass


class SpecParseError(RoundnessError, ValueError):
    """Malformed space-spec or metric file; ``line`` is 1-based (0 if unknown)."""

    def __init__(self, message, line=0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line
