"""Exception types shared across the package."""


class HeisconvError(Exception):
    """Base class for all package errors."""


class DimensionError(HeisconvError, ValueError):
    """Operands live in incompatible dimensions."""


class DomainError(HeisconvError, ValueError):
    """Argument outside the domain where a formula is defined."""


class PoleError(DomainError):
    """Evaluation at a pole (e.g. Gamma at a non-positive integer)."""


class RangeError(HeisconvError, OverflowError):
    """Result not representable in double precision."""


class ResolutionError(HeisconvError, ValueError):
    """A discretization is too coarse for the requested experiment."""


class NumericError(HeisconvError, ArithmeticError):
    """An iteration produced a non-finite value."""


class AccuracyError(HeisconvError, ArithmeticError):
    """A quadrature did not reach its tolerance within its budget.

    ``estimate`` and ``error`` carry the best value found and its error
    estimate so callers can decide whether to accept it anyway.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
