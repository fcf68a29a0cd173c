"""Exception types raised by the package."""


class PQOVSError(Exception):
    """Base class for all errors raised by :mod:`pqovs`."""


class InvalidArgumentError(PQOVSError, ValueError):
    """An argument violates a documented precondition."""


class UnsupportedRangeError(InvalidArgumentError):
    """Parameters fall outside the validated special-function domain."""


class NumericalError(PQOVSError, ArithmeticError):
    """A computation could not reach its accuracy contract."""


class AccuracyError(NumericalError):
    """Node doubling or grid refinement changed the result by too much."""


class TruncationError(NumericalError):
    """An integrand has not decayed at the end of the integration range."""


class DomainTooSmallError(NumericalError):
    """A sampled function has not decayed on the boundary of its grid."""


class DegenerateCircleError(NumericalError):
    """The field vanishes somewhere on the circle used to count phase winding."""


class BracketingError(NumericalError):
    """A maximum could not be bracketed."""
