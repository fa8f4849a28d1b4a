"""Exception hierarchy.

Every error raised by the library derives from :class:`SpdKitError`, so
callers can catch one type.  Input-validation problems additionally derive
from :class:`ValueError`.
"""


class SpdKitError(Exception):
    """Base class for all library errors."""


class InputError(SpdKitError, ValueError):
    """Invalid input: shapes, values or parameters."""


class NotSquare(InputError):
    pass


class NotSymmetric(InputError):
    pass


class NotPositiveDefinite(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class ShapeMismatch(InputError):
    """Kronecker models whose factor sizes do not line up."""


class InvalidParams(InputError):
    pass


class EmptyInput(InputError):
    pass


class NonPositiveEntry(InputError):
    pass


class NotNormalized(InputError):
    """A Kronecker factor does not have unit determinant."""


class TooLarge(InputError):
    """Dense expansion would exceed the configured size cap."""


class NotIntegrable(InputError):
    """The precision mixture of a density product is not positive definite."""


class NumericalFailure(SpdKitError, ArithmeticError):
    pass


class BudgetExceeded(NumericalFailure):
    pass
