"""Exception hierarchy.

Validation problems derive from :class:`ValueError` so callers that only care
about bad input can catch that; numeric trouble in the engines derives from
:class:`ArithmeticError`.
"""


class LTError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(LTError, ValueError):
    """Invalid input parameters or data."""


class NegativeWeight(ValidationError):
    pass


class DegreeOutOfRange(ValidationError):
    pass


class SumNotOne(ValidationError):
    pass


class ResultExceedsOne(ValidationError):
    """A presence probability n * Omega_d / C(k, d) came out larger than one."""


class DuplicateExhaustion(ValidationError):
    pass


class DegreeOneSaturated(ValidationError):
    """(1 + delta) * Omega_1 >= 1, so beta_1 = -log(1 - (1 + delta) * Omega_1) is undefined."""


class MissingValues(ValidationError):
    pass


class NumericError(LTError, ArithmeticError):
    pass


class PrecisionLoss(NumericError):
    """Row-sum drift in the polynomial engine exceeded the allowed bound."""
