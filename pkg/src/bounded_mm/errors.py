"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures to its documented status codes without a lookup table.
"""


class MarketError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 3

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


# -- validation (exit 2) ---------------------------------------------------

class ValidationError(MarketError, ValueError):
    exit_code = 2


class NotNormalized(ValidationError):
    pass


class NegativeEntry(ValidationError):
    pass


class ZeroEntryInStrictMode(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class InvalidParameter(ValidationError):
    pass


class MarketResolved(ValidationError):
    pass


class MalformedDocument(ValidationError):
    pass


class VersionMismatch(ValidationError):
    pass


# -- domain / numerical (exit 3) -------------------------------------------

class DomainViolation(MarketError, ArithmeticError):
    pass


class RangeViolation(DomainViolation):
    pass


class SolverFailure(MarketError, ArithmeticError):
    pass


class PriceOutOfRange(DomainViolation):
    pass


class Unattainable(DomainViolation):
    pass


class UndefinedScore(DomainViolation):
    pass


class NoCorrespondence(MarketError):
    pass


class NonSymmetric(MarketError):
    pass


class DegenerateSlope(DomainViolation):
    pass


class LossMismatch(MarketError):
    pass
