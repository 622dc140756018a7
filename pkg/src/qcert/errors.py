"""Exception types raised across the package."""


class QCertError(ValueError):
    """Base class for all domain errors."""


# gausspoly
class FockOrderTooLarge(QCertError):
    pass


class OrderTooLarge(QCertError):
    pass


class NonPositiveWidth(QCertError):
    pass


class NotNormalized(QCertError):
    pass


class NonHermitian(QCertError):
    pass


class LevelMismatch(QCertError):
    pass


class WeightsNotNormalized(QCertError):
    pass


class NegativeSmearing(QCertError):
    pass


class DegreeTooLarge(QCertError):
    pass


# functionals
class SubWignerLevel(QCertError):
    """Requested a distribution less smeared than the Wigner function (T < 1)."""


class PowerDomainViolation(QCertError):
    """Non-integer exponent with T + dT < 2, where the base may be negative."""


class NegativeBase(QCertError):
    """A negative base met a non-integer exponent despite the domain rule."""


class KOutOfRange(QCertError):
    pass


# analysis
class WeightOutOfRange(QCertError):
    pass


class BracketInvalid(QCertError):
    pass


class MonotonicityViolation(QCertError):
    """Detection was not monotone in the weight along a bisection trace."""


# oracle
class KernelUnderResolved(QCertError):
    pass
