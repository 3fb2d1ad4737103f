"""Exception hierarchy. Every error raised by the library derives from
:class:`LatticeSecrecyError`; the CLI maps them to exit code 2."""


class LatticeSecrecyError(Exception):
    """Base class for all library errors."""

    code = "Error"


class ValidationError(LatticeSecrecyError, ValueError):
    code = "ValidationError"


class ZeroLeadingCoefficient(LatticeSecrecyError, ZeroDivisionError):
    code = "ZeroLeadingCoefficient"


class OffGridExponent(ValidationError):
    code = "OffGridExponent"


class PrecisionUnreachable(LatticeSecrecyError, ArithmeticError):
    code = "PrecisionUnreachable"


class NotPositiveDefinite(ValidationError):
    code = "NotPositiveDefinite"


class WrongSpecKind(ValidationError):
    code = "WrongSpecKind"


class OddDimensionNonSquareLevel(ValidationError):
    code = "OddDimensionNonSquareLevel"


class UnsupportedLevel(ValidationError):
    code = "UnsupportedLevel"


class NoExactFit(LatticeSecrecyError):
    """The theta series is not Theta_C^k times a polynomial in g_ell of
    degree <= max_degree through the available order."""

    code = "NoExactFit"

    def __init__(self, message, first_failing_power=None):
        super().__init__(message)
        self.first_failing_power = first_failing_power


class Singular(ValidationError):
    code = "Singular"


class DimensionMismatch(ValidationError):
    code = "DimensionMismatch"
