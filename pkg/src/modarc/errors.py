"""Exception types shared across the package."""


class ModarcError(Exception):
    """Base class for all errors raised by modarc."""


class ZeroLeadingCoefficient(ModarcError, ZeroDivisionError):
    pass


class UnsupportedLevel(ModarcError, ValueError):
    pass


class IndexBelowRange(ModarcError, ValueError):
    pass


class PrecisionTooLow(ModarcError, ValueError):
    pass


class SeedConstructionFailed(ModarcError, ArithmeticError):
    """The exact linear system for a level-3 seed form had no solution.

    This indicates a bug in the generator set, not bad user input.
    """


class WeightMismatch(ModarcError, ValueError):
    pass


class NonExactDivision(ModarcError, ArithmeticError):
    pass


class RootOutOfRange(ModarcError, ValueError):
    pass


class TailBoundUnavailable(ModarcError, ValueError):
    pass


class RealnessViolation(ModarcError, ArithmeticError):
    pass


class InconclusiveSample(ModarcError, ArithmeticError):
    def __init__(self, message, theta=None):
        super().__init__(message)
        self.theta = theta


class InvalidRegime(ModarcError, ValueError):
    pass


class CertificationFailed(ModarcError, ArithmeticError):
    pass
