"""Exception hierarchy shared by every module."""


class PolyconvError(Exception):
    """Base class for all library errors."""


class InvalidDistribution(PolyconvError, ValueError):
    pass


class DimensionMismatch(PolyconvError, ValueError):
    pass


class NegativeWeight(PolyconvError, ValueError):
    pass


class WeightSumMismatch(PolyconvError, ValueError):
    pass


class IncompatibleLattice(PolyconvError, ValueError):
    pass


class BudgetExceeded(PolyconvError, ArithmeticError):
    pass


class BoxOverflow(PolyconvError, MemoryError):
    pass


class NotSymmetric(PolyconvError, ValueError):
    pass


class NotLattice(PolyconvError, ValueError):
    pass


class ModeUnsupported(PolyconvError, ValueError):
    pass


class NegativeLength(PolyconvError, ValueError):
    pass


class InsufficientPoints(PolyconvError, ValueError):
    pass


class NonpositiveDistance(PolyconvError, ValueError):
    pass


class SupportTooLarge(PolyconvError, ValueError):
    pass


class UnknownScenario(PolyconvError, KeyError):
    pass


class ConfigError(PolyconvError, ValueError):
    pass
