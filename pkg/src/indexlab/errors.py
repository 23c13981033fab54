"""Exception and warning types raised across the package."""


class IndexLabError(Exception):
    """Base class for every error raised by indexlab."""


class PoleError(IndexLabError, ValueError):
    pass


class DomainError(IndexLabError, ValueError):
    pass


class NotSelfAdjoint(DomainError):
    pass


class MExcluded(DomainError):
    pass


class BranchError(DomainError):
    pass


class NotClosed(IndexLabError, ValueError):
    pass


class ZeroCrossing(IndexLabError, ArithmeticError):
    pass


class RefinementExhausted(IndexLabError, ArithmeticError):
    pass


class CornerMismatch(IndexLabError, ArithmeticError):
    pass


class ResolutionError(IndexLabError, ValueError):
    pass


class PeriodicityError(IndexLabError, ValueError):
    pass


class DecayError(IndexLabError, ValueError):
    pass


class UnsupportedRepresentation(IndexLabError, TypeError):
    pass


class DegenerateBranch(UserWarning):
    """A logarithm branch sits on the boundary |Im w| = pi of the eigenvalue strip."""
