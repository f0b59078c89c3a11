"""Exception hierarchy shared by every module."""


class AugDistError(ValueError):
    """Base class for all library errors."""


class NonFiniteEntry(AugDistError):
    pass


class WeightSumViolation(AugDistError):
    pass


class NotPositiveSemidefinite(AugDistError):
    pass


class DimensionMismatch(AugDistError):
    pass


class SingularCovariance(AugDistError):
    pass


class InfeasibleMarginals(AugDistError):
    pass


class StepTooLarge(AugDistError):
    """QR retraction hit a rank-deficient matrix."""


class ObjectiveNonFinite(AugDistError):
    pass


class SupportViolation(AugDistError):
    """A measure puts mass outside the support required by a construction."""


class InvalidParameter(AugDistError):
    pass


class UnsupportedCombination(AugDistError):
    """No route exists for this (metric, measure family, method) request."""


class DimensionOrder(AugDistError):
    """An asymmetric divergence was requested with the higher-dimensional measure first."""
