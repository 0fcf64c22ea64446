"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the support or parameter domain."""


class QuantileRangeError(ArithmeticError):
    """An inverse-CDF value would overflow double precision."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, value=float("nan"), error=float("inf")):
        super().__init__(message)
        self.value = value
        self.error = error


class DegenerateSampleError(RuntimeError):
    """A replicate stayed degenerate after the maximum number of resamples."""


class ConcavityError(ValueError):
    """A kernel handed to the concave-comparison check has positive curvature."""
