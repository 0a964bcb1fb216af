"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A model or run parameter violates its admissibility condition."""


class DomainError(ValueError):
    """A demand level lies outside the state space of the model."""


class GridError(ValueError):
    """A time grid is incompatible with the requested operation,
    e.g. the build lag is not an integer number of steps."""


class NumericsError(RuntimeError):
    """An iterative numerical routine failed to converge or produced
    values outside its guaranteed range."""


class TruncationError(RuntimeError):
    """The analytic bound on the discarded tail of a discounted integral
    exceeds the accepted fraction of the estimate."""


class StepError(ValueError):
    """A finite-difference step left the admissible parameter region."""
