"""Exception types shared across the package."""


class RedmapError(Exception):
    """Base class for all package-specific errors."""


class NonFiniteError(RedmapError):
    """An input or intermediate quantity contained NaN or Inf."""


class NotSPDError(RedmapError):
    """A matrix required to be symmetric positive definite is not."""


class NoConvergenceError(RedmapError):
    """An iterative procedure exhausted its budget without converging."""


class InnerDivergenceError(NoConvergenceError):
    """Newton iteration on an inner problem failed to converge."""


class SSOSCViolationError(RedmapError):
    """The inner Hessian is not positive definite at the inner solution."""


class MissingThirdDerivativesError(RedmapError):
    """An implicit mapping lacks the third-derivative callables needed
    for its second derivative."""


class LineSearchStallError(RedmapError):
    """Backtracking line search shrank the step below its floor."""


class WrongMappingKindError(RedmapError):
    """An operation restricted to affine/constant mappings was called
    with a nonlinear mapping."""


class NotCriticalError(RedmapError):
    """The supplied point is not a critical point of the objective."""


class KernelMismatchError(RedmapError):
    """The Hessian kernel does not match the supplied solution tangent
    (Morse-Bott check failure)."""


class EmptySampleError(RedmapError):
    """Every sample point was excluded by a precondition filter."""


class NoSolutionSetError(RedmapError):
    """The problem does not carry a known solution set."""


class InvalidParamError(RedmapError, ValueError):
    """A problem constructor received an out-of-range parameter."""
