"""Exception and warning types shared across the package."""


class LoopspecError(Exception):
    """Base class for everything raised deliberately by this package."""


class NonStarShaped(LoopspecError):
    """The radius profile is not positive, so the curve misses the origin."""


class NonConvex(LoopspecError):
    """An operation that needs positive curvature met a non-convex curve."""


class SolverFailure(LoopspecError):
    """The chord solver ran out of iterations or lost its bracket."""


class BracketFailure(LoopspecError):
    """Shooting bracket endpoints do not straddle the target arc length."""


class WindowViolation(LoopspecError):
    """Passage-angle endpoints are farther apart than the allowed window."""


class NoConvergence(LoopspecError):
    """Variational orbit solver exhausted its sweep budget."""


class PartitionAmbiguous(LoopspecError):
    """A spectral gap falls too close to the band-closing threshold to call."""


class ResolutionCap(LoopspecError):
    """Oscillatory quadrature still disagreed at the maximum grid size."""

    def __init__(self, message, last=None, previous=None):
        super().__init__(message)
        self.last = last
        self.previous = previous


class NoisyFit(LoopspecError):
    """A log-log regression residual exceeded the trust threshold."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class UnsupportedProfile(LoopspecError):
    """The requested operation needs a deformation-style radius profile."""


class NonConvexWarning(UserWarning):
    """Curve was built with non-positive curvature somewhere."""
