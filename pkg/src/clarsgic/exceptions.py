"""Exception types raised by the solvers and the experiment harness."""


class ClarsGicError(Exception):
    """Base class for all package errors."""


class RankDeficient(ClarsGicError):
    """Active-set columns are numerically collinear."""


class ZeroSignal(ClarsGicError):
    """The measurement vector is zero, so the Lasso path is degenerate."""


class InvalidDimension(ClarsGicError):
    """Problem size too small for the requested information criterion."""


class DegreesExhausted(ClarsGicError):
    """Model order reaches the number of measurements; no residual degrees of freedom."""


class PerfectFit(ClarsGicError):
    """Residual variance is exactly zero, so the log-likelihood term diverges."""


class NoConvergence(ClarsGicError):
    """Coordinate descent hit its sweep cap before the stopping rule fired."""


class OffGridDoA(ClarsGicError):
    """A source direction does not lie on the angular grid."""


class ConfigError(ClarsGicError):
    """Invalid or unknown configuration key."""
