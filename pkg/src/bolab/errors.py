"""Exception hierarchy shared by the lab modules and the CLI."""


class BOLabError(Exception):
    """Base class for all errors raised by bolab."""


class ConfigError(BOLabError, ValueError):
    """Invalid user input: config keys, file contents, argument ranges."""


class NumericalError(BOLabError, ArithmeticError):
    """A computation could not deliver a trustworthy result."""


class SingularityError(NumericalError):
    """Evaluation point collides with a pole or a matrix is near-singular."""


class TruncationError(NumericalError):
    """An infinite sum could not be truncated to the requested tolerance."""


class NonConvergenceError(NumericalError):
    """An iterative solver failed to reach its tolerance."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class BlowUpError(NumericalError):
    """Time integration produced non-finite values."""

    def __init__(self, message, time=float("nan")):
        super().__init__(message)
        self.time = time


class AccuracyError(NumericalError):
    """A monitored invariant drifted beyond its tolerance."""
