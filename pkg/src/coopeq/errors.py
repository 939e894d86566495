"""Exception types raised by the solver."""


class CoopEqError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CoopEqError, ValueError):
    """Malformed input: bad game data, bad parameters, bad profiles."""


class CapacityError(CoopEqError):
    """The requested computation exceeds a configured size cap."""


class InfeasibleError(CoopEqError):
    """No profile meets the requested value thresholds."""

    def __init__(self, message, slack=None):
        super().__init__(message)
        self.slack = slack


class ConsistencyError(CoopEqError, RuntimeError):
    """An internal invariant was violated."""


class CptUnavailableError(CapacityError):
    """CPT mode was requested for a game above its size caps."""
