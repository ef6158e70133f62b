"""Exception hierarchy shared by the simulator modules."""


class ObstError(Exception):
    """Base class for all simulator errors."""


class TreeError(ObstError):
    """Structural misuse of a binary search tree."""


class MembershipError(TreeError, KeyError):
    """A peer id is not present where it is required."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.message = message
        self.index = index

    def __str__(self) -> str:
        if self.index is None:
            return self.message
        return f"request {self.index}: {self.message}"


class WorkloadError(ObstError, ValueError):
    """Bad generator parameters or unparsable workload files."""


class BoundsError(ObstError, ValueError):
    """Precondition failure in the static optimisation toolkit."""


class ConfigError(ObstError, ValueError):
    """Invalid experiment configuration."""


class InvariantViolation(ObstError):
    """A snapshot or overlay failed its invariant checks."""


class MetricsError(ObstError, ValueError):
    """A metric was requested on an empty graph or ledger."""
