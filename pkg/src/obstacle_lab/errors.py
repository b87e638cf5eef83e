"""Exception hierarchy shared by every module of the lab."""


class ObstacleLabError(Exception):
    """Base class for all lab errors."""


class OutOfDomainError(ObstacleLabError, ValueError):
    """A point lies outside the grid domain (or too close to its edge)."""


class RadiusError(ObstacleLabError, ValueError):
    """A radius does not fit inside the usable part of the grid."""


class InadmissibleDataError(ObstacleLabError, ValueError):
    """Boundary data lies below the obstacle somewhere on the boundary."""


class ConvergenceError(ObstacleLabError, RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message, residual_history=(), partial=None):
        super().__init__(message)
        self.residual_history = list(residual_history)
        self.partial = partial


class ConfigError(ObstacleLabError, ValueError):
    """An experiment configuration is malformed or violates an invariant."""
