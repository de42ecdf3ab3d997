"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A model, grid, or system parameter is out of its valid range."""


class GridMismatchError(ValueError):
    """Two sampled paths or results do not share the same time grid."""


class DivergenceError(RuntimeError):
    """A trajectory produced a non-finite amplitude.

    Carries the integration step index and, when raised from an ensemble,
    the trajectory index and seed that reproduce the failure.
    """

    def __init__(self, message, step=None, trajectory=None, master_seed=None):
        super().__init__(message)
        self.step = step
        self.trajectory = trajectory
        self.master_seed = master_seed


class ConfigError(ValueError):
    """A configuration file or value cannot be interpreted."""


class ValidationError(ValueError):
    """An input violates a structural precondition (shape, Hermiticity, ...)."""
