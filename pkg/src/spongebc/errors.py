"""Exception types shared across the solver."""


class SolverError(Exception):
    """Base class for all errors raised by this package."""


class NonPhysicalState(SolverError):
    """A state violates the non-vacuum assumption (V <= 0 or p <= 0) or is not finite."""


class GeometryError(SolverError):
    """Grid or sponge geometry does not align with cell interfaces."""


class GridMismatch(SolverError):
    """Two trajectories do not share a common grid/output structure."""


class ConfigError(SolverError):
    """Inconsistent or unparseable run configuration."""


class DomainError(SolverError):
    """A parameter lies outside the mathematical domain of an operation."""


class DomainTooSmall(SolverError):
    """Reference-solution domain was too short to keep the boundary quiescent."""
