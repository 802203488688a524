"""1D Lagrangian gas dynamics with sponge-layer absorbing boundary conditions."""

from .equations import LagrangianEuler, LinearizedLagrangian, entropy, make_equations
from .errors import (
    ConfigError,
    DomainError,
    DomainTooSmall,
    GeometryError,
    GridMismatch,
    NonPhysicalState,
    SolverError,
)
from .grid import FieldGrid, Grid1D, SpongeGeometry, build_grid, cell_average_restriction
from .simulation import RunResult, Simulation
from .sponge import AbcMethod, SpongeConfig, apply_abc

__all__ = [
    "AbcMethod",
    "ConfigError",
    "DomainError",
    "DomainTooSmall",
    "FieldGrid",
    "GeometryError",
    "Grid1D",
    "GridMismatch",
    "LagrangianEuler",
    "LinearizedLagrangian",
    "NonPhysicalState",
    "RunResult",
    "Simulation",
    "SolverError",
    "SpongeConfig",
    "SpongeGeometry",
    "apply_abc",
    "build_grid",
    "cell_average_restriction",
    "entropy",
    "make_equations",
]

__version__ = "0.1.0"
