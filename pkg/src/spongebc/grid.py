"""Uniform cell-centered grid with ghost cells and sponge-layer geometry.

Coordinates are always derived from integer indices (x_i = (i + 1/2) dx)
so that interfaces land on exact multiples of dx.  Two ghost cells per
side accommodate the limited piecewise-linear reconstruction stencil.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError

GHOST = 2


@dataclass(frozen=True)
class Grid1D:
    num_cells: int
    dx: float
    ghost: int = GHOST

    @property
    def n_total(self) -> int:
        return self.num_cells + 2 * self.ghost

    @property
    def length(self) -> float:
        return self.num_cells * self.dx

    def centers(self) -> np.ndarray:
        """Interior cell centers."""
        return (np.arange(self.num_cells) + 0.5) * self.dx

    def interfaces(self) -> np.ndarray:
        """All num_cells + 1 interior interface coordinates."""
        return np.arange(self.num_cells + 1) * self.dx


@dataclass(frozen=True)
class SpongeGeometry:
    """Sponge layer occupying [x_start, x_end]; the computational domain is [0, x_start)."""

    x_start: float
    x_end: float

    def __post_init__(self):
        if not (0.0 < self.x_start <= self.x_end):
            raise GeometryError("need 0 < x_start <= x_end")

    @property
    def width(self) -> float:
        return self.x_end - self.x_start


@dataclass
class FieldGrid:
    """Cell averages (3, n_total) including ghosts, plus the current time."""

    grid: Grid1D
    q: np.ndarray
    t: float = 0.0

    @classmethod
    def constant(cls, grid: Grid1D, state) -> "FieldGrid":
        q = np.tile(np.asarray(state, dtype=float)[:, None], (1, grid.n_total))
        return cls(grid=grid, q=q)

    @property
    def interior(self) -> np.ndarray:
        g = self.grid.ghost
        return self.q[:, g:-g]

    def copy(self) -> "FieldGrid":
        return FieldGrid(grid=self.grid, q=self.q.copy(), t=self.t)


def _require_multiple(value: float, dx: float, what: str) -> int:
    """Number of cells spanned by ``value``, requiring interface alignment."""
    n = value / dx
    n_round = int(round(n))
    if abs(n - n_round) > 1e-9 * max(1.0, abs(n)):
        raise GeometryError(f"{what} = {value} is not an integer multiple of dx = {dx}")
    return n_round


def build_grid(
    x_s: float,
    omega_over_l: float,
    n_per_wavelength: int,
    wavelength: float,
) -> tuple[Grid1D, SpongeGeometry]:
    """Grid covering [0, x_s + omega] with the sponge snapped to interfaces."""
    if n_per_wavelength < 4:
        raise GeometryError("need at least 4 cells per wavelength")
    if omega_over_l < 0:
        raise GeometryError("sponge width must be nonnegative")
    dx = wavelength / n_per_wavelength
    n_comp = _require_multiple(x_s, dx, "x_s")
    n_sponge = _require_multiple(omega_over_l * wavelength, dx, "sponge width")
    grid = Grid1D(num_cells=n_comp + n_sponge, dx=dx)
    x_start = n_comp * dx
    geom = SpongeGeometry(x_start=x_start, x_end=(n_comp + n_sponge) * dx)
    return grid, geom


def restrict_average(values: np.ndarray, factor: int) -> np.ndarray:
    """Block-average the trailing axis by an integer factor."""
    values = np.asarray(values)
    n = values.shape[-1]
    if factor < 1 or n % factor:
        raise GeometryError(f"cannot restrict {n} cells by factor {factor}")
    shape = values.shape[:-1] + (n // factor, factor)
    return values.reshape(shape).mean(axis=-1)


def cell_average_restriction(fine: FieldGrid, coarse_cells: int) -> FieldGrid:
    """Restrict a fine solution onto a coarser grid by exact cell averaging."""
    n = fine.grid.num_cells
    if coarse_cells < 1 or n % coarse_cells:
        raise GeometryError(f"{n} fine cells are not divisible into {coarse_cells}")
    factor = n // coarse_cells
    coarse = Grid1D(num_cells=coarse_cells, dx=fine.grid.dx * factor, ghost=fine.grid.ghost)
    out = FieldGrid.constant(coarse, np.zeros(3))
    out.t = fine.t
    out.interior[:] = restrict_average(fine.interior, factor)
    return out
