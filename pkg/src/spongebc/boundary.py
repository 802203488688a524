r"""Ghost-cell fillers: oscillating piston, far field, extrapolation, wall.

The piston of amplitude M sits at the interface x = 0 and follows
xp(t) = M (cos t - 1), so the gas velocity at the piston must equal
xp'(t) = -M sin t.  The ghost state next to the piston is chosen so that
the interface velocity trace (u_{-1} + u_0)/2 matches the piston velocity
exactly and the pressure gradient matches the piston acceleration:

    u_{-1} = -2 M sin(t) - u_0,
    p_{-1} = p_0 - M cos(t) dx,

with V and E filled consistently with each system's closure.  Each filler
writes both ghost cells on its side; the second ghost copies the first
(the reconstruction stencil then degenerates to first order at the
boundary, the standard near-boundary treatment).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPhysicalState


@dataclass(frozen=True)
class PistonSpec:
    """Oscillating plate driving the left boundary."""

    amplitude: float = 0.4

    def position(self, t):
        return self.amplitude * (np.cos(t) - 1.0)

    def velocity(self, t):
        return -self.amplitude * np.sin(t)


def ghost_piston_nonlinear(q0, t, dx, amplitude, gamma):
    """Ghost state left of the piston for the nonlinear system."""
    V0, u0, E0 = np.asarray(q0, dtype=float)
    p0 = (gamma - 1.0) * (E0 - 0.5 * u0 * u0) / V0
    u = -2.0 * amplitude * np.sin(t) - u0
    p = p0 - amplitude * np.cos(t) * dx
    if p <= 0.0:
        raise NonPhysicalState(f"piston ghost pressure {p} <= 0")
    dp = (p0 - p) / (p0 + p)
    if abs(dp) >= gamma:
        raise NonPhysicalState("piston pressure jump too large for ghost volume")
    V = V0 * (gamma + dp) / (gamma - dp)
    E = p * V / (gamma - 1.0) + 0.5 * u * u
    return np.array([V, u, E])


def ghost_piston_linear(q0, t, dx, amplitude, gamma):
    """Ghost state left of the piston for the linearized system.

    E is recovered from the closure p = gamma V + (gamma - 1) E so that the
    ghost state reproduces the ghost pressure exactly.
    """
    V0, u0, E0 = np.asarray(q0, dtype=float)
    p0 = gamma * V0 + (gamma - 1.0) * E0
    u = -2.0 * amplitude * np.sin(t) - u0
    p = p0 - amplitude * np.cos(t) * dx
    V = (p0 - p + gamma * V0) / gamma
    E = (p - gamma * V) / (gamma - 1.0)
    return np.array([V, u, E])


def fill_piston(fg, eq, amplitude: float) -> None:
    """Fill the two left ghost cells from the piston condition at time fg.t."""
    q0 = fg.q[:, fg.grid.ghost]
    if eq.kind == "nonlinear":
        ghost = ghost_piston_nonlinear(q0, fg.t, fg.grid.dx, amplitude, eq.gamma)
    else:
        ghost = ghost_piston_linear(q0, fg.t, fg.grid.dx, amplitude, eq.gamma)
    fg.q[:, 0] = ghost
    fg.q[:, 1] = ghost


def fill_far_field_left(fg, qbar) -> None:
    fg.q[:, 0] = qbar
    fg.q[:, 1] = qbar


def fill_far_field(fg, qbar) -> None:
    """Dirichlet far-field state in both right ghost cells."""
    fg.q[:, -1] = qbar
    fg.q[:, -2] = qbar


def fill_extrapolation(fg) -> None:
    """Constant extrapolation of the last interior cell into both right ghosts."""
    last = fg.q[:, -(fg.grid.ghost + 1)]
    fg.q[:, -1] = last
    fg.q[:, -2] = last


def fill_reflecting(fg) -> None:
    """Perfectly reflecting wall: mirror the interior with the velocity negated."""
    g = fg.grid.ghost
    fg.q[:, -2] = fg.q[:, -(g + 1)]
    fg.q[1, -2] = -fg.q[1, -2]
    fg.q[:, -1] = fg.q[:, -(g + 2)]
    fg.q[1, -1] = -fg.q[1, -1]
