"""CFL time-step selection and Heun's two-stage Runge-Kutta integrator.

The step size is recomputed from the current state every step (the
nonlinear wave speeds evolve) and clipped so that output times and the
final time are hit exactly.  ``heun_step`` refreshes ghost cells at the
correct stage time before each right-hand-side evaluation and applies an
optional hook to the stage result after each stage; the hook is how the
per-stage relaxation variants plug in.
"""

from __future__ import annotations

import numpy as np

from .errors import NonPhysicalState


def max_wave_speed(fg, eq) -> float:
    """Largest |lambda| over the interior cells."""
    smax = float(np.max(eq.max_speed(fg.interior)))
    if not np.isfinite(smax) or smax <= 0.0:
        raise NonPhysicalState(f"maximum wave speed {smax} is not usable")
    return smax


def compute_dt(fg, eq, courant: float, t_stop: float | None = None) -> float:
    """dt = courant * dx / max |lambda|, clipped so t + dt never passes t_stop."""
    dt = courant * fg.grid.dx / max_wave_speed(fg, eq)
    if t_stop is not None and fg.t + dt > t_stop - 1e-12:
        dt = t_stop - fg.t
    return dt


def heun_step(fg, rhs, fill_ghosts, dt: float, stage_hook=None) -> None:
    """Advance ``fg`` in place by one Heun step of size ``dt``.

    ``rhs(fg)`` returns the interior tendency, ``fill_ghosts(fg)`` fills
    ghost cells for time ``fg.t``, and ``stage_hook(fg)``, if given, is
    applied to the stage result after each of the two stages.
    """
    t0 = fg.t
    fill_ghosts(fg)
    k1 = rhs(fg)
    q0 = fg.interior.copy()
    fg.interior[:] = q0 + dt * k1
    if stage_hook is not None:
        stage_hook(fg)
    fg.t = t0 + dt
    fill_ghosts(fg)
    k2 = rhs(fg)
    fg.interior[:] = 0.5 * (q0 + fg.interior + dt * k2)
    if stage_hook is not None:
        stage_hook(fg)
