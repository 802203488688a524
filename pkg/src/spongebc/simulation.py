"""Time-loop driver wiring equations, boundaries and the sponge method.

A simulation owns one FieldGrid and advances it with Heun steps whose size
comes from the CFL condition, clipped to land exactly on output times.
The configured ABC method contributes through exactly one channel:
interface speed scaling plus sources inside the right-hand side, a
post-step relaxation, a pre/post sandwich, or a per-stage hook.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .boundary import (
    fill_extrapolation,
    fill_far_field,
    fill_far_field_left,
    fill_piston,
    fill_reflecting,
)
from .errors import ConfigError, NonPhysicalState
from .grid import FieldGrid, Grid1D, SpongeGeometry
from .riemann import semidiscrete_rhs
from .sponge import AbcMethod, apply_abc
from .timestepping import heun_step, max_wave_speed

LEFT_BCS = ("piston", "far-field")
RIGHT_BCS = ("far-field", "extrapolation", "reflecting")


@dataclass
class RunResult:
    times: np.ndarray
    u: np.ndarray                      # (n_out, n_interior) velocity snapshots
    extras: dict = field(default_factory=dict)
    status: str = "ok"
    runtime_s: float = 0.0
    n_steps: int = 0
    observed_max_speed: float = 0.0
    n_comp: int = 0                    # cells left of the sponge
    dx: float = 0.0


class Simulation:
    def __init__(
        self,
        eq,
        grid: Grid1D,
        geometry: SpongeGeometry,
        method: AbcMethod,
        *,
        left_bc: str = "piston",
        right_bc: str = "far-field",
        amplitude: float = 0.4,
        courant: float = 0.8,
        initial=None,
        reconstruction: str = "characteristic",
    ):
        if left_bc not in LEFT_BCS:
            raise ConfigError(f"unknown left boundary {left_bc!r}")
        if method.tag == "extrapolation":
            right_bc = "extrapolation"
        if right_bc not in RIGHT_BCS:
            raise ConfigError(f"unknown right boundary {right_bc!r}")
        self.eq = eq
        self.grid = grid
        self.geometry = geometry
        self.method = method
        self.left_bc = left_bc
        self.right_bc = right_bc
        self.amplitude = amplitude
        self.courant = courant
        if reconstruction not in ("characteristic", "conserved"):
            raise ConfigError(f"unknown reconstruction {reconstruction!r}")
        self.reconstruction = reconstruction
        self.hooks = apply_abc(eq, grid, method)
        self.fg = FieldGrid.constant(grid, eq.far_field)
        if initial is not None:
            self.fg.interior[:] = initial(grid.centers())
        self.observed_max_speed = 0.0
        self.n_comp = int(round(geometry.x_start / grid.dx))

    def fill_ghosts(self, fg: FieldGrid) -> None:
        if self.left_bc == "piston":
            fill_piston(fg, self.eq, self.amplitude)
        else:
            fill_far_field_left(fg, self.eq.far_field)
        if self.right_bc == "far-field":
            fill_far_field(fg, self.eq.far_field)
        elif self.right_bc == "extrapolation":
            fill_extrapolation(fg)
        else:
            fill_reflecting(fg)

    def rhs(self, fg: FieldGrid) -> np.ndarray:
        out = semidiscrete_rhs(fg, self.eq, self.hooks.speed_scale, self.reconstruction)
        if self.hooks.add_source is not None:
            self.hooks.add_source(fg, out)
        return out

    def step(self, t_stop: float) -> None:
        """One Heun step, never passing t_stop."""
        fg = self.fg
        smax = max_wave_speed(fg, self.eq)
        self.observed_max_speed = max(self.observed_max_speed, smax)
        dt = self.courant * fg.grid.dx / smax
        if fg.t + dt > t_stop - 1e-12:
            dt = t_stop - fg.t
        if self.hooks.pre_step is not None:
            self.hooks.pre_step(fg)
        heun_step(fg, self.rhs, self.fill_ghosts, dt, stage_hook=self.hooks.stage_hook)
        if self.hooks.post_step is not None:
            self.hooks.post_step(fg)
        if not np.isfinite(fg.interior).all():
            raise NonPhysicalState(f"solution lost finiteness at t = {fg.t:.6g}")

    def run(
        self,
        output_times,
        recorders: dict | None = None,
        raise_on_failure: bool = True,
    ) -> RunResult:
        """Advance through the sorted output times, recording at each one."""
        output_times = np.asarray(output_times, dtype=float)
        recorders = recorders or {}
        times, snapshots = [], []
        extras = {name: [] for name in recorders}
        status = "ok"
        start = time.perf_counter()
        n_steps = 0

        def record():
            times.append(self.fg.t)
            snapshots.append(self.fg.interior[1].copy())
            for name, fn in recorders.items():
                extras[name].append(fn(self.fg))

        try:
            with np.errstate(all="ignore"):
                for t_out in output_times:
                    if t_out <= self.fg.t + 1e-12:
                        self.fg.t = t_out
                        record()
                        continue
                    while self.fg.t < t_out - 1e-12:
                        self.step(t_out)
                        n_steps += 1
                    self.fg.t = t_out
                    record()
        except NonPhysicalState:
            if raise_on_failure:
                raise
            status = "diverged"
        return RunResult(
            times=np.asarray(times),
            u=np.asarray(snapshots) if snapshots else np.zeros((0, self.grid.num_cells)),
            extras={k: np.asarray(v) for k, v in extras.items()},
            status=status,
            runtime_s=time.perf_counter() - start,
            n_steps=n_steps,
            observed_max_speed=self.observed_max_speed,
            n_comp=self.n_comp,
            dx=self.grid.dx,
        )
