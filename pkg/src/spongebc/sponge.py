r"""Absorbing-boundary-condition machinery for the sponge layer.

Profiles
    phi ramps linearly from 0 to 1 across the sponge.  Two weight shapes
    are available: ``A`` (cubic Hermite, vanishing slope at the sponge
    start) and ``B`` (cubic/sextic blend 1 - [b phi^3 + (1-b) phi^6]).  Damping
    rates rise as d_i(x) = sigma_i (1 - Gamma_d(x)); the slowing factor
    falls as s(x) = Gamma_s(x) when switched on and is identically 1
    otherwise.

Methods
    rm / rm2 / rm-rk          scalar relaxation toward the far-field state
    rm-m / rm-m2 / rm-m-rk    matrix-valued relaxation absorbing selected
                              characteristic fields only
    sdo                       directional slowing/damping source terms
    s-sdo                     scalar (componentwise) slowing/damping
    ndo                       nonlocal damping built from the integral of
                              the directional damping matrix against q_x
    none / extrapolation      no sponge action at all

The relaxation step is q <- Gam q* + (I - Gam) qbar.  The matrix-valued
weight Gam = R diag(Gamma_i) R^{-1} is assembled per cell from the
closed-form field matrices.  Every method's modification vanishes
identically for x < x_start.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equations import apply_matrix
from .errors import ConfigError, DomainError
from .grid import Grid1D, SpongeGeometry
from .riemann import minmod

METHOD_TAGS = (
    "none",
    "extrapolation",
    "rm",
    "rm-m",
    "rm2",
    "rm-m2",
    "rm-rk",
    "rm-m-rk",
    "sdo",
    "s-sdo",
    "ndo",
)

RELAX_TAGS = ("rm", "rm-m", "rm2", "rm-m2", "rm-rk", "rm-m-rk")
SOURCE_TAGS = ("sdo", "s-sdo", "ndo")


def phi(x, geom: SpongeGeometry):
    """Affine ramp: 0 below the sponge, 1 beyond it."""
    x = np.asarray(x, dtype=float)
    out = (x - geom.x_start) / geom.width if geom.width > 0 else np.where(x > geom.x_start, 1.0, 0.0)
    return np.clip(out, 0.0, 1.0)


def gamma_a(x, geom: SpongeGeometry):
    """Cubic weight with Gamma(x_start) = 1 and vanishing slope there."""
    p = 1.0 - phi(x, geom)
    return -2.0 * p**3 + 3.0 * p**2


def gamma_b(x, geom: SpongeGeometry, b: float = 0.5):
    """Cubic/sextic blend weight 1 - [b phi^3 + (1 - b) phi^6]."""
    if not 0.0 <= b <= 1.0:
        raise DomainError("b must lie in [0, 1]")
    p = phi(x, geom)
    return 1.0 - (b * p**3 + (1.0 - b) * p**6)


def weight_function(kind: str, x, geom: SpongeGeometry, b: float = 0.5):
    if kind == "A":
        return gamma_a(x, geom)
    if kind == "B":
        return gamma_b(x, geom, b)
    raise ConfigError(f"unknown profile kind {kind!r}")


@dataclass(frozen=True)
class SpongeConfig:
    """Geometry, profile choices and per-field selectors for one method."""

    geometry: SpongeGeometry
    damping_profile: str = "A"
    slowing_profile: str | None = None
    weight_profile: str = "B"
    b: float = 0.5
    sigma: float = 30.0
    damp_fields: tuple[bool, bool, bool] = (False, False, True)
    slow_fields: tuple[bool, bool, bool] = (False, False, True)
    relax_fields: tuple[bool, bool, bool] = (False, False, True)

    @property
    def sigma_vec(self) -> np.ndarray:
        return np.where(np.asarray(self.damp_fields, dtype=bool), float(self.sigma), 0.0)

    def damping_rates(self, x) -> np.ndarray:
        """d_i(x) = sigma_i (1 - Gamma_d(x)), shape (3, len(x))."""
        ramp = 1.0 - weight_function(self.damping_profile, x, self.geometry, self.b)
        return self.sigma_vec[:, None] * ramp[None, :]

    def slowing_factor(self, x) -> np.ndarray:
        """Common speed scale s(x); identically 1 when slowing is off."""
        x = np.asarray(x, dtype=float)
        if self.slowing_profile is None:
            return np.ones_like(x)
        return weight_function(self.slowing_profile, x, self.geometry, self.b)

    def weight(self, x) -> np.ndarray:
        return weight_function(self.weight_profile, x, self.geometry, self.b)


_PRESETS = {
    "sdo": dict(damping_profile="A", slowing_profile="B", sigma=30.0),
    "s-sdo": dict(damping_profile="A", slowing_profile=None, sigma=30.0,
                  damp_fields=(True, True, True)),
    "ndo": dict(damping_profile="B", slowing_profile=None, sigma=20.0),
}


@dataclass(frozen=True)
class AbcMethod:
    tag: str
    config: SpongeConfig | None = None

    @classmethod
    def preset(cls, tag: str, geometry: SpongeGeometry | None = None, **overrides) -> "AbcMethod":
        """Method with its tuned default profiles, overridable field by field."""
        if tag not in METHOD_TAGS:
            raise ConfigError(f"unknown ABC method {tag!r}")
        if tag in ("none", "extrapolation"):
            if overrides:
                raise ConfigError(f"{tag!r} takes no sponge parameters")
            return cls(tag=tag, config=None)
        if geometry is None:
            raise ConfigError(f"{tag!r} requires a sponge geometry")
        if geometry.width <= 0.0:
            raise ConfigError(f"{tag!r} requires a sponge of positive width")
        kwargs = dict(_PRESETS.get(tag, {}))
        if tag.startswith("rm") and not tag.startswith("rm-m"):
            kwargs["relax_fields"] = (True, True, True)
        kwargs.update(overrides)
        return cls(tag=tag, config=SpongeConfig(geometry=geometry, **kwargs))


def relax_scalar(q, gam, qbar):
    """Convex combination Gamma q + (1 - Gamma) qbar, per cell."""
    q = np.asarray(q, dtype=float)
    qbar = np.asarray(qbar, dtype=float)
    return gam * q + (1.0 - gam) * qbar[:, None]


def relax_matrix(eq, q, gammas, qbar):
    """Matrix-valued relaxation qbar + R diag(Gamma_i) R^{-1} (q - qbar)."""
    q = np.asarray(q, dtype=float)
    qbar = np.asarray(qbar, dtype=float)
    gam_mat = eq.field_matrix(q, gammas)
    return qbar[:, None] + apply_matrix(gam_mat, q - qbar[:, None])


def rm_damping_rates(gam: float, dt: float, lam: float):
    """Effective damping rates of one relaxation step.

    Returns the forward-Euler reading (1 - Gamma)/(dt |lam|) and the exact
    exponential reading -ln(Gamma)/(dt |lam|).
    """
    if lam == 0.0:
        raise DomainError("damping rate undefined for the stationary field")
    if not 0.0 < gam <= 1.0:
        raise DomainError("weight value must lie in (0, 1]")
    d_fe = (1.0 - gam) / (dt * abs(lam))
    d_exact = -np.log(gam) / (dt * abs(lam))
    return d_fe, d_exact


@dataclass
class SpongeHooks:
    """Exactly one action channel is populated per method."""

    speed_scale: tuple[np.ndarray, np.ndarray] | None = None
    add_source: object = None     # callable(fg, out): accumulate into the RHS
    post_step: object = None      # callable(fg): applied after each full step
    stage_hook: object = None     # callable(fg): applied after each RK stage
    pre_step: object = None       # callable(fg): applied before each full step


def _sponge_start_index(grid: Grid1D, geom: SpongeGeometry) -> int:
    return int(round(geom.x_start / grid.dx))


def _relaxer(eq, grid: Grid1D, config: SpongeConfig, matrix_valued: bool):
    """Per-call relaxation acting on the sponge cells only."""
    i0 = _sponge_start_index(grid, config.geometry)
    centers = grid.centers()[i0:]
    gam = config.weight(centers)
    qbar = eq.far_field
    if not matrix_valued:
        def relax(fg):
            sl = fg.interior[:, i0:]
            sl[:] = relax_scalar(sl, gam, qbar)
        return relax

    sel = np.asarray(config.relax_fields, dtype=bool)
    gammas = np.where(sel[:, None], gam[None, :], 1.0)

    def relax(fg):
        sl = fg.interior[:, i0:]
        sl[:] = relax_matrix(eq, sl, gammas, qbar)

    return relax


def _sdo_source(eq, grid: Grid1D, config: SpongeConfig):
    """Directional source -M_D(q)(q - qbar), M_D = R diag(d_i s_i |lam_i|) R^{-1}."""
    i0 = _sponge_start_index(grid, config.geometry)
    centers = grid.centers()[i0:]
    d = config.damping_rates(centers)
    s = config.slowing_factor(centers)
    # s_i is the per-field slowing factor: 1 wherever the field is not slowed
    ds = d * np.where(np.asarray(config.slow_fields, bool)[:, None], s[None, :], 1.0)
    qbar = eq.far_field

    def add(fg, out):
        qs = fg.interior[:, i0:]
        c = eq.max_speed(qs)
        sig = ds * np.stack([c, np.zeros_like(c), c])
        m = eq.field_matrix(qs, sig)
        out[:, i0:] -= apply_matrix(m, qs - qbar[:, None])

    return add


def _ssdo_source(eq, grid: Grid1D, config: SpongeConfig):
    """Componentwise source -d(x) s(x) (q - qbar); no eigen-decomposition."""
    i0 = _sponge_start_index(grid, config.geometry)
    centers = grid.centers()[i0:]
    ramp = 1.0 - weight_function(config.damping_profile, centers, config.geometry, config.b)
    ds = float(config.sigma) * ramp * config.slowing_factor(centers)
    qbar = eq.far_field

    def add(fg, out):
        qs = fg.interior[:, i0:]
        out[:, i0:] -= ds[None, :] * (qs - qbar[:, None])

    return add


def _speed_scale(grid: Grid1D, config: SpongeConfig, mode: str):
    """Slowing arrays: "field" slows selected fields, "scalar" slows them all."""
    if config.slowing_profile is None:
        return None
    s_iface = config.slowing_factor(grid.interfaces())
    s_cell = config.slowing_factor(grid.centers())
    if mode == "scalar":
        return ("scalar", s_iface, s_cell)
    return ("field", s_iface, s_cell, tuple(config.slow_fields))


def _ndo_source(eq, grid: Grid1D, config: SpongeConfig):
    """Nonlocal damping: source(x_j) = integral over [x_j, x_end] of M_D q_z.

    Under the piecewise-affine in-cell representation the integral splits
    into in-cell parts (Simpson's rule against the cell slope) and
    interface jumps (midpoint rule along a straight path in state space).
    Cells left of the sponge receive nothing: the damping matrix vanishes
    there and no modification may leak into the computational domain.
    Evaluated once per RHS call; a single right-to-left sweep accumulates
    the suffix sums.
    """
    dx = grid.dx
    i0 = _sponge_start_index(grid, config.geometry)
    m = grid.num_cells - i0
    if m == 0:
        raise ConfigError("ndo requires a sponge of positive width")
    centers = grid.centers()[i0:]
    qbar = eq.far_field

    # damping rates at the quadrature nodes (static in time)
    d_left = config.damping_rates(centers - 0.5 * dx)
    d_mid = config.damping_rates(centers)
    d_q34 = config.damping_rates(centers + 0.25 * dx)
    d_right = config.damping_rates(centers + 0.5 * dx)

    def matrix_at(d_vals, q):
        c = eq.max_speed(q)
        sig = d_vals * np.stack([c, np.zeros_like(c), c])
        return eq.field_matrix(q, sig)

    def add(fg, out):
        g = fg.grid.ghost
        # limited slopes of the sponge cells (neighbors may lie outside the sponge)
        lo = fg.q[:, g + i0 - 1 : g + i0 + m - 1]
        mid = fg.q[:, g + i0 : g + i0 + m]
        hi = fg.q[:, g + i0 + 1 : g + i0 + m + 1]
        slopes = minmod((mid - lo) / dx, (hi - mid) / dx)
        q_l = mid - 0.5 * dx * slopes
        q_r = mid + 0.5 * dx * slopes
        q_34 = mid + 0.25 * dx * slopes

        # full-cell Simpson integral of M_D q_z over each sponge cell
        w_full = matrix_at(d_left, q_l) + 4.0 * matrix_at(d_mid, mid) + matrix_at(d_right, q_r)
        full = (dx / 6.0) * apply_matrix(w_full, slopes)
        # half-cell integral from the cell center to its right interface
        w_half = matrix_at(d_mid, mid) + 4.0 * matrix_at(d_q34, q_34) + matrix_at(d_right, q_r)
        half = (dx / 12.0) * apply_matrix(w_half, slopes)

        # interface jumps, the last one connecting to the far-field state
        q_plus = np.empty_like(q_l)
        q_plus[:, :-1] = q_l[:, 1:]
        q_plus[:, -1] = qbar
        jump_state = 0.5 * (q_r + q_plus)
        jumps = apply_matrix(matrix_at(d_right, jump_state), q_plus - q_r)

        # suffix sums: source_j = half_j + sum_{k>=j} jump_k + sum_{k>j} full_k
        suffix_jumps = np.cumsum(jumps[:, ::-1], axis=1)[:, ::-1]
        suffix_full = np.zeros_like(full)
        suffix_full[:, :-1] = np.cumsum(full[:, :0:-1], axis=1)[:, ::-1]
        out[:, i0:] += half + suffix_jumps + suffix_full

    return add


def apply_abc(eq, grid: Grid1D, method: AbcMethod) -> SpongeHooks:
    """Wire one method into its hook channel; everything else stays empty."""
    tag = method.tag
    if tag not in METHOD_TAGS:
        raise ConfigError(f"unknown ABC method {tag!r}")
    if tag in ("none", "extrapolation"):
        return SpongeHooks()
    config = method.config
    if config is None:
        raise ConfigError(f"{tag!r} requires a sponge configuration")
    if config.geometry.width <= 0.0:
        raise ConfigError(f"{tag!r} requires a sponge of positive width")

    if tag in RELAX_TAGS:
        relax = _relaxer(eq, grid, config, matrix_valued=tag.startswith("rm-m"))
        if tag in ("rm", "rm-m"):
            return SpongeHooks(post_step=relax)
        if tag in ("rm2", "rm-m2"):
            return SpongeHooks(pre_step=relax, post_step=relax)
        return SpongeHooks(stage_hook=relax)

    if tag == "sdo":
        return SpongeHooks(speed_scale=_speed_scale(grid, config, "field"),
                           add_source=_sdo_source(eq, grid, config))
    if tag == "s-sdo":
        return SpongeHooks(speed_scale=_speed_scale(grid, config, "scalar"),
                           add_source=_ssdo_source(eq, grid, config))
    return SpongeHooks(add_source=_ndo_source(eq, grid, config))
