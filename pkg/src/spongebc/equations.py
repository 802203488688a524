r"""Governing equations: Lagrangian gas dynamics and its linearization.

The nonlinear system evolves q = (V, u, E) (specific volume, velocity,
specific total energy) in Lagrangian mass coordinates:

.. math::
    V_t - u_x = 0, \qquad u_t + p_x = 0, \qquad E_t + (u p)_x = 0,

with the ideal-gas closure p = (gamma - 1)(E - u^2/2)/V.  The flux Jacobian
has symmetric eigenvalues (-c, 0, c) with c = sqrt(gamma p / V).

The linear system is the constant-coefficient linearization about the
far-field state qbar = (1, 0, gamma/(gamma-1)); its state vector holds
perturbations and its reported pressure uses p = gamma V + (gamma - 1) E.

Both systems expose the same interface: ``pressure``, ``flux``,
``max_speed``, ``eigenvalues``, ``eigenstructure`` and ``field_matrix``.
``field_matrix(q, sig)`` assembles M = R diag(sig) R^{-1} from closed-form
entries (no per-cell eigendecomposition), which is what every directional
sponge operator is built from.  All functions accept a single state of
shape (3,) or a batch of shape (3, n).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPhysicalState

#: Hard floor below which V or p is declared non-physical.
VACUUM_FLOOR = 1e-12


@dataclass(frozen=True)
class Eigenstructure:
    """Ordered eigenpairs of the flux Jacobian.

    ``lam`` has shape (3,) or (3, n) with lam[0] < lam[1] = 0 < lam[2];
    ``right`` holds the right eigenvectors as columns, shape (3, 3) or
    (3, 3, n).  The eigenvectors are kept unnormalized, exactly as the
    closed-form field matrices expect.
    """

    lam: np.ndarray
    right: np.ndarray


def _check_positive(name, value):
    if np.any(value <= VACUUM_FLOOR):
        raise NonPhysicalState(f"{name} <= {VACUUM_FLOOR:g} encountered")


class LagrangianEuler:
    """Nonlinear Lagrangian gas dynamics for an ideal gas."""

    kind = "nonlinear"

    def __init__(self, gamma: float = 1.4):
        if gamma <= 1.0:
            raise ValueError("gamma must exceed 1")
        self.gamma = gamma
        self.far_field = np.array([1.0, 0.0, gamma / (gamma - 1.0)])

    def pressure(self, q):
        V, u, E = np.asarray(q)
        _check_positive("V", V)
        p = (self.gamma - 1.0) * (E - 0.5 * u * u) / V
        _check_positive("p", p)
        return p

    def energy(self, V, u, p):
        """Invert the closure: E from (V, u, p)."""
        return p * V / (self.gamma - 1.0) + 0.5 * u * u

    def flux(self, q):
        q = np.asarray(q)
        p = self.pressure(q)
        return np.stack([-q[1], p, q[1] * p])

    def sound_speed(self, q):
        q = np.asarray(q)
        p = self.pressure(q)
        return np.sqrt(self.gamma * p / q[0])

    def max_speed(self, q):
        return self.sound_speed(q)

    def eigenvalues(self, q):
        c = self.sound_speed(q)
        return np.stack([-c, np.zeros_like(c), c])

    def eigenstructure(self, q) -> Eigenstructure:
        q = np.asarray(q)
        V, u, E = q
        p = self.pressure(q)
        c = np.sqrt(self.gamma * p / V)
        sg = np.sqrt(self.gamma)
        a = np.sqrt(V / p)
        b = np.sqrt(p * V)
        zero = np.zeros_like(c)
        lam = np.stack([-c, zero, c])
        # stacking along axis=1 puts r_1, r_2, r_3 into the columns
        right = np.stack(
            [
                np.stack([-a, -sg + zero, b - u * sg]),
                np.stack([(self.gamma - 1.0) + zero, zero, p]),
                np.stack([-a, sg + zero, b + u * sg]),
            ],
            axis=1,
        )
        return Eigenstructure(lam=lam, right=right)

    def field_matrix(self, q, sig):
        """M = R diag(sig) R^{-1} via closed forms; shape (3, 3) or (3, 3, n)."""
        q = np.asarray(q)
        V, u, E = q
        p = self.pressure(q)
        g = self.gamma
        s1, s2, s3 = np.asarray(sig)
        s1 = np.broadcast_to(s1, np.shape(V))
        s2 = np.broadcast_to(s2, np.shape(V))
        s3 = np.broadcast_to(s3, np.shape(V))
        c1 = s1 - 2.0 * s2 + s3
        c2 = s1 - s3
        c3 = g - 1.0
        root_gpv = np.sqrt(g * p * V)
        root_pv = np.sqrt(p * V)
        c4 = 2.0 * root_gpv
        sg = np.sqrt(g)
        m = np.empty((3, 3) + np.shape(V))
        m[0, 0] = (2.0 * g * s2 + c1) / (2.0 * g)
        m[0, 1] = (root_gpv * c2 + u * c3 * c1) / (2.0 * p * g)
        m[0, 2] = -c1 * c3 / (2.0 * p * g)
        m[1, 0] = c2 * p / c4
        m[1, 1] = (root_gpv * (s1 + s3) + u * c3 * c2) / c4
        m[1, 2] = -c2 * c3 / c4
        m[2, 0] = (-p * V * c1 + c2 * root_pv * sg * u) / (2.0 * V * g)
        m[2, 1] = (root_pv * u * c1 + sg * (c3 * u * u - p * V) * c2) / (c4 * sg)
        m[2, 2] = (-root_pv * c1 - sg * c3 * c2 * u + g * root_pv * (s1 + s3)) / (c4 * sg)
        return m


class LinearizedLagrangian:
    """Constant-coefficient linearization about the far-field state."""

    kind = "linear"

    def __init__(self, gamma: float = 1.4):
        if gamma <= 1.0:
            raise ValueError("gamma must exceed 1")
        self.gamma = gamma
        self.far_field = np.zeros(3)
        g = gamma
        self.matrix = np.array(
            [
                [0.0, -1.0, 0.0],
                [-g, 0.0, g - 1.0],
                [0.0, g, 0.0],
            ]
        )
        self._right = np.array(
            [
                [-1.0 / g, (g - 1.0) / g, -1.0 / g],
                [-1.0, 0.0, 1.0],
                [1.0, 1.0, 1.0],
            ]
        )

    def pressure(self, q):
        V, u, E = np.asarray(q)
        return self.gamma * V + (self.gamma - 1.0) * E

    def energy(self, V, u, p):
        """Invert p = gamma V + (gamma - 1) E for E."""
        return (p - self.gamma * V) / (self.gamma - 1.0)

    def flux(self, q):
        q = np.asarray(q)
        return np.einsum("ij,j...->i...", self.matrix, q)

    def max_speed(self, q):
        q = np.asarray(q)
        shape = q.shape[1:]
        return np.full(shape, self.gamma) if shape else self.gamma

    def eigenvalues(self, q):
        q = np.asarray(q)
        g = self.gamma
        lam = np.array([-g, 0.0, g])
        if q.ndim == 1:
            return lam
        return np.repeat(lam[:, None], q.shape[1], axis=1)

    def eigenstructure(self, q) -> Eigenstructure:
        q = np.asarray(q)
        lam = self.eigenvalues(q)
        if q.ndim == 1:
            return Eigenstructure(lam=lam, right=self._right.copy())
        right = np.repeat(self._right[:, :, None], q.shape[1], axis=2)
        return Eigenstructure(lam=lam, right=right)

    def field_matrix(self, q, sig):
        q = np.asarray(q)
        g = self.gamma
        s1, s2, s3 = np.asarray(sig)
        shape = q.shape[1:]
        s1 = np.broadcast_to(s1, shape)
        s2 = np.broadcast_to(s2, shape)
        s3 = np.broadcast_to(s3, shape)
        half_sum = 0.5 * (s1 + s3)
        half_dif = 0.5 * (s1 - s3)
        m = np.empty((3, 3) + shape)
        m[0, 0] = (half_sum + (g - 1.0) * s2) / g
        m[0, 1] = half_dif / g
        m[0, 2] = (g - 1.0) / g**2 * (s2 - half_sum)
        m[1, 0] = half_dif
        m[1, 1] = half_sum
        m[1, 2] = -(g - 1.0) / g * half_dif
        m[2, 0] = s2 - half_sum
        m[2, 1] = -half_dif
        m[2, 2] = ((g - 1.0) * half_sum + s2) / g
        return m


def entropy(q, gamma: float):
    """Thermodynamic entropy s = log(p V^gamma) / (1 - gamma) of a nonlinear state."""
    V, u, E = np.asarray(q)
    _check_positive("V", V)
    p = (gamma - 1.0) * (E - 0.5 * u * u) / V
    _check_positive("p", p)
    return np.log(p * V**gamma) / (1.0 - gamma)


def make_equations(kind: str, gamma: float = 1.4):
    if kind == "nonlinear":
        return LagrangianEuler(gamma)
    if kind == "linear":
        return LinearizedLagrangian(gamma)
    raise ValueError(f"unknown equation kind {kind!r}")


def apply_matrix(m, v):
    """Per-cell matrix-vector product for stacked (3, 3, n) matrices."""
    if m.ndim == 2:
        return m @ v
    return np.einsum("ijn,jn->in", m, v)


def invert_3x3(m):
    """Adjugate-based inverse of stacked (3, 3, n) (or single (3, 3)) matrices."""
    a, b, c = m[0, 0], m[0, 1], m[0, 2]
    d, e, f = m[1, 0], m[1, 1], m[1, 2]
    g, h, i = m[2, 0], m[2, 1], m[2, 2]
    ca = e * i - f * h
    cb = f * g - d * i
    cc = d * h - e * g
    det = a * ca + b * cb + c * cc
    inv = np.empty_like(m)
    inv[0, 0] = ca
    inv[0, 1] = c * h - b * i
    inv[0, 2] = b * f - c * e
    inv[1, 0] = cb
    inv[1, 1] = a * i - c * g
    inv[1, 2] = c * d - a * f
    inv[2, 0] = cc
    inv[2, 1] = b * g - a * h
    inv[2, 2] = a * e - b * d
    return inv / det
