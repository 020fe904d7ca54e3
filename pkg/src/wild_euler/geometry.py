"""Constraint geometry of the relaxed planar system.

States are triples (m, U, q) with m in R^2, U a traceless symmetric 2x2
matrix stored as (u, w) = (U_rr, U_rz), and a scalar q. The energy
e = lambda_max(m (x) m / rho - U) controls membership in the convex hull of
the constraint set K_{rho,chi}; everything here uses the planar normalisation
chi / 2.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .errors import DegenerateDensity, DegenerateDirection, InvalidDomain, NotInCone

#: Relative tolerance for the q-equality and |m|^2 = rho chi tests.
EQ_TOL = 1e-12
#: Scale-invariant wave-cone tolerance on |det M|.
CONE_TOL = 1e-10


@dataclass(frozen=True)
class State:
    m_r: object = 0.0
    m_z: object = 0.0
    u: object = 0.0
    w: object = 0.0
    q: object = 0.0

    def __add__(self, other):
        return State(*(a + b for a, b in zip(self.astuple(), other.astuple())))

    def __sub__(self, other):
        return State(*(a - b for a, b in zip(self.astuple(), other.astuple())))

    def __mul__(self, s):
        return State(*(s * a for a in self.astuple()))

    __rmul__ = __mul__

    def astuple(self):
        return (self.m_r, self.m_z, self.u, self.w, self.q)

    @property
    def m2(self):
        return self.m_r * self.m_r + self.m_z * self.m_z

    def norm(self):
        """Euclidean norm of the (m, U) part, counting U_rz twice as a matrix would."""
        return np.sqrt(self.m2 + self.u ** 2 + self.w ** 2)


@dataclass(frozen=True)
class DensityPressure:
    """Density rho0(r) = r, pressure p = rho^gamma, internal energy rho^(gamma-1)/(gamma-1)."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 1:
            raise InvalidDomain(f"gamma must exceed 1, got {self.gamma}")

    @staticmethod
    def rho0(r):
        r = np.asarray(r, dtype=float)
        return np.where(r > 0, r, 0.0)

    def p(self, rho):
        return np.asarray(rho, dtype=float) ** self.gamma

    def dp(self, rho):
        return self.gamma * np.asarray(rho, dtype=float) ** (self.gamma - 1)

    def eps(self, rho):
        return np.asarray(rho, dtype=float) ** (self.gamma - 1) / (self.gamma - 1)

    def deps(self, rho):
        return np.asarray(rho, dtype=float) ** (self.gamma - 2)

    def pi(self, r):
        """Pressure of the linked axisymmetric flow."""
        g = self.gamma
        return g / (g - 1) * np.asarray(r, dtype=float) ** (g - 1)

    def dpi(self, r):
        g = self.gamma
        return g * np.asarray(r, dtype=float) ** (g - 2)


def lambda_max_sym2(a, b, c):
    """Largest eigenvalue of [[a, b], [b, c]], elementwise."""
    return 0.5 * (np.asarray(a) + c) + np.hypot(0.5 * (np.asarray(a) - c), b)


def energy_e(rho, s: State):
    """e(rho, m, U) = lambda_max(m (x) m / rho - U)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DegenerateDensity("energy needs rho > 0")
    out = kernels.energy_field(rho, s.m_r, s.m_z, s.u, s.w)
    return out if out.ndim else float(out)


def forced_state(rho, m_r, m_z, dp: DensityPressure, chi=None):
    """The K_rho point over m: U = m(x)m/rho - |m|^2/(2 rho) I, q = p + |m|^2/(2 rho).

    With ``chi`` given the q-level is p + chi/2 instead (hull hyperplane).
    """
    m2 = m_r * m_r + m_z * m_z
    u = (m_r * m_r - m_z * m_z) / (2 * rho)
    w = m_r * m_z / rho
    q = dp.p(rho) + (m2 / (2 * rho) if chi is None else 0.5 * chi)
    return State(m_r, m_z, u, w, q)


class Membership(Enum):
    IN_K = "in_K"
    IN_HYPERINTERIOR = "in_hyperinterior"
    IN_HULL = "in_hull"
    OUTSIDE = "outside"

    @property
    def in_convex_hull(self):
        return self is not Membership.OUTSIDE


def hull_membership(rho, chi, s: State, dp: DensityPressure) -> Membership:
    """Most specific class of ``s`` relative to K_{rho,chi} and its hull.

    The classes are exclusive: ``IN_K`` (constraint set), else
    ``IN_HYPERINTERIOR`` (strict energy inequality), else ``IN_HULL``
    (energy on the boundary value chi/2), else ``OUTSIDE``.
    """
    level = dp.p(rho) + 0.5 * chi
    if abs(s.q - level) > EQ_TOL * max(1.0, abs(level)):
        return Membership.OUTSIDE
    e = energy_e(rho, s)
    half = 0.5 * chi
    tol = EQ_TOL * max(1.0, half)
    if e > half + tol:
        return Membership.OUTSIDE
    if abs(s.m2 - rho * chi) <= EQ_TOL * max(1.0, rho * chi):
        return Membership.IN_K
    if e < half - tol:
        return Membership.IN_HYPERINTERIOR
    return Membership.IN_HULL


def wave_cone_matrix(s: State):
    return np.array([[s.u + s.q, s.w, s.m_r],
                     [s.w, s.q - s.u, s.m_z],
                     [s.m_r, s.m_z, 0.0]], dtype=float)


def wave_cone_det(s: State):
    """det of the 3x3 wave-cone matrix, in closed form."""
    return (-(s.u + s.q) * s.m_z ** 2 + 2 * s.w * s.m_r * s.m_z
            - (s.q - s.u) * s.m_r ** 2)


def in_wave_cone(s: State, tol=CONE_TOL):
    scale = s.norm() + abs(s.q)
    return abs(wave_cone_det(s)) <= tol * scale ** 3


def plane_wave_residual(d: State, xi):
    """Residual of the linear system for d * h(x . xi), per unit h'.

    Returns (momentum_r, momentum_z, divergence) from direct substitution:
    xi_t m + (U + q I) xi_x and m . xi_x.
    """
    xr, xz, xt = xi
    return np.array([
        xt * d.m_r + (d.u + d.q) * xr + d.w * xz,
        xt * d.m_z + d.w * xr + (d.q - d.u) * xz,
        d.m_r * xr + d.m_z * xz,
    ])


def lambda_direction(s_from: State, s_to: State, tol=CONE_TOL):
    """Plane-wave direction joining two states sharing q.

    Returns ``(d, xi)`` with ``d = s_to - s_from`` and a unit wave vector
    ``xi`` = (xi_r, xi_z, xi_t) in the kernel of the wave-cone matrix, signed
    so that its first nonzero component is positive.
    """
    d = s_to - s_from
    if d.norm() + abs(d.q) == 0:
        raise NotInCone("zero direction")
    if not in_wave_cone(d, tol):
        raise NotInCone(f"det M = {wave_cone_det(d):.3e} is not zero")
    M = wave_cone_matrix(d)
    adj = np.array([
        [M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1], M[0, 2] * M[2, 1] - M[0, 1] * M[2, 2],
         M[0, 1] * M[1, 2] - M[0, 2] * M[1, 1]],
        [M[1, 2] * M[2, 0] - M[1, 0] * M[2, 2], M[0, 0] * M[2, 2] - M[0, 2] * M[2, 0],
         M[0, 2] * M[1, 0] - M[0, 0] * M[1, 2]],
        [M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0], M[0, 1] * M[2, 0] - M[0, 0] * M[2, 1],
         M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]],
    ])
    norms = np.linalg.norm(adj, axis=0)
    scale = (d.norm() + abs(d.q)) ** 2
    k = int(np.argmax(norms))
    if norms[k] <= 1e-10 * scale:
        raise DegenerateDirection("wave-cone matrix has rank below two")
    xi = adj[:, k] / norms[k]
    nz = np.nonzero(np.abs(xi) > 1e-14)[0]
    if xi[nz[0]] < 0:
        xi = -xi
    return d, xi
