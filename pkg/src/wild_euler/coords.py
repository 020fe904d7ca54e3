"""Cylindrical/Cartesian conversions for swirl-free axisymmetric fields.

Everything here is vectorised: scalar attributes of :class:`CylVec` and
:class:`CartVec` may be numpy arrays of a common shape.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidField, NotSwirlFree

#: Angles used when probing a field for axisymmetry.
N_THETA_PROBE = 16


@dataclass(frozen=True)
class CylVec:
    """Vector with cylindrical components attached at (r, theta, z)."""

    v_r: object
    v_theta: object
    v_z: object
    r: object
    theta: object = 0.0
    z: object = 0.0

    @property
    def swirl_free(self):
        return bool(np.all(np.asarray(self.v_theta) == 0))


@dataclass(frozen=True)
class CartVec:
    v_x: object
    v_y: object
    v_z: object
    x: object
    y: object
    z: object = 0.0


def _check_finite(*values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise InvalidField("non-finite vector component")


def to_cartesian(v: CylVec) -> CartVec:
    _check_finite(v.v_r, v.v_theta, v.v_z, v.r, v.theta, v.z)
    if np.any(np.asarray(v.r) <= 0):
        raise InvalidField("attachment radius must be positive")
    c, s = np.cos(v.theta), np.sin(v.theta)
    return CartVec(
        v_x=v.v_r * c - v.v_theta * s,
        v_y=v.v_r * s + v.v_theta * c,
        v_z=v.v_z,
        x=v.r * c,
        y=v.r * s,
        z=v.z,
    )


def to_cylindrical(v: CartVec) -> CylVec:
    _check_finite(v.v_x, v.v_y, v.v_z, v.x, v.y, v.z)
    r = np.hypot(v.x, v.y)
    if np.any(r <= 0):
        raise InvalidField("point on the symmetry axis has no cylindrical frame")
    theta = np.arctan2(v.y, v.x)
    c, s = v.x / r, v.y / r
    return CylVec(
        v_r=v.v_x * c + v.v_y * s,
        v_theta=-v.v_x * s + v.v_y * c,
        v_z=v.v_z,
        r=r,
        theta=theta,
        z=v.z,
    )


def lift(v_r, v_z, r, theta=0.0, z=0.0) -> CylVec:
    """Lift planar (r, z) components to the swirl-free field v_r e_r + v_z e_z."""
    return CylVec(v_r=v_r, v_theta=np.zeros_like(np.asarray(v_r, dtype=float)),
                  v_z=v_z, r=r, theta=theta, z=z)


def is_axisymmetric(field, r, z, tol=0.0, n_theta=N_THETA_PROBE):
    """Probe a Cartesian-valued field ``field(x, y, z) -> (vx, vy, vz)``.

    The cylindrical components are sampled at ``n_theta`` equispaced angles
    and must agree with the theta=0 sample to within ``tol``.
    """
    thetas = 2.0 * np.pi * np.arange(n_theta) / n_theta
    comps = []
    for th in thetas:
        x, y = r * np.cos(th), r * np.sin(th)
        vx, vy, vz = field(x, y, z)
        cyl = to_cylindrical(CartVec(vx, vy, vz, x, y, z))
        comps.append(np.stack(np.broadcast_arrays(cyl.v_r, cyl.v_theta, cyl.v_z)))
    comps = np.array(comps)
    return bool(np.all(np.abs(comps - comps[0]) <= tol))


@dataclass(frozen=True)
class CylGradient:
    """First derivatives of a swirl-free axisymmetric test field.

    ``phi_r`` is the value of the radial component; it enters the Cartesian
    Jacobian through the hoop term phi_r / r.
    """

    dr_phi_r: object
    dz_phi_r: object
    dr_phi_z: object
    dz_phi_z: object
    phi_r: object = 0.0


def cartesian_jacobian(grad: CylGradient, r, theta):
    """Jacobian d(phi_i)/d(x_j) of phi = phi_r(r,z) e_r + phi_z(r,z) e_z.

    Built by the chain rule in Cartesian variables with phi_x = phi_r x/r,
    phi_y = phi_r y/r; returns an array of shape (..., 3, 3).
    """
    r = np.asarray(r, dtype=float)
    x, y = r * np.cos(theta), r * np.sin(theta)
    rx, ry = x / r, y / r  # dr/dx, dr/dy
    pr, a, b = grad.phi_r, grad.dr_phi_r, grad.dz_phi_r
    c, d = grad.dr_phi_z, grad.dz_phi_z
    # d(x/r)/dx = y^2/r^3, d(x/r)/dy = -xy/r^3, d(y/r)/dy = x^2/r^3
    r3 = r ** 3
    J = np.empty(np.broadcast(r, theta, pr, a, b, c, d).shape + (3, 3))
    J[..., 0, 0] = a * rx * rx + pr * y * y / r3
    J[..., 0, 1] = a * ry * rx - pr * x * y / r3
    J[..., 0, 2] = b * rx
    J[..., 1, 0] = a * rx * ry - pr * x * y / r3
    J[..., 1, 1] = a * ry * ry + pr * x * x / r3
    J[..., 1, 2] = b * ry
    J[..., 2, 0] = c * rx
    J[..., 2, 1] = c * ry
    J[..., 2, 2] = d
    return J


def advection_integrand_identity(v: CylVec, grad: CylGradient, swirl_tol=0.0):
    """Evaluate <v (x) v, grad_x phi> two ways.

    Returns ``(lhs, rhs)``: ``lhs`` goes through Cartesian components and the
    Cartesian Jacobian, ``rhs`` is the four-term cylindrical expression.
    """
    if np.any(np.abs(np.asarray(v.v_theta)) > swirl_tol):
        raise NotSwirlFree("advection identity needs v_theta = 0")
    cart = to_cartesian(v)
    vc = np.stack(np.broadcast_arrays(cart.v_x, cart.v_y, cart.v_z), axis=-1)
    J = cartesian_jacobian(grad, v.r, v.theta)
    lhs = np.einsum("...i,...j,...ij->...", vc, vc, J)
    vr, vz = v.v_r, v.v_z
    rhs = (vr * vr * grad.dr_phi_r + vr * vz * grad.dz_phi_r
           + vr * vz * grad.dr_phi_z + vz * vz * grad.dz_phi_z)
    return lhs, rhs


def identity_suite(n_samples=10_000, seed=0, r_range=(0.5, 2.0)):
    """Random swirl-free samples of the advection identity.

    Returns the maximum of |lhs - rhs| / (1 + |lhs|) over the sample.
    """
    rng = np.random.default_rng(seed)
    n = n_samples
    r = rng.uniform(*r_range, n)
    v = lift(rng.uniform(-1, 1, n), rng.uniform(-1, 1, n), r,
             theta=rng.uniform(0, 2 * np.pi, n), z=rng.uniform(0, 1, n))
    g = CylGradient(*rng.uniform(-1, 1, (5, n)))
    lhs, rhs = advection_integrand_identity(v, g)
    return float(np.max(np.abs(lhs - rhs) / (1.0 + np.abs(lhs))))
