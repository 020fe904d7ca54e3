import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from wild_euler.coords import (
    CartVec, CylGradient, CylVec, advection_integrand_identity, cartesian_jacobian,
    identity_suite, is_axisymmetric, lift, to_cartesian, to_cylindrical,
)
from wild_euler.errors import InvalidField, NotSwirlFree

finite = st.floats(-10, 10, allow_nan=False)
radius = st.floats(0.05, 10)
angle = st.floats(-np.pi, np.pi)


def test_to_cartesian_pure_radial_at_zero_angle():
    c = to_cartesian(CylVec(1.0, 0.0, 0.0, r=2.0, theta=0.0))
    assert (c.v_x, c.v_y, c.v_z, c.x, c.y) == (1.0, 0.0, 0.0, 2.0, 0.0)


def test_to_cartesian_quarter_turn():
    c = to_cartesian(CylVec(1.0, 0.0, 3.0, r=1.0, theta=np.pi / 2))
    assert np.allclose([c.v_x, c.v_y, c.v_z], [0.0, 1.0, 3.0], atol=1e-15)


def test_axis_point_rejected():
    with pytest.raises(InvalidField):
        to_cylindrical(CartVec(1.0, 0.0, 0.0, 0.0, 0.0))
    with pytest.raises(InvalidField):
        to_cartesian(CylVec(1.0, 0.0, 0.0, r=0.0))


def test_nonfinite_rejected():
    with pytest.raises(InvalidField):
        to_cartesian(CylVec(np.nan, 0.0, 0.0, r=1.0))


@settings(max_examples=200, deadline=None)
@given(finite, finite, finite, radius, angle, finite)
def test_round_trip(vr, vt, vz, r, th, z):
    back = to_cylindrical(to_cartesian(CylVec(vr, vt, vz, r, th, z)))
    scale = 1 + abs(vr) + abs(vt)
    assert abs(back.v_r - vr) <= 1e-13 * scale
    assert abs(back.v_theta - vt) <= 1e-13 * scale
    assert back.v_z == vz
    assert abs(back.r - r) <= 1e-13 * r


@settings(max_examples=200, deadline=None)
@given(finite, finite, radius, angle, finite, finite, finite, finite, finite)
def test_identity_property(vr, vz, r, th, a, b, c, d, pr):
    lhs, rhs = advection_integrand_identity(lift(vr, vz, r, th), CylGradient(a, b, c, d, pr))
    scale = (1 + vr * vr + vz * vz) * (1 + abs(a) + abs(b) + abs(c) + abs(d) + abs(pr / r))
    assert abs(lhs - rhs) <= 1e-13 * scale


def test_swirl_rejected():
    with pytest.raises(NotSwirlFree):
        advection_integrand_identity(CylVec(1.0, 0.5, 0.0, r=1.0), CylGradient(1, 1, 1, 1))


def test_jacobian_matches_sympy():
    # symbolic oracle: phi = phi_r(r,z) e_r + phi_z(r,z) e_z with concrete profiles
    x, y, z = sp.symbols("x y z", real=True)
    r = sp.sqrt(x * x + y * y)
    pr = sp.sin(r) * sp.cos(z) + r ** 2
    pz = sp.exp(-r) * z ** 2
    phi = sp.Matrix([pr * x / r, pr * y / r, pz])
    J = phi.jacobian([x, y, z])
    rs, zs = sp.symbols("r z_", positive=True)
    prs = sp.sin(rs) * sp.cos(zs) + rs ** 2
    pzs = sp.exp(-rs) * zs ** 2
    grads = [sp.diff(prs, rs), sp.diff(prs, zs), sp.diff(pzs, rs), sp.diff(pzs, zs), prs]
    for rv, th, zv in [(0.7, 0.3, 0.2), (1.9, -2.1, 0.8), (1.2, 3.0, -0.4)]:
        sub = {x: rv * np.cos(th), y: rv * np.sin(th), z: zv}
        Jnum = np.array(J.subs(sub).evalf(), dtype=float)
        g = CylGradient(*[float(e.subs({rs: rv, zs: zv})) for e in grads])
        assert np.allclose(cartesian_jacobian(g, rv, th), Jnum, rtol=1e-13, atol=1e-13)


def test_identity_suite_below_tolerance():
    assert identity_suite(10_000, seed=3) < 1e-12


def test_is_axisymmetric():
    def swirl_free(x, y, z):
        r = np.hypot(x, y)
        return x / r * np.sin(r), y / r * np.sin(r), r * z

    def tilted(x, y, z):
        return x + 0 * y, 0 * x, 0 * z + 1

    assert is_axisymmetric(swirl_free, 1.3, 0.2, tol=1e-12)
    assert not is_axisymmetric(tilted, 1.3, 0.2, tol=1e-12)
