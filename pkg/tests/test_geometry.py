import numpy as np
import pytest
import sympy as sp
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from wild_euler.errors import DegenerateDensity, InvalidDomain, NotInCone
from wild_euler.geometry import (
    DensityPressure, Membership, State, energy_e, forced_state, hull_membership,
    in_wave_cone, lambda_direction, lambda_max_sym2, plane_wave_residual, wave_cone_det,
    wave_cone_matrix,
)

DP = DensityPressure(2.0)
val = st.floats(-5, 5, allow_nan=False)
states = st.builds(State, val, val, val, val, val)


def test_density_pressure_relation():
    r = np.linspace(0.1, 3, 50)
    for g in (1.4, 2.0, 3.0):
        dp = DensityPressure(g)
        assert np.allclose(dp.p(r), r * r * dp.deps(r) * 1.0, rtol=1e-12)
        assert np.allclose(dp.dpi(r), dp.dp(dp.rho0(r)) / r, rtol=1e-12)
    with pytest.raises(InvalidDomain):
        DensityPressure(1.0)
    assert DensityPressure.rho0(-1.0) == 0.0


def test_lambda_max_examples():
    assert lambda_max_sym2(0.0, 0.0, 0.0) == 0.0
    assert lambda_max_sym2(1.0, 0.0, 0.0) == 1.0
    assert lambda_max_sym2(0.4, 0.3, 0.6) == pytest.approx((1 + np.sqrt(0.4)) / 2, abs=1e-15)


def test_lambda_max_against_eigh():
    rng = np.random.default_rng(0)
    a, b, c = rng.uniform(-10, 10, (3, 100_000))
    M = np.stack([np.stack([a, b], -1), np.stack([b, c], -1)], -2)
    ref = np.linalg.eigvalsh(M)[:, -1]
    assert np.max(np.abs(lambda_max_sym2(a, b, c) - ref)) <= 1e-13 * max(1.0, np.max(np.abs(ref)))


def test_energy_examples():
    assert energy_e(1.0, State()) == 0.0
    assert energy_e(2.0, State(1.0, 1.0, 0.1, 0.2)) == pytest.approx(0.5 + np.sqrt(0.1), abs=1e-15)
    s = forced_state(3.0, 0.7, -1.2, DP)
    assert energy_e(3.0, s) == pytest.approx(s.m2 / 6.0, rel=1e-14)
    with pytest.raises(DegenerateDensity):
        energy_e(0.0, State())


def _random_states(rng, n, scale=3.0):
    return State(*rng.uniform(-scale, scale, (5, n)))


def test_energy_laws_on_random_samples():
    rng = np.random.default_rng(1)
    n = 10_000
    rho = rng.uniform(0.2, 3.0, n)
    s1, s2 = _random_states(rng, n), _random_states(rng, n)
    lam = rng.uniform(0, 1, n)
    mix = s1 * lam + s2 * (1 - lam)
    e1, e2, em = energy_e(rho, s1), energy_e(rho, s2), energy_e(rho, mix)
    assert np.all(em <= lam * e1 + (1 - lam) * e2 + 1e-12)
    assert np.all(s1.m2 / (2 * rho) <= e1 + 1e-12)
    assert np.all(np.hypot(s1.u, s1.w) <= e1 + 1e-12)


def test_lower_bound_equality_iff_forced():
    rng = np.random.default_rng(2)
    rho = rng.uniform(0.2, 3.0, 1000)
    mr, mz = rng.uniform(-2, 2, (2, 1000))
    f = forced_state(rho, mr, mz, DP)
    assert np.allclose(energy_e(rho, f), f.m2 / (2 * rho), rtol=1e-12, atol=1e-14)
    bump = State(mr, mz, f.u + 1e-3, f.w, f.q)
    assert np.all(energy_e(rho, bump) > f.m2 / (2 * rho) + 1e-5)


@settings(max_examples=300, deadline=None)
@given(states, states, st.floats(0, 1), st.floats(0.1, 5))
def test_convexity_property(s1, s2, lam, rho):
    mix = s1 * lam + s2 * (1 - lam)
    bound = lam * energy_e(rho, s1) + (1 - lam) * energy_e(rho, s2)
    assert energy_e(rho, mix) <= bound + 1e-12 * (1 + abs(bound))


@settings(max_examples=300, deadline=None)
@given(states, st.floats(0.1, 5))
def test_norm_and_lower_bound_property(s, rho):
    e = energy_e(rho, s)
    assert np.hypot(s.u, s.w) <= e + 1e-12 * (1 + abs(e))
    assert s.m2 / (2 * rho) <= e + 1e-12 * (1 + abs(e))


def test_membership_examples():
    rho, chi = 1.5, 4.0
    phi = 0.7
    m = np.sqrt(rho * chi) * np.array([np.cos(phi), np.sin(phi)])
    k = forced_state(rho, m[0], m[1], DP, chi=chi)
    assert hull_membership(rho, chi, k, DP) is Membership.IN_K
    zero = State(0.0, 0.0, 0.0, 0.0, DP.p(rho) + chi / 2)
    assert hull_membership(rho, chi, zero, DP) is Membership.IN_HYPERINTERIOR
    assert hull_membership(rho, chi, State(0, 0, 0, 0, 0.0), DP) is Membership.OUTSIDE
    assert not Membership.OUTSIDE.in_convex_hull
    big = State(0.0, 0.0, 5.0, 0.0, DP.p(rho) + chi / 2)
    assert hull_membership(rho, chi, big, DP) is Membership.OUTSIDE


def test_convex_combinations_of_K_points_are_in_hull():
    rng = np.random.default_rng(3)
    rho, chi = 1.3, 2.5
    for _ in range(200):
        phis = rng.uniform(0, 2 * np.pi, 20)
        w = rng.dirichlet(np.ones(20))
        pts = [forced_state(rho, *np.sqrt(rho * chi) * np.array([np.cos(p), np.sin(p)]), DP,
                            chi=chi) for p in phis]
        mix = State(*np.sum([wi * np.array(p.astuple()) for wi, p in zip(w, pts)], axis=0))
        assert hull_membership(rho, chi, mix, DP).in_convex_hull


def test_K_recovery():
    # hull members with |m|^2 = rho chi carry the forced U and q
    rng = np.random.default_rng(4)
    for _ in range(1000):
        rho, chi = rng.uniform(0.3, 3), rng.uniform(0.5, 5)
        phi = rng.uniform(0, 2 * np.pi)
        m = np.sqrt(rho * chi) * np.array([np.cos(phi), np.sin(phi)])
        k = forced_state(rho, m[0], m[1], DP, chi=chi)
        assert hull_membership(rho, chi, k, DP) is Membership.IN_K
        ref = forced_state(rho, m[0], m[1], DP)
        assert abs(k.u - ref.u) <= 1e-10 and abs(k.w - ref.w) <= 1e-10
        assert abs(k.q - ref.q) <= 1e-10 * (1 + abs(ref.q))
        # a perturbed U keeps |m|^2 but pushes e above chi / 2
        off = State(k.m_r, k.m_z, k.u + 1e-3, k.w, k.q)
        assert hull_membership(rho, chi, off, DP) is Membership.OUTSIDE


def test_det_matches_sympy():
    mr, mz, u, w, q = sp.symbols("m_r m_z u w q")
    M = sp.Matrix([[u + q, w, mr], [w, q - u, mz], [mr, mz, 0]])
    det = sp.lambdify((mr, mz, u, w, q), M.det())
    rng = np.random.default_rng(5)
    for vals in rng.uniform(-3, 3, (200, 5)):
        s = State(*vals)
        assert wave_cone_det(s) == pytest.approx(det(*vals), abs=1e-12)
        assert wave_cone_det(s) == pytest.approx(np.linalg.det(wave_cone_matrix(s)), abs=1e-11)


def test_cone_examples():
    assert in_wave_cone(State())
    assert wave_cone_det(State(1.0, 0.0)) == 0.0
    assert wave_cone_det(State(1.0, 0.0, q=1.0)) == -1.0
    assert not in_wave_cone(State(1.0, 0.0, q=1.0))


def test_lambda_direction_pure_r_oscillation():
    d, xi = lambda_direction(State(), State(0.0, 1.0))
    assert np.allclose(xi, [1.0, 0.0, 0.0])


def test_lambda_direction_rejects():
    with pytest.raises(NotInCone):
        lambda_direction(State(), State())
    with pytest.raises(NotInCone):
        lambda_direction(State(), State(1.0, 0.0, q=1.0))


def _cone_state(rng):
    # solve det = 0 for q given random (m, u, w): det is affine in q
    mr, mz, u, w = rng.uniform(-2, 2, 4)
    m2 = mr * mr + mz * mz
    q = (-u * mz * mz + 2 * w * mr * mz + u * mr * mr) / m2
    return State(mr, mz, u, w, q)


def test_lambda_direction_solves_plane_wave_symbolically():
    rng = np.random.default_rng(6)
    r, z, t = sp.symbols("r z t")
    h = sp.Function("h")
    for _ in range(50):
        d = _cone_state(rng)
        _, xi = lambda_direction(State(), d)
        assert np.linalg.norm(xi) == pytest.approx(1.0)
        arg = xi[0] * r + xi[1] * z + xi[2] * t
        mr, mz = d.m_r * h(arg), d.m_z * h(arg)
        Urr, Urz, Uzz = (d.u + d.q) * h(arg), d.w * h(arg), (d.q - d.u) * h(arg)
        eqs = [sp.diff(mr, t) + sp.diff(Urr, r) + sp.diff(Urz, z),
               sp.diff(mz, t) + sp.diff(Urz, r) + sp.diff(Uzz, z),
               sp.diff(mr, r) + sp.diff(mz, z)]
        for e in eqs:
            coeff = sp.simplify(e / sp.Subs(sp.Derivative(h(sp.Symbol("s")), sp.Symbol("s")),
                                            sp.Symbol("s"), arg).doit())
            assert abs(float(coeff)) < 1e-10
        assert np.max(np.abs(plane_wave_residual(d, xi))) < 1e-10


@settings(max_examples=200, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_lambda_direction_property(mr, mz, u, w):
    m2 = mr * mr + mz * mz
    assume(m2 > 1e-2)
    q = (-u * mz * mz + 2 * w * mr * mz + u * mr * mr) / m2
    d, xi = lambda_direction(State(), State(mr, mz, u, w, q))
    assert np.max(np.abs(plane_wave_residual(d, xi))) < 1e-10 * (1 + d.norm() + abs(q))
    first = xi[np.nonzero(np.abs(xi) > 1e-14)[0][0]]
    assert first > 0
