import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad

from wild_euler.breaking import (
    FanParams, build_breaking_subsolution, burgers_rarefaction, energy_deficit,
    energy_lambda_max_eig, theta_variance, verify_breaking, weak_burgers_study,
)
from wild_euler.errors import FanTooFast, FanUnresolved, InvalidDomain
from wild_euler.fields import Domain

DOM = Domain(0.5, 2.0)
FP = FanParams(DOM)
BS = build_breaking_subsolution(FP)


def test_rarefaction_values():
    assert burgers_rarefaction(FP, 1.0, 0.5) == 0.0
    assert burgers_rarefaction(FP, 1.0 + 0.1 * 0.5 / 2, 0.5) == pytest.approx(0.5, abs=1e-14)
    assert burgers_rarefaction(FP, 0.7, 0.0) == -1.0
    assert burgers_rarefaction(FP, 1.3, 0.0) == 1.0
    assert burgers_rarefaction(FP, 1.5, 0.5) == 1.0


def test_fan_solves_burgers_symbolically():
    r, t, lam, r0 = sp.symbols("r t lam r0", positive=True)
    f = (r - r0) / (lam * t)
    assert sp.simplify(sp.diff(f, t) + lam / 2 * sp.diff(f ** 2, r)) == 0


def test_radial_line_cancels_symbolically():
    r = sp.symbols("r", positive=True)
    f = sp.Function("f")(r)
    a = f / r
    beta = -a ** 2 / 2
    q_r = a * sp.diff(a, r) + a ** 2 / (2 * r)
    assert sp.simplify(sp.diff(beta, r) + beta / r + q_r) == 0


def test_strong_residuals_off_edges():
    rng = np.random.default_rng(0)
    r, t = rng.uniform(0.5, 2.0, 10_000), rng.uniform(0.01, 1.0, 10_000)
    lo, hi = FP.edges(t)
    keep = (np.abs(r - lo) > 1e-6) & (np.abs(r - hi) > 1e-6)
    for res in BS.strong_residuals(r[keep], t[keep]):
        assert np.max(np.abs(res)) < 1e-12
    assert np.max(np.abs(BS.burgers_residual(r[keep], t[keep]))) < 1e-12


def test_energy_examples():
    assert BS.energy(1.0, 0.5) == pytest.approx(0.05, abs=1e-15)
    assert BS.ebar(1.0, 0.0, 0.5) == pytest.approx(0.4775, abs=1e-15)
    assert BS.ebar(1.0, np.pi / 2, 0.5) < BS.ebar(1.0, 0.0, 0.5)
    assert BS.energy(1.5, 0.5) == pytest.approx(BS.v0_energy(1.5), abs=1e-15)


def test_energy_matches_eigen_solve():
    rng = np.random.default_rng(1)
    r, t = rng.uniform(0.5, 2.0, 10_000), rng.uniform(0.0, 1.0, 10_000)
    assert np.max(np.abs(BS.energy(r, t) - energy_lambda_max_eig(BS, r, t))) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(-0.999, 0.999), st.floats(0.0, np.pi))
def test_energy_strictly_below_ebar_in_fan(t, s, theta):
    r = FP.r0 + s * FP.lam * t
    assert BS.energy(r, t) < BS.ebar(r, theta, t)


def test_deficit_matches_quadrature():
    t = 0.6
    lo, hi = FP.edges(t)
    ref, _ = dblquad(lambda th, r: BS.v0_energy(r) - BS.ebar(r, th, t), lo, hi,
                     0, 2 * np.pi, epsabs=1e-13, epsrel=1e-12)
    assert energy_deficit(BS, t) == pytest.approx(ref * DOM.z_period, rel=1e-10)
    assert energy_deficit(BS, 0.0) == 0.0


def test_deficit_linear_in_eps():
    d1, d2 = energy_deficit(BS, 0.4), energy_deficit(BS, 0.4, 2 * FP.eps)
    assert d2 == pytest.approx(2 * d1, rel=1e-12)


def test_deficit_increases_with_time():
    d = [energy_deficit(BS, t) for t in np.linspace(0.05, 1.0, 20)]
    assert all(b > a > 0 for a, b in zip(d[:-1], d[1:]))


def test_theta_variance():
    assert theta_variance(BS, 1.0, 0.5) > 0
    assert theta_variance(BS, 0.9, 0.0) == 0.0
    assert theta_variance(BS, 1.8, 0.5) == pytest.approx(0.0, abs=1e-30)


def test_verify_breaking_passes():
    rep = verify_breaking(BS)
    assert rep.passed, rep.failures()
    assert not rep["two_thirds_form"].asserted


def test_fan_parameter_errors():
    with pytest.raises(FanTooFast):
        FanParams(DOM, lam=0.6)
    with pytest.raises(InvalidDomain):
        FanParams(DOM, eps=1.5)
    with pytest.raises(InvalidDomain):
        FanParams(DOM, r0=0.55, lam=0.1)


def test_fan_unresolved_on_coarse_grid():
    fp = FanParams(DOM, lam=0.01)
    with pytest.raises(FanUnresolved):
        verify_breaking(build_breaking_subsolution(fp), nr=8, nt=8)


def test_weak_burgers_order():
    out = weak_burgers_study(BS)
    assert min(out["order"]) >= 1.7
    assert out["residual"][-1] < out["residual"][0]
