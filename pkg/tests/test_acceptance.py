"""End-to-end acceptance checks, one test per criterion.

Each test times itself; conftest prints a PASS/FAIL line per criterion.
"""
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from wild_euler.admissibility import ChiProfile, energy_form_check, equivalence_check
from wild_euler.breaking import build_breaking_subsolution, verify_breaking, weak_burgers_study
from wild_euler.cli import Scenario, load_config, run_chi_window, run_ci_demo
from wild_euler.coords import identity_suite
from wild_euler.fields import Grid, GridField, random_bumps
from wild_euler.geometry import (
    DensityPressure, Membership, State, energy_e, forced_state, hull_membership,
)
from wild_euler.subsolution import (
    build_explicit_subsolution, chi_threshold, residual_order_study, strong_residual,
    validate_subsolution,
)


@pytest.fixture(scope="module")
def sc():
    return Scenario(load_config(None, None, None))


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


def test_criterion_1_identity():
    """Advection identity in cylindrical form on 1e4 samples below 1e-12 in under 1 s"""
    with Clock() as c:
        err = identity_suite(10_000, seed=0)
    assert err < 1e-12
    assert c.seconds < 1.0


def test_criterion_2_explicit_subsolution(sc):
    """Explicit subsolution: strong residual, weak order 2 +- 0.3, exact wall values"""
    rng = np.random.default_rng(0)
    r = rng.uniform(sc.dom.delta, sc.dom.R, 1000)
    t = rng.uniform(0, sc.dom.T, 1000)
    for res in strong_residual(r, t, sc.dp, sc.chi_tilde):
        assert np.max(np.abs(res)) < 1e-12
    study = residual_order_study(sc.dom, sc.dp, sc.chi_tilde, 8.8)
    assert len(study["order"]) == 3
    assert all(abs(p - 2.0) <= 0.3 for p in study["order"]), study
    sub = build_explicit_subsolution(sc.dom, sc.dp, sc.chi_tilde, sc.grid)
    assert np.all(sub.m.samples[0, ..., 0] == 0) and np.all(sub.m.samples[-1, ..., 0] == 0)


def test_criterion_3_energy_threshold(sc):
    """Energy threshold: sup e = 4, chi = 8.8 passes, chi = 7 fails, under 1 s"""
    with Clock() as c:
        sub = build_explicit_subsolution(sc.dom, sc.dp, sc.chi_tilde, sc.grid)
        sup_e = chi_threshold(sub).sup_e(0.0)
        ok = validate_subsolution(sub, ChiProfile.constant(8.8, sc.dom.T, sc.grid.nt))
        bad = validate_subsolution(sub, ChiProfile.constant(7.0, sc.dom.T, sc.grid.nt))
    # chi_tilde = 1, gamma = 2: e = r/2 + |r^2 - r/2| = r^2, largest at r = R
    assert sup_e == pytest.approx(sc.dom.R ** 2, abs=1e-12) and sup_e == pytest.approx(4.0)
    assert ok.passed and ok["energy_margin"].value > 0
    assert not bad.passed and "energy_margin" in bad.failures()
    assert c.seconds < 1.0


def test_criterion_4_energy_laws():
    """Energy laws on 1e4 random samples each, tolerances 1e-12 and 1e-10, under 5 s"""
    dp = DensityPressure(2.0)
    rng = np.random.default_rng(0)
    n = 10_000
    with Clock() as c:
        rho = rng.uniform(0.2, 3.0, n)
        s1, s2 = State(*rng.uniform(-3, 3, (5, n))), State(*rng.uniform(-3, 3, (5, n)))
        lam = rng.uniform(0, 1, n)
        e1, e2 = energy_e(rho, s1), energy_e(rho, s2)
        convex = energy_e(rho, s1 * lam + s2 * (1 - lam)) - (lam * e1 + (1 - lam) * e2)
        lower = s1.m2 / (2 * rho) - e1
        norm = np.hypot(s1.u, s1.w) - e1
        f = forced_state(rho, s1.m_r, s1.m_z, dp)
        equal = np.abs(energy_e(rho, f) - f.m2 / (2 * rho))
        strict = energy_e(rho, State(f.m_r, f.m_z, f.u + 1e-3, f.w, f.q)) - f.m2 / (2 * rho)

        chi = rng.uniform(0.5, 5.0, n)
        phi = rng.uniform(0, 2 * np.pi, n)
        amp = np.sqrt(rho * chi)
        on_k, inner = [], []
        for i in range(n):
            k = forced_state(rho[i], amp[i] * np.cos(phi[i]), amp[i] * np.sin(phi[i]), dp,
                             chi=chi[i])
            on_k.append(hull_membership(rho[i], chi[i], k, dp) is Membership.IN_K)
            s = 0.9 * rng.uniform() * k
            s = State(s.m_r, s.m_z, s.u, s.w, dp.p(rho[i]) + chi[i] / 2)
            inner.append(hull_membership(rho[i], chi[i], s, dp) is Membership.IN_HYPERINTERIOR)
    assert np.max(convex) <= 1e-12
    assert np.max(lower) <= 1e-12 and np.max(norm) <= 1e-12
    assert np.max(equal) <= 1e-10 and np.min(strict) > 0
    assert all(on_k) and all(inner)
    assert c.seconds < 5.0


def test_criterion_5_chi_window(sc, tmp_path):
    """Energy-profile ODE: order >= 3.7, monotone, window matches dt/10 to 1e-8, under 2 s"""
    with Clock() as c:
        rep = run_chi_window(sc, tmp_path)
    assert rep.passed, rep.failures()
    assert rep.metrics["T_max"] > 0
    assert rep["rk4_order"].value >= 3.7
    assert rep["reference_dt_over_10"].value <= 1e-8
    assert rep["monotone_decrease"].passed
    assert all(ch.passed for ch in rep.checks if ch.name.startswith("energy."))
    assert c.seconds < 2.0


def test_criterion_6_equivalence(sc):
    """Compressible and axisymmetric residuals agree on 50 bumps, energy forms hold, under 5 s"""
    with Clock() as c:
        g = Grid(sc.dom, 384, 384, 4)
        sub = build_explicit_subsolution(sc.dom, sc.dp, sc.chi_tilde, g)
        rho = GridField.from_function(g, lambda r, z, t: sc.dp.rho0(r) + 0 * z + 0 * t)
        vt = random_bumps(sc.dom, 50, 2, vector=True)
        st = random_bumps(sc.dom, 25, 3)
        eq = equivalence_check(rho, sub.m, sc.dp, vt, st, tol=1e-10)
        g3 = Grid(sc.dom, 64, 64, 128)
        sub3 = build_explicit_subsolution(sc.dom, sc.dp, sc.chi_tilde, g3)
        rho3 = GridField.from_function(g3, lambda r, z, t: sc.dp.rho0(r) + 0 * z + 0 * t)
        en = energy_form_check(rho3, sub3.m, sc.dp, st, tol=1e-10)
    assert eq.passed, eq.failures()
    assert en.passed, en.failures()
    assert c.seconds < 5.0


def test_criterion_7_symmetry_breaking(sc):
    """Burgers-driven subsolution: residuals, e vs ebar, deficit, theta variance, under 5 s"""
    with Clock() as c:
        bs = build_breaking_subsolution(sc.fan)
        rep = verify_breaking(bs, nr=128, nt=64)
        study = weak_burgers_study(bs)
    assert rep.passed, rep.failures()
    for name in ("strong_residual_line1", "strong_residual_line2", "burgers_strong_residual",
                 "outside_fan_equality", "inside_fan_margin", "energy_deficit",
                 "deficit_linear_in_eps", "theta_variance_fan", "theta_variance_t0"):
        assert rep[name].passed, name
    assert not rep["two_thirds_form"].asserted
    assert min(study["order"]) >= 1.7
    assert c.seconds < 5.0


def test_criterion_8_laminate_iteration(sc, tmp_path):
    """Laminate iteration: 20 steps, strict gap decrease, div and hull, residual O(1/N), under 30 s"""
    with Clock() as c:
        rep = run_ci_demo(sc, tmp_path)
    assert rep.passed, rep.failures()
    trace = rep.metrics["trace"]
    assert len(trace["steps"]) == 20
    assert rep["residual_ratio_under_N_doubling"].value <= 0.6
    assert rep["weak_residual"].value <= sc.cfg["ci"]["residual_tol"]
    assert c.seconds < 30.0


def _all_reports(out):
    p = subprocess.run([sys.executable, "-m", "wild_euler", "all", "--seed", "7", "--out",
                        str(out)], capture_output=True, text=True, timeout=300)
    assert p.returncode in (0, 1), p.stderr
    return {f.name: f.read_bytes() for f in sorted(out.iterdir()) if f.name != "timings.json"}


def test_criterion_9_determinism(tmp_path):
    """Determinism: two runs of `all --seed 7` give byte-identical reports"""
    a = _all_reports(tmp_path / "a")
    b = _all_reports(tmp_path / "b")
    assert a.keys() == b.keys()
    reports = {"identity.json", "subsolution.json", "chi_window.json",
               "symmetry_breaking.json", "ci_demo.json", "all.json"}
    assert reports <= a.keys()
    assert a == b
    assert json.loads(a["all.json"])["pass"] is True
