"""Energy admissibility: the chi-ODE, its feasibility window and weak-form cross-checks.

The energy profile chi(t) is driven by the majorising ODE

    chi' = -2 [ sqrt(R) gamma max(R^(gamma-2), delta^(gamma-2)) chi^(1/2)
                + sqrt(R) / (2 delta^2) chi^(3/2) ],

which dominates the worst-case transport terms of the local energy
inequality uniformly on the strip.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import (DegenerateDensity, GridMismatch, IntegrationDiverged,
                     NegativeChi, NoWindow)
from .fields import Domain, GridField, weak_residual
from .geometry import DensityPressure
from .report import VerificationReport

#: Bisection tolerance in time for the window end point.
BISECT_TOL = 1e-10


def ode_coefficients(dom: Domain, dp: DensityPressure):
    """(a, b) with chi' = -2 (a chi^(1/2) + b chi^(3/2))."""
    g, d, R = dp.gamma, dom.delta, dom.R
    a = np.sqrt(R) * g * max(R ** (g - 2), d ** (g - 2))
    b = np.sqrt(R) / (2 * d * d)
    return a, b


def chi_ode_rhs(chi, dom: Domain, dp: DensityPressure):
    chi_arr = np.asarray(chi, dtype=float)
    if np.any(chi_arr < 0):
        raise NegativeChi(f"chi must be nonnegative, got min {chi_arr.min()}")
    a, b = ode_coefficients(dom, dp)
    s = np.sqrt(chi_arr)
    out = -2.0 * (a * s + b * s * chi_arr)
    return out if out.ndim else float(out)


def _rhs_clamped(chi, a, b):
    c = max(chi, 0.0)
    s = np.sqrt(c)
    return -2.0 * (a * s + b * s * c)


def _rk4_step(chi, h, a, b):
    k1 = _rhs_clamped(chi, a, b)
    k2 = _rhs_clamped(chi + 0.5 * h * k1, a, b)
    k3 = _rhs_clamped(chi + 0.5 * h * k2, a, b)
    k4 = _rhs_clamped(chi + h * k3, a, b)
    return max(chi + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), 0.0)


@dataclass
class ChiProfile:
    """Time-sampled energy profile with derivative values at the nodes.

    Profiles of origin ``"ode"`` remember the ODE coefficients, so values
    between nodes come from a partial RK4 step rather than interpolation.
    """

    t: np.ndarray
    chi: np.ndarray
    dchi: np.ndarray
    origin: str = "user"
    coeffs: tuple = None
    error_estimate: float = float("nan")
    _spline: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.chi = np.asarray(self.chi, dtype=float)
        self.dchi = np.asarray(self.dchi, dtype=float)
        if not (self.t.shape == self.chi.shape == self.dchi.shape):
            raise ValueError("t, chi and dchi must have equal length")
        if not np.all(np.isfinite(self.chi)) or not np.all(np.isfinite(self.dchi)):
            raise IntegrationDiverged("chi profile contains non-finite values")

    @classmethod
    def constant(cls, value, T, n=64):
        t = np.linspace(0.0, T, n + 1)
        return cls(t, np.full_like(t, float(value)), np.zeros_like(t), "user")

    @classmethod
    def from_function(cls, fn, dfn, t):
        t = np.asarray(t, dtype=float)
        return cls(t, np.broadcast_to(fn(t), t.shape), np.broadcast_to(dfn(t), t.shape), "user")

    @property
    def T(self):
        return float(self.t[-1])

    def _interp(self):
        if self._spline is None:
            self._spline = CubicHermiteSpline(self.t, self.chi, self.dchi)
        return self._spline

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        if self.origin == "ode" and self.coeffs is not None:
            a, b = self.coeffs
            k = np.clip(np.searchsorted(self.t, t, side="right") - 1, 0, len(self.t) - 1)
            flat_t, flat_k = np.ravel(t), np.ravel(k)
            vals = np.array([_rk4_step(self.chi[kk], tt - self.t[kk], a, b)
                             for tt, kk in zip(flat_t, flat_k)])
            out = vals.reshape(t.shape)
        else:
            out = self._interp()(t)
        return out if out.ndim else float(out)

    def derivative(self, t):
        if self.origin == "ode" and self.coeffs is not None:
            a, b = self.coeffs
            c = np.maximum(np.asarray(self.evaluate(t)), 0.0)
            out = -2.0 * (a * np.sqrt(c) + b * c * np.sqrt(c))
        else:
            out = self._interp()(np.asarray(t, dtype=float), 1)
        out = np.asarray(out)
        return out if out.ndim else float(out)

    def on(self, t_nodes):
        """Values and derivatives at arbitrary nodes, e.g. another grid's t axis."""
        return np.asarray(self.evaluate(t_nodes)), np.asarray(self.derivative(t_nodes))


def _rk4_path(chi0, h, n, a, b):
    out = np.empty(n + 1)
    out[0] = chi0
    for k in range(n):
        out[k + 1] = _rk4_step(out[k], h, a, b)
        if not np.isfinite(out[k + 1]):
            raise IntegrationDiverged(f"chi became non-finite at step {k + 1}")
    return out


def integrate_chi(chi0, dom: Domain, dp: DensityPressure, dt, t_end=None) -> ChiProfile:
    """Classical RK4 on [0, t_end] (default ``dom.T``), clamping at extinction.

    The attached ``error_estimate`` compares the run with one at ``dt / 2``
    on the common nodes and divides by 15.
    """
    if not chi0 > 0 or not np.isfinite(chi0):
        raise NegativeChi(f"chi0 must be positive and finite, got {chi0}")
    t_end = dom.T if t_end is None else float(t_end)
    n = max(1, int(round(t_end / dt)))
    h = t_end / n
    a, b = ode_coefficients(dom, dp)
    chi = _rk4_path(float(chi0), h, n, a, b)
    fine = _rk4_path(float(chi0), h / 2, 2 * n, a, b)
    err = float(np.max(np.abs(chi - fine[::2])) / 15.0)
    t = h * np.arange(n + 1)
    dchi = np.array([_rhs_clamped(c, a, b) for c in chi])
    return ChiProfile(t, chi, dchi, "ode", (a, b), err)


def extinction_time_sqrt_regime(chi0, a):
    """Extinction time of chi' = -2 a chi^(1/2), which is sqrt(chi0) / a."""
    return np.sqrt(chi0) / a


@dataclass
class FeasibilityWindow:
    T_max: float
    limiting: str
    t: np.ndarray
    margin: np.ndarray

    @property
    def margin_min(self):
        keep = self.t <= self.T_max
        return float(np.min(self.margin[keep])) if np.any(keep) else float("nan")


def feasibility_window(profile: ChiProfile, threshold, tol=BISECT_TOL) -> FeasibilityWindow:
    """First time where chi(t) - threshold(t) <= 0, bisected between nodes.

    ``threshold`` is a vectorised callable of t. The limiting constraint is
    ``"chi-extinction"`` if chi has reached zero there, ``"threshold-cross"``
    otherwise, and ``"horizon"`` if no crossing happens before the profile ends.
    """
    t = profile.t
    thr = np.broadcast_to(np.asarray(threshold(t), dtype=float), t.shape)
    margin = profile.chi - thr
    if margin[0] <= 0:
        raise NoWindow(f"chi(0) = {profile.chi[0]:.6g} does not exceed threshold "
                       f"{thr[0]:.6g}")
    bad = np.nonzero(margin <= 0)[0]
    if bad.size == 0:
        return FeasibilityWindow(float(t[-1]), "horizon", t, margin)
    k = bad[0]
    lo, hi = float(t[k - 1]), float(t[k])

    def g(s):
        return float(profile.evaluate(s)) - float(np.asarray(threshold(np.array([s])))[0])

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    T_max = 0.5 * (lo + hi)
    chi_end = float(profile.evaluate(T_max))
    limiting = "chi-extinction" if chi_end <= max(1e-12, 1e-9 * profile.chi[0]) else "threshold-cross"
    return FeasibilityWindow(T_max, limiting, t, margin)


def energy_condition_slack(chi, dchi, r, dp: DensityPressure):
    """Slack of the worst-case pointwise energy inequality (>= 0 means satisfied).

    -( chi'/2 + sqrt(rho0 chi) |grad pi| + chi/2 sqrt(rho0 chi) |grad 1/rho0| )
    with rho0 = r, |grad pi| = gamma r^(gamma-2), |grad 1/rho0| = 1/r^2.
    """
    chi = np.asarray(chi, dtype=float)
    r = np.asarray(r, dtype=float)
    root = np.sqrt(r * np.maximum(chi, 0.0))
    return -(0.5 * dchi + root * dp.dpi(r) + 0.5 * chi * root / (r * r))


def pointwise_energy_condition(chi: ChiProfile, dp: DensityPressure, dom: Domain,
                               nr=128, m=None, tol=1e-12) -> VerificationReport:
    """Check the worst-case form of the local energy inequality on a grid.

    ``m`` (optional :class:`GridField`) is checked against |m|^2 <= rho0 chi,
    the precondition under which the worst case majorises the true integrand.
    """
    r = np.linspace(dom.delta, dom.R, nr + 1)
    slack = energy_condition_slack(chi.chi[None, :], chi.dchi[None, :], r[:, None], dp)
    scale = float(np.max(np.abs(chi.dchi))) + 1.0
    rep = VerificationReport("pointwise-energy-condition")
    rep.check_ge("min_slack", float(slack.min()), -tol * scale,
                 "worst-case local energy inequality")
    if m is not None:
        g = m.grid
        c = np.asarray(chi.evaluate(g.t))
        excess = (m.samples[..., 0] ** 2 + m.samples[..., 1] ** 2
                  - g.r[:, None, None] * c[None, None, :])
        rep.check_le("max_momentum_excess", float(excess.max()), tol * float(c.max()),
                     "|m|^2 <= rho0 chi")
    pi_err = float(np.max(np.abs(dp.dpi(r) - dp.dp(dp.rho0(r)) / r)))
    rep.check_le("pi_prime_identity", pi_err, 1e-12, "pi'(r) = p'(rho0) / r")
    rep.metrics["slack_min_location_r"] = float(r[np.unravel_index(slack.argmin(), slack.shape)[0]])
    return rep


def equivalence_check(rho: GridField, m: GridField, dp: DensityPressure, tests,
                      scalar_tests=None, tol=1e-10, div_tol=1e-8) -> VerificationReport:
    """Compare compressible and r-weighted axisymmetric weak residuals.

    With rho = rho0 = r and v = m / rho0 the two momentum residuals differ by
    the quadrature of div(r^gamma phi) / (gamma - 1), which vanishes for
    compactly supported tests. With ``scalar_tests`` the weak divergence of
    r v is checked as well; the energy forms live in :func:`energy_form_check`.
    """
    g = rho.grid
    if m.grid != g:
        raise GridMismatch("rho and m must share a grid")
    if np.min(rho.samples) < 1e-12:
        raise DegenerateDensity("density vanishes somewhere on the grid")
    gamma = dp.gamma
    v = GridField(g, m.samples / rho.samples[..., None], "vec2")
    pi = GridField.from_function(g, lambda r, z, t: dp.pi(r) + 0 * z + 0 * t)
    a, sa = weak_residual("compressible-momentum", {"rho": rho, "m": m}, tests,
                          gamma=gamma, return_scale=True)
    b, sb = weak_residual("axisym-momentum", {"v": v, "pi": pi}, tests, return_scale=True)
    scale = np.maximum(sa, sb)
    diff = np.abs(a - b)
    rep = VerificationReport("equivalence")
    rep.check_le("momentum_agreement", float(np.max(diff / scale)), tol,
                 "compressible vs axisymmetric momentum residual")
    rep.metrics["compressible_momentum_max"] = float(np.max(np.abs(a) / scale))
    rep.metrics["axisym_momentum_max"] = float(np.max(np.abs(b) / scale))
    if scalar_tests:
        div = weak_residual("axisym-divergence", {"v": v}, scalar_tests, return_scale=True)
        rel = np.abs(div[0]) / np.maximum(div[1], 1e-300)
        rep.check_le("divergence_residual", float(np.max(rel)), div_tol, "weak divergence of r v")
    return rep


def energy_form_check(rho: GridField, m: GridField, dp: DensityPressure, scalar_tests,
                      tol=1e-10) -> VerificationReport:
    """Compressible vs axisymmetric energy forms.

    The difference of the two forms is exactly the quadrature of the
    r^gamma / (gamma - 1) time-derivative term (an algebraic identity at the
    discrete level); that term itself vanishes up to time quadrature error.
    Only the time axis matters for the second check, so callers may use a
    grid refined in t alone.
    """
    g = rho.grid
    if m.grid != g:
        raise GridMismatch("rho and m must share a grid")
    if np.min(rho.samples) < 1e-12:
        raise DegenerateDensity("density vanishes somewhere on the grid")
    gamma = dp.gamma
    v = GridField(g, m.samples / rho.samples[..., None], "vec2")
    pi = GridField.from_function(g, lambda r, z, t: dp.pi(r) + 0 * z + 0 * t)
    rep = VerificationReport("energy-forms")
    ce, sce = weak_residual("compressible-energy", {"rho": rho, "v": v}, scalar_tests,
                            gamma=gamma, return_scale=True)
    ae = weak_residual("axisym-energy", {"v": v, "pi": pi}, scalar_tests)
    pg = GridField(g, rho.samples ** gamma / (gamma - 1))
    # the bracket is  int int rho^gamma/(gamma-1) d_t phi + int rho^gamma/(gamma-1) phi(0)
    bracket = weak_residual("compressible-continuity",
                            {"rho": pg, "m": GridField(g, 0.0, "vec2")}, scalar_tests)
    algebraic = np.abs(ce - ae - bracket) / np.maximum(sce, 1e-300)
    rep.check_le("energy_algebraic_identity", float(np.max(algebraic)), tol,
                 "compressible minus axisymmetric energy form")
    rep.check_le("energy_ibp_identity", float(np.max(np.abs(bracket) / np.maximum(sce, 1e-300))),
                 _ibp_tol(g), "time integration by parts of r^gamma term")
    return rep


def _ibp_tol(grid):
    """Quadrature tolerance for the t-endpoint term, a generous multiple of h_t^2."""
    return 10.0 * grid.h_t ** 2


def chi_closed_form(t, chi0, a, b):
    """Exact solution of chi' = -2 (a chi^(1/2) + b chi^(3/2)) before extinction.

    With s = sqrt(chi): arctan(s sqrt(b/a)) = arctan(s0 sqrt(b/a)) - sqrt(a b) t.
    """
    k = np.sqrt(b / a)
    arg = np.arctan(np.sqrt(chi0) * k) - np.sqrt(a * b) * np.asarray(t, dtype=float)
    s = np.where(arg > 0, np.tan(np.maximum(arg, 0.0)) / k, 0.0)
    return s * s


def crossing_time_closed_form(chi0, level, a, b):
    """Time at which the exact solution reaches ``level`` (extinction for level 0)."""
    k = np.sqrt(b / a)
    return float((np.arctan(np.sqrt(chi0) * k) - np.arctan(np.sqrt(level) * k)) / np.sqrt(a * b))


def measured_order(chi0, dom: Domain, dp: DensityPressure, t_end, n0=40):
    """Observed RK4 order from three halvings of the step at ``t_end``."""
    vals = [integrate_chi(chi0, dom, dp, t_end / (n0 * 2 ** k), t_end).chi[-1] for k in range(3)]
    return float(np.log2(abs(vals[0] - vals[1]) / abs(vals[1] - vals[2])))
