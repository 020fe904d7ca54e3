"""Burgers-driven subsolution whose energy profile depends on the angle.

The vertical velocity alpha = f / r is driven by the rarefaction fan f of
d_t f + (lam / 2) d_r f^2 = 0 with jump data -1 | +1 at r0. Inside the fan
the subsolution energy sits strictly below the angle-dependent profile ebar,
and the total energy strictly decreases for t > 0.
"""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import FanTooFast, FanUnresolved, InvalidDomain
from .fields import BumpTestFn, Domain, Grid, GridField, weak_residual
from .report import VerificationReport

#: Number of equispaced angles used for theta statistics.
N_THETA = 16
#: Gauss-Legendre nodes used on the fan interval for the energy deficit.
N_GAUSS = 64


@dataclass(frozen=True)
class FanParams:
    dom: Domain
    r0: float = 1.0
    lam: float = 0.1
    eps: float = 0.1

    def __post_init__(self):
        d, R, T = self.dom.delta, self.dom.R, self.dom.T
        if not self.lam > 0:
            raise InvalidDomain("fan speed must be positive")
        if self.lam * R >= 1:
            raise FanTooFast(f"lam * R = {self.lam * R} must stay below 1")
        if not 0 < self.eps < 1:
            raise InvalidDomain("eps must lie in (0, 1)")
        if not (d < self.r0 - self.lam * T and self.r0 + self.lam * T < R):
            raise InvalidDomain("the fan must stay inside (delta, R) up to T")

    @property
    def T(self):
        return self.dom.T

    def edges(self, t):
        return self.r0 - self.lam * t, self.r0 + self.lam * t


def burgers_rarefaction(fp: FanParams, r, t):
    """Rarefaction fan; at t = 0 the jump datum sign(r - r0)."""
    r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
    out = np.sign(r - fp.r0)
    pos = t > 0
    if np.any(pos):
        out = np.where(pos, np.clip((r - fp.r0) / (fp.lam * np.where(pos, t, 1.0)), -1, 1), out)
    return out if out.ndim else float(out)


def burgers_derivatives(fp: FanParams, r, t):
    """Exact (d_t f, d_r f) on the smooth pieces (zero outside the fan)."""
    r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
    lo, hi = fp.edges(t)
    fan = (t > 0) & (r > lo) & (r < hi)
    ts = np.where(fan, t, 1.0)
    dt = np.where(fan, -(r - fp.r0) / (fp.lam * ts * ts), 0.0)
    dr = np.where(fan, 1.0 / (fp.lam * ts), 0.0)
    return dt, dr


@dataclass(frozen=True)
class BreakingSubsolution:
    """alpha, beta, gamma_fn, q and the two energies as functions of (r, t)."""

    fp: FanParams

    def f(self, r, t):
        return burgers_rarefaction(self.fp, r, t)

    def alpha(self, r, t):
        return self.f(r, t) / np.asarray(r, dtype=float)

    def beta(self, r, t):
        return -0.5 * self.alpha(r, t) ** 2

    def gamma_fn(self, r, t):
        r = np.asarray(r, dtype=float)
        return -self.fp.lam / (2 * r) * (1 - self.f(r, t) ** 2)

    def in_fan(self, r, t, collar=0.0):
        lo, hi = self.fp.edges(np.asarray(t, dtype=float))
        r = np.asarray(r, dtype=float)
        return (np.asarray(t) > 0) & (r > lo + collar) & (r < hi - collar)

    def off_fan(self, r, t, collar=0.0):
        lo, hi = self.fp.edges(np.asarray(t, dtype=float))
        r = np.asarray(r, dtype=float)
        return (r < lo - collar) | (r > hi + collar)

    def q(self, r, t):
        """alpha^2 / 2 + (1/2) int_1^r alpha(s)^2 / s ds by adaptive quadrature."""
        r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
        out = np.empty(r.shape)
        for idx in np.ndindex(r.shape):
            rr, tt = float(r[idx]), float(t[idx])
            a, b = sorted((1.0, rr))
            pts = [p for p in self.fp.edges(tt) if a < p < b]
            val, _ = quad(lambda s: float(self.f(s, tt)) ** 2 / s ** 3, a, b,
                          points=pts or None, epsabs=1e-13, epsrel=1e-12, limit=200)
            val = val if rr >= 1.0 else -val
            out[idx] = 0.5 * float(self.alpha(rr, tt)) ** 2 + 0.5 * val
        return out if out.ndim else float(out)

    def v0_energy(self, r):
        """Half the squared initial speed, 1 / (2 r^2)."""
        return 0.5 / np.asarray(r, dtype=float) ** 2

    def energy(self, r, t):
        """lambda_max(v (x) v - U) in closed form."""
        r = np.asarray(r, dtype=float)
        f2 = self.f(r, t) ** 2
        return (1 - (1 - r * self.fp.lam) * (1 - f2)) / (2 * r * r)

    def ebar(self, r, theta, t, eps=None):
        eps = self.fp.eps if eps is None else eps
        r = np.asarray(r, dtype=float)
        f2 = self.f(r, t) ** 2
        s2 = np.sin(theta) ** 2
        return (1 - 0.5 * eps * (1 + s2) * (1 - r * self.fp.lam) * (1 - f2)) / (2 * r * r)

    def strong_residuals(self, r, t):
        """Residuals of the two momentum lines of the cylindrical system.

        line 1: d_r beta + beta / r + d_r q (v_r = 0, no z-dependence),
        line 2: d_t alpha + d_r gamma + gamma / r. Both use exact derivatives
        of the piecewise formulas and are meaningful off the fan edges.
        """
        r = np.asarray(r, dtype=float)
        f = self.f(r, t)
        ft, fr = burgers_derivatives(self.fp, r, t)
        a = f / r
        a_r = fr / r - f / (r * r)
        beta, beta_r = -0.5 * a * a, -a * a_r
        q_r = a * a_r + 0.5 * a * a / r
        line1 = beta_r + beta / r + q_r
        lam = self.fp.lam
        g = -lam / (2 * r) * (1 - f * f)
        g_r = lam / (2 * r * r) * (1 - f * f) + lam / r * f * fr
        line2 = ft / r + g_r + g / r
        return line1, line2

    def burgers_residual(self, r, t):
        ft, fr = burgers_derivatives(self.fp, r, t)
        return ft + self.fp.lam * self.f(r, t) * fr


def build_breaking_subsolution(fp: FanParams) -> BreakingSubsolution:
    return BreakingSubsolution(fp)


def energy_lambda_max(bs: BreakingSubsolution, r, t):
    """Closed-form largest eigenvalue of v (x) v - U."""
    return bs.energy(r, t)


def energy_lambda_max_eig(bs: BreakingSubsolution, r, t):
    """Same quantity by a symmetric 3x3 eigen-solve, in (r, theta, z) order."""
    r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
    a, b, g = bs.alpha(r, t), bs.beta(r, t), bs.gamma_fn(r, t)
    M = np.zeros(r.shape + (3, 3))
    M[..., 0, 0] = -b
    M[..., 0, 2] = M[..., 2, 0] = -g
    M[..., 2, 2] = a * a + b
    return np.linalg.eigvalsh(M)[..., -1]


def ebar(bs: BreakingSubsolution, r, theta, t):
    return bs.ebar(r, theta, t)


def _gauss(a, b, n=N_GAUSS):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def energy_deficit(bs: BreakingSubsolution, t, eps=None):
    """int (|v0|^2 / 2 - ebar) dz dtheta dr over the strip at time t.

    The integrand vanishes off the fan and is smooth on it, so Gauss-Legendre
    on the fan interval converges to rounding; the midpoint rule in theta is
    exact for sin^2.
    """
    fp = bs.fp
    if t <= 0:
        return 0.0
    lo, hi = fp.edges(t)
    r, w = _gauss(lo, hi)
    theta = 2 * np.pi * (np.arange(N_THETA) + 0.5) / N_THETA
    vals = bs.v0_energy(r)[:, None] - bs.ebar(r[:, None], theta[None, :], t, eps)
    return float(fp.dom.z_period * (w @ vals.mean(axis=1)) * 2 * np.pi)


def theta_variance(bs: BreakingSubsolution, r, t):
    theta = 2 * np.pi * np.arange(N_THETA) / N_THETA
    vals = bs.ebar(np.asarray(r, dtype=float)[..., None], theta, np.asarray(t)[..., None])
    return np.var(vals, axis=-1)


def verify_breaking(bs: BreakingSubsolution, nr=128, nt=64, collar_cells=2) -> VerificationReport:
    """Pointwise and integral checks of the angle-dependent subsolution.

    Strong residuals and pointwise comparisons skip nodes within
    ``collar_cells`` r-steps of the fan edges.
    """
    fp = bs.fp
    dom = fp.dom
    r = np.linspace(dom.delta, dom.R, nr + 1)
    t = np.linspace(0.0, dom.T, nt + 1)
    h = r[1] - r[0]
    R2, T2 = np.meshgrid(r, t, indexing="ij")
    collar = collar_cells * h
    fan = bs.in_fan(R2, T2, collar)
    out = bs.off_fan(R2, T2, collar)
    if not np.any(fan):
        raise FanUnresolved("no grid node lies inside the fan away from its edges")
    rep = VerificationReport("symmetry-breaking")
    e = bs.energy(R2, T2)
    e_eig = energy_lambda_max_eig(bs, R2, T2)
    half_v0 = bs.v0_energy(R2)
    theta = 2 * np.pi * np.arange(N_THETA) / N_THETA
    eb = bs.ebar(R2[..., None], theta, T2[..., None])

    l1, l2 = bs.strong_residuals(R2, T2)
    keep = fan | out
    rep.check_le("strong_residual_line1", float(np.max(np.abs(l1[keep]))), 1e-12,
                 "radial momentum line, off fan edges")
    rep.check_le("strong_residual_line2", float(np.max(np.abs(l2[keep]))), 1e-12,
                 "vertical momentum line, off fan edges")
    rep.check_le("burgers_strong_residual", float(np.max(np.abs(bs.burgers_residual(R2, T2)[keep]))),
                 1e-12, "Burgers equation on smooth pieces")
    rep.check_le("energy_closed_vs_eig", float(np.max(np.abs(e - e_eig))), 1e-12,
                 "closed-form largest eigenvalue")

    eq = max(float(np.max(np.abs(e[out] - half_v0[out]))),
             float(np.max(np.abs(eb[out] - half_v0[out][:, None]))))
    rep.check_le("outside_fan_equality", eq, 1e-12, "e = ebar = |v0|^2 / 2 off the fan")
    margin = float(np.min(eb[fan] - e[fan][:, None]))
    rep.add("inside_fan_margin", margin > 0, margin, 0.0, "e < ebar strictly in the fan")

    deficits = np.array([energy_deficit(bs, s) for s in t])
    pos = deficits[1:]
    rep.add("energy_deficit", bool(np.all(pos > 0)), float(pos.min()), 0.0,
            "total energy strictly below initial energy for t > 0")
    rep.check_le("deficit_at_t0", abs(float(deficits[0])), 0.0, "no deficit at t = 0")
    d2 = np.array([energy_deficit(bs, s, 2 * fp.eps) for s in t[1:]])
    lin = float(np.max(np.abs(d2 - 2 * pos) / np.abs(2 * pos)))
    rep.check_le("deficit_linear_in_eps", lin, 1e-12, "ebar is affine in eps")

    var_center = theta_variance(bs, np.full(nt, fp.r0), t[1:])
    var_t0 = theta_variance(bs, r, np.zeros_like(r))
    rep.add("theta_variance_fan", bool(np.all(var_center > 0)), float(var_center.min()), 0.0,
            "ebar depends on theta for t > 0")
    rep.check_le("theta_variance_t0", float(np.max(var_t0)), 0.0, "ebar theta-free at t = 0")
    var_grid = theta_variance(bs, R2, T2)
    rep.add("theta_variance_grid_fan", bool(np.all(var_grid[fan] > 0)),
            float(var_grid[fan].min()), 0.0, "ebar depends on theta at resolved fan nodes")

    excess = float(np.max(e[..., None] - (2.0 / 3.0) * eb))
    rep.add("two_thirds_form", excess <= 0, excess, 0.0,
            "lambda_max <= (2/3) ebar, reported only", asserted=False,
            note="fails off the fan where lambda_max = ebar")
    rep.metrics.update({
        "t": t, "deficit": deficits,
        "theta_variance_center": np.concatenate([[0.0], var_center]),
        "fan_nodes": int(fan.sum()), "collar": collar,
    })
    return rep


def weak_burgers_study(bs: BreakingSubsolution, ns=(64, 128, 256, 512), n_tests=12, seed=0):
    """Weak Burgers residual over bumps centred on the fan edges, r and t refined together.

    The profile is Lipschitz with kinks at the edges, so the nodal
    quadrature is at worst second order. Returns the max relative residual
    per level and the successive observed orders.
    """
    fp = bs.fp
    dom = fp.dom
    rng = np.random.default_rng(seed)
    tests = []
    for k in range(n_tests):
        t0 = rng.uniform(0.35, 0.65) * dom.T
        side = 1.0 if k % 2 else -1.0
        rc = fp.r0 + side * fp.lam * t0 + rng.uniform(-0.02, 0.02)
        ar = min(rng.uniform(0.15, 0.3), 0.95 * min(rc - dom.delta, dom.R - rc))
        tests.append(BumpTestFn((rc, rng.uniform(0, dom.z_period), t0),
                                (ar, 0.45 * dom.z_period, rng.uniform(0.2, 0.3) * dom.T)))
    res = []
    for n in ns:
        g = Grid(dom, n, 4, n)
        R, _, T = g.mesh()
        f = GridField(g, np.broadcast_to(bs.f(R, T), (n + 1, 4, n + 1)).copy(), "scalar")
        v, s = weak_residual("burgers", {"f": f}, tests, lam=fp.lam, return_scale=True)
        res.append(float(np.max(np.abs(v) / s)))
    orders = [float(np.log2(a / b)) for a, b in zip(res[:-1], res[1:])]
    return {"n": list(ns), "residual": res, "order": orders}


def profile_table(bs: BreakingSubsolution, r, t):
    """Rows (r, t, f, e, ebar(theta=0), ebar(theta=pi/2)) for CSV output."""
    R2, T2 = np.meshgrid(np.asarray(r, dtype=float), np.asarray(t, dtype=float), indexing="ij")
    cols = [R2, T2, bs.f(R2, T2), bs.energy(R2, T2), bs.ebar(R2, 0.0, T2),
            bs.ebar(R2, np.pi / 2, T2)]
    return np.stack([c.T.ravel() for c in cols], axis=1)
