"""Explicit initial subsolution of the relaxed linear system.

For a positive profile chi_tilde(t) the triple

    m = (0, chi_tilde r),
    U_rr = -r^gamma,  U_rz = -chi_tilde' r^2 / 2,
    q = r^gamma + chi(t) / 2

solves d_t m + div U + grad q = 0, div m = 0 with m_r = 0 on both walls.
Its energy is z-independent,

    e(r, t) = chi_tilde^2 r / 2
              + sqrt((r^gamma - chi_tilde^2 r / 2)^2 + (chi_tilde' r^2 / 2)^2).
"""
from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .admissibility import ChiProfile
from .errors import GridMismatch, InvalidField
from .fields import Domain, Grid, GridField, random_bumps, weak_residual
from .geometry import DensityPressure
from .report import VerificationReport, atomic_write_text, write_json

DEFAULT_SHAPE = (128, 128, 64)
#: Relative weak-residual tolerance used by :func:`validate_subsolution`.
RESIDUAL_RTOL = 1e-3


@dataclass(frozen=True)
class ChiTilde:
    """Positive smooth profile for the explicit subsolution.

    kinds: ``constant`` (params ``(c,)``), ``cosine`` (params
    ``(c0, c1, omega)`` giving c0 + c1 cos(omega t)), ``sampled`` (params
    ``(t_nodes, values)``, interpolated by a cubic spline).
    """

    kind: str
    params: tuple
    T: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "cosine", "sampled"):
            raise InvalidField(f"unknown chi_tilde kind {self.kind!r}")
        probe = np.linspace(0.0, self.T, 257)
        if self.kind == "sampled":
            probe = np.union1d(probe, np.asarray(self.params[0], dtype=float))
        if not np.all(self.value(probe) > 0):
            raise InvalidField("chi_tilde must be strictly positive on [0, T]")

    @classmethod
    def constant(cls, c=1.0, T=1.0):
        return cls("constant", (float(c),), T)

    @classmethod
    def cosine(cls, c0, c1, omega, T=1.0):
        return cls("cosine", (float(c0), float(c1), float(omega)), T)

    @classmethod
    def sampled(cls, t_nodes, values, T=None):
        t_nodes = tuple(float(x) for x in t_nodes)
        T = t_nodes[-1] if T is None else T
        return cls("sampled", (t_nodes, tuple(float(v) for v in values)), T)

    def _spline(self):
        return CubicSpline(np.asarray(self.params[0]), np.asarray(self.params[1]))

    def value(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.params[0])
        if self.kind == "cosine":
            c0, c1, om = self.params
            return c0 + c1 * np.cos(om * t)
        return self._spline()(t)

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(t)
        if self.kind == "cosine":
            _, c1, om = self.params
            return -c1 * om * np.sin(om * t)
        return self._spline()(t, 1)

    def to_dict(self):
        if self.kind == "sampled":
            return {"kind": self.kind, "t": list(self.params[0]), "values": list(self.params[1])}
        return {"kind": self.kind, "params": list(self.params)}


@dataclass(frozen=True)
class SubsolutionState:
    """Grid triple (m, U, q) with its density law and, once attached, chi."""

    m: GridField
    U: GridField
    q: GridField
    dp: DensityPressure
    chi: ChiProfile = None
    chi_tilde: ChiTilde = None
    analytic: bool = True

    @property
    def grid(self) -> Grid:
        return self.m.grid

    def rho(self):
        return GridField.from_function(self.grid, lambda r, z, t: self.dp.rho0(r) + 0 * z + 0 * t)

    def energy(self):
        """Pointwise e(rho0, m, U) on the grid."""
        from . import kernels
        r = self.grid.r[:, None, None]
        m, U = self.m.samples, self.U.samples
        return kernels.energy_field(np.broadcast_to(r, m.shape[:-1]), m[..., 0], m[..., 1],
                                    U[..., 0], U[..., 1])

    def with_chi(self, chi: ChiProfile):
        """Attach chi and set q = p(rho0) + chi / 2."""
        g = self.grid
        c = np.asarray(chi.evaluate(g.t))
        q = GridField(g, self.dp.p(g.r)[:, None, None] + 0.5 * c[None, None, :])
        return replace(self, q=q, chi=chi)


def explicit_fields(r, t, dp: DensityPressure, chi_tilde: ChiTilde):
    """Closed-form (m_r, m_z, u, w, q_without_chi) at broadcast (r, t)."""
    r = np.asarray(r, dtype=float)
    c, dc = chi_tilde.value(t), chi_tilde.deriv(t)
    m_z = c * r
    u = -dp.p(r)
    w = -dc * r * r / 2
    return 0.0 * m_z, m_z, u + 0.0 * m_z, w + 0.0 * m_z, dp.p(r) + 0.0 * m_z


def build_explicit_subsolution(dom: Domain, dp: DensityPressure, chi_tilde: ChiTilde,
                               grid: Grid = None) -> SubsolutionState:
    grid = Grid(dom, *DEFAULT_SHAPE) if grid is None else grid
    if grid.domain != dom:
        raise GridMismatch("grid belongs to another domain")
    r = grid.r[:, None, None]
    t = grid.t[None, None, :]
    m_r, m_z, u, w, q = explicit_fields(r, t, dp, chi_tilde)
    shape = grid.shape
    m = GridField(grid, np.stack([np.broadcast_to(m_r, shape), np.broadcast_to(m_z, shape)], -1),
                  "vec2")
    U = GridField(grid, np.stack([np.broadcast_to(u, shape), np.broadcast_to(w, shape)], -1),
                  "sym2-traceless")
    return SubsolutionState(m, U, GridField(grid, np.broadcast_to(q, shape)), dp,
                            chi_tilde=chi_tilde)


def strong_residual(r, t, dp: DensityPressure, chi_tilde: ChiTilde):
    """Pointwise residuals (momentum_r, momentum_z, divergence) from exact derivatives.

    Only the chain rule on the closed forms is used; z-derivatives vanish
    since nothing depends on z.
    """
    r = np.asarray(r, dtype=float)
    g = dp.gamma
    dc = chi_tilde.deriv(t)
    dt_mr, dt_mz = 0.0 * r, dc * r
    dr_u = -g * r ** (g - 1)
    dr_w = -dc * r
    dr_q = g * r ** (g - 1)
    res_r = dt_mr + dr_u + 0.0 + dr_q      # d_r U_rr + d_z U_rz + d_r q
    res_z = dt_mz + dr_w + 0.0 + 0.0       # d_r U_zr + d_z U_zz + d_z q
    res_div = 0.0 * r + 0.0                # d_r m_r + d_z m_z
    return res_r, res_z, res_div


def explicit_energy(r, t, dp: DensityPressure, chi_tilde: ChiTilde):
    r = np.asarray(r, dtype=float)
    c, dc = chi_tilde.value(t), chi_tilde.deriv(t)
    half = c * c * r / 2
    return half + np.hypot(dp.p(r) - half, dc * r * r / 2)


class Threshold:
    """t -> 2 sup_r e(r, t) for the explicit family.

    The grid maximum is refined by a bounded scalar search in the two cells
    adjacent to the maximising node; the endpoints are evaluated exactly.
    """

    def __init__(self, dom: Domain, dp: DensityPressure, chi_tilde: ChiTilde, nr=128):
        self.dom, self.dp, self.chi_tilde = dom, dp, chi_tilde
        self.r = np.linspace(dom.delta, dom.R, nr + 1)

    def sup_e(self, t):
        e = explicit_energy(self.r, t, self.dp, self.chi_tilde)
        i = int(np.argmax(e))
        best = float(e[i])
        if 0 < i < len(self.r) - 1:
            res = minimize_scalar(lambda s: -float(explicit_energy(s, t, self.dp, self.chi_tilde)),
                                  bounds=(self.r[i - 1], self.r[i + 1]), method="bounded",
                                  options={"xatol": 1e-13})
            best = max(best, -float(res.fun))
        return best

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.array([2.0 * self.sup_e(s) for s in np.ravel(t)]).reshape(t.shape)
        return out if out.ndim else float(out)

    def sup_over_time(self, t_nodes):
        return float(np.max(self(np.asarray(t_nodes))))


def chi_threshold(sub: SubsolutionState) -> Threshold:
    if sub.chi_tilde is None:
        raise InvalidField("threshold needs the analytic chi_tilde of the explicit family")
    return Threshold(sub.grid.domain, sub.dp, sub.chi_tilde, sub.grid.nr)


def default_chi(sub: SubsolutionState, factor=1.1) -> ChiProfile:
    """Constant chi at ``factor`` times the threshold supremum over the time grid."""
    thr = chi_threshold(sub)
    level = factor * thr.sup_over_time(sub.grid.t)
    return ChiProfile.constant(level, sub.grid.domain.T, sub.grid.nt)


def _rel(res, scale):
    # a zero residual against a zero scale (e.g. m = 0) counts as exact
    res, scale = np.abs(res), np.asarray(scale, dtype=float)
    out = np.divide(res, scale, out=np.where(res > 0, np.inf, 0.0), where=scale > 0)
    return float(np.max(out))


def validate_subsolution(sub: SubsolutionState, chi: ChiProfile, tests=None,
                         n_tests=20, seed=0, rtol=RESIDUAL_RTOL) -> VerificationReport:
    """Check the linear system weakly and the strict energy condition pointwise."""
    g = sub.grid
    if not (sub.U.grid == g and sub.q.grid == g):
        raise GridMismatch("m, U and q must share a grid")
    if abs(chi.T - g.domain.T) > 1e-12:
        raise GridMismatch("chi profile must cover the grid time interval")
    sub = sub.with_chi(chi)
    dom = g.domain
    vtests = tests if tests is not None else random_bumps(dom, n_tests, seed, vector=True)
    stests = random_bumps(dom, n_tests, seed + 1)
    mom, mom_s = weak_residual("linear-momentum", {"m": sub.m, "U": sub.U, "q": sub.q},
                               vtests, return_scale=True)
    v = GridField(g, sub.m.samples / sub.dp.rho0(g.r)[:, None, None, None], "vec2")
    div, div_s = weak_residual("axisym-divergence", {"v": v}, stests, return_scale=True)
    rep = VerificationReport("subsolution")
    rep.check_le("momentum_residual", _rel(mom, mom_s), rtol,
                 "linear momentum equation, weak form")
    rep.check_le("divergence_residual", _rel(div, div_s), rtol,
                 "div m = 0, weak form")
    wall = float(max(np.max(np.abs(sub.m.samples[0, ..., 0])),
                     np.max(np.abs(sub.m.samples[-1, ..., 0]))))
    rep.check_le("wall_m_r", wall, 0.0 if sub.analytic else 1e-13, "m_r = 0 at r = delta, R")
    c = np.asarray(chi.evaluate(g.t))
    e = sub.energy()
    margin = 0.5 * c[None, None, :] - e
    rep.add("energy_margin", float(margin.min()) > 0, float(margin.min()), 0.0,
            "e(rho0, m, U) < chi / 2 strictly")
    q_err = float(np.max(np.abs(sub.q.samples - sub.dp.p(g.r)[:, None, None]
                                - 0.5 * c[None, None, :])))
    rep.check_le("q_consistency", q_err, 1e-12 * (1 + float(c.max())), "q = p(rho0) + chi / 2")
    idx = np.unravel_index(np.argmin(margin), margin.shape)
    rep.metrics["margin_argmin"] = {"r": float(g.r[idx[0]]), "z": float(g.z[idx[1]]),
                                    "t": float(g.t[idx[2]])}
    rep.metrics["chi_max"] = float(c.max())
    return rep


def residual_order_study(dom: Domain, dp: DensityPressure, chi_tilde: ChiTilde, chi_value,
                         nts=(32, 64, 128, 256, 512), nrz=64, n_tests=12, seed=0):
    """Observed convergence order of the weak momentum residual under time refinement.

    The spatial grid is held fixed, so its quadrature error is the same
    constant at every level and cancels in successive differences. Tests are
    centred at t = 0 so the trapezoid endpoint error is exercised. The order
    between levels k, k+1, k+2 is log2(|R_k - R_{k+1}| / |R_{k+1} - R_{k+2}|)
    with R the vector of signed per-test residuals and the max norm.

    Returns a dict with the raw residuals (max relative over tests) and the
    observed orders.
    """
    tests = random_bumps(dom, n_tests, seed, vector=True, radius_frac=(0.36, 0.48),
                         t_mode="origin")
    signed, res = [], []
    for nt in nts:
        sub = build_explicit_subsolution(dom, dp, chi_tilde, Grid(dom, nrz, nrz, nt))
        sub = sub.with_chi(ChiProfile.constant(chi_value, dom.T, nt))
        v, s = weak_residual("linear-momentum", {"m": sub.m, "U": sub.U, "q": sub.q},
                             tests, return_scale=True)
        signed.append(v / s)
        res.append(float(np.max(np.abs(v) / s)))
    diffs = [float(np.max(np.abs(a - b))) for a, b in zip(signed[:-1], signed[1:])]
    orders = [float(np.log2(a / b)) for a, b in zip(diffs[:-1], diffs[1:])]
    return {"nt": list(nts), "residual": res, "difference": diffs, "order": orders}


def energy_gap(m: GridField, chi_values, t_index=0):
    """int (rho0 chi - |m|^2) dz dr at one time node, without r-weight."""
    g = m.grid
    m2 = m.samples[:, :, t_index, 0] ** 2 + m.samples[:, :, t_index, 1] ** 2
    vals = g.r[:, None] * chi_values - m2
    return float(g.w_r @ vals @ g.w_z)


def target_state(sub: SubsolutionState, chi: ChiProfile):
    """Pointwise target rho0(r) chi(t) and the initial energy gap."""
    g = sub.grid
    c = np.asarray(chi.evaluate(g.t))
    target = GridField(g, g.r[:, None, None] * c[None, None, :])
    return target, energy_gap(sub.m, float(c[0]), 0)


def lower_than_hull_chain(sub: SubsolutionState, chi: ChiProfile, t_index=0):
    """(int |m|^2, 2 int rho0 e, int rho0 chi) at a time node, in increasing order when valid."""
    g = sub.grid
    m = sub.m.samples[:, :, t_index]
    e = sub.energy()[:, :, t_index]
    c = float(np.asarray(chi.evaluate(g.t[t_index])))
    r = g.r[:, None]
    quad = lambda f: float(g.w_r @ f @ g.w_z)  # noqa: E731
    return quad(m[..., 0] ** 2 + m[..., 1] ** 2), quad(2 * r * e), quad(r * c + 0 * e)


def dump_subsolution(sub: SubsolutionState, csv_path, json_path, z_index=0):
    """Write one z-slice of (m, U, q) over (r, t) as CSV plus a JSON sidecar.

    The explicit family is z-independent, so a single slice carries all of it.
    """
    g = sub.grid
    cols = [sub.m.samples[:, z_index, :, 0], sub.m.samples[:, z_index, :, 1],
            sub.U.samples[:, z_index, :, 0], sub.U.samples[:, z_index, :, 1],
            sub.q.samples[:, z_index, :]]
    lines = ["r,t,m_r,m_z,U_rr,U_rz,q"]
    for k, t in enumerate(g.t):
        for i, r in enumerate(g.r):
            lines.append(",".join(f"{x:.17g}" for x in [r, t] + [c[i, k] for c in cols]))
    atomic_write_text(csv_path, "\n".join(lines) + "\n")
    d = g.domain
    meta = {
        "gamma": sub.dp.gamma,
        "chi_tilde": sub.chi_tilde.to_dict() if sub.chi_tilde is not None else None,
        "chi": None if sub.chi is None else {"t": sub.chi.t, "values": sub.chi.chi},
        "domain": {"delta": d.delta, "R": d.R, "z_period": d.z_period, "T": d.T},
        "grid": {"nr": g.nr, "nz": g.nz, "nt": g.nt},
        "z": float(g.z[z_index]),
    }
    write_json(json_path, meta)


__all__ = [
    "ChiTilde", "SubsolutionState", "Threshold", "build_explicit_subsolution",
    "chi_threshold", "default_chi", "dump_subsolution", "energy_gap", "explicit_energy",
    "explicit_fields", "lower_than_hull_chain", "residual_order_study", "strong_residual",
    "target_state", "validate_subsolution",
]
