"""Localised plane-wave (laminate) steps that push |m|^2 toward rho0 chi.

One step adds a cut-off plane wave along a wave-cone direction d = (mbar, Ubar, 0):

    m  += a eta cos(N xi . x) mbar   (realised through a stream function),
    U  += a eta cos(N xi . x) Ubar,

where eta is a smooth tensor bump of peak 1. The m-part is the discrete
rotated gradient (D_z psi, -D_r psi) of

    psi = a / (N s kappa) eta sin(N xi . x),

kappa = |xi_x| and s = +-1 the orientation of xi_x relative to mbar, so the
discrete divergence D_r m_r + D_z m_z of the increment cancels identically
(the two difference operators act on different axes and commute).

The family mbar = (cos phi, sin phi), Ubar = sigma (-sin 2phi, cos 2phi) lies
in the wave cone for every (phi, sigma); its wave vector is proportional to
(-sin phi, cos phi, -sigma).
"""
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import Saturated, StepRejected
from .fields import GridField, bump_profile, random_bumps, weak_residual
from .geometry import State, lambda_direction
from .subsolution import SubsolutionState

#: Amplitude safety factor relative to the centre hull margin.
SAFETY = 0.5
#: Number of amplitude halvings before a step is rejected.
MAX_HALVINGS = 6
#: Cutoff radius as a fraction of each axis extent.
CUTOFF_FRACTION = 1.0 / 8.0
N_ANGLES = 16
SIGMAS = (-1.0, -0.5, 0.0, 0.5, 1.0)
#: Sixth-order centred first-derivative weights for offsets 1, 2, 3.
_D6 = (45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0)


def d6_z(f, h):
    """Periodic sixth-order derivative along axis 1."""
    out = np.zeros_like(f)
    for k, c in enumerate(_D6, start=1):
        out += c * (np.roll(f, -k, axis=1) - np.roll(f, k, axis=1))
    return out / h


def d6_r(f, h):
    """Sixth-order derivative along axis 0, zero extension past both ends."""
    n = f.shape[0]
    pad = np.zeros((3,) + f.shape[1:])
    g = np.concatenate([pad, f, pad], axis=0)
    out = np.zeros_like(f)
    for k, c in enumerate(_D6, start=1):
        out += c * (g[3 + k:3 + k + n] - g[3 - k:3 - k + n])
    return out / h


def discrete_divergence(m: GridField):
    g = m.grid
    return d6_r(m.samples[..., 0], g.h_r) + d6_z(m.samples[..., 1], g.h_z)


@dataclass(frozen=True)
class LaminateStep:
    center: tuple          # grid index (i, j, k)
    point: tuple           # (r, z, t)
    direction: State
    xi: np.ndarray
    N: int
    amplitude: float
    radii: tuple
    phi: float
    sigma: float
    margin_center: float

    def with_amplitude(self, a):
        return replace(self, amplitude=float(a))


def _radii(grid):
    d = grid.domain
    return ((d.R - d.delta) * CUTOFF_FRACTION, d.z_period * CUTOFF_FRACTION, d.T * CUTOFF_FRACTION)


def _admissible_centers(grid, radii):
    """Boolean masks along r and t for centres whose cutoff fits with a 3-node pad."""
    d = grid.domain
    ar, _, at = radii
    r_ok = (grid.r - ar > d.delta + 3 * grid.h_r) & (grid.r + ar < d.R - 3 * grid.h_r)
    t_ok = (grid.t - at > 0) & (grid.t + at < d.T)
    return r_ok, t_ok


def pointwise_gap(state: SubsolutionState):
    g = state.grid
    c = np.asarray(state.chi.evaluate(g.t))
    m = state.m.samples
    return g.r[:, None, None] * c[None, None, :] - (m[..., 0] ** 2 + m[..., 1] ** 2)


def energy_gap_spacetime(state: SubsolutionState):
    """int int int (rho0 chi - |m|^2) dz dr dt."""
    g = state.grid
    return float(kernels.contract3(np.ascontiguousarray(pointwise_gap(state)),
                                   g.w_r, g.w_z, g.w_t))


def hull_margin(state: SubsolutionState):
    g = state.grid
    c = np.asarray(state.chi.evaluate(g.t))
    return 0.5 * c[None, None, :] - state.energy()


def _center_state(state, idx):
    m = state.m.samples[idx]
    U = state.U.samples[idx]
    return State(float(m[0]), float(m[1]), float(U[0]), float(U[1]), 0.0)


def _energy_state(rho, s: State):
    return float(kernels.energy_field(np.asarray(rho, dtype=float), s.m_r, s.m_z, s.u, s.w))


def _feasible_amplitude(rho, base: State, d: State, level, a_hi):
    """Largest a <= a_hi with e(base +- a d) <= level, by bisection (e is convex)."""
    def ok(a):
        return max(_energy_state(rho, base + a * d), _energy_state(rho, base - a * d)) <= level

    if ok(a_hi):
        return a_hi
    lo, hi = 0.0, a_hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


def direction_candidates(m_center, scale):
    """Wave-cone directions (phi, sigma, State) with mbar . m_center >= 0."""
    out = []
    for k in range(N_ANGLES):
        phi = np.pi * k / N_ANGLES
        mb = np.array([np.cos(phi), np.sin(phi)])
        if mb @ m_center < 0:
            phi += np.pi
            mb = -mb
        for s in SIGMAS:
            sig = s * scale
            out.append((phi, sig, State(mb[0], mb[1], -sig * np.sin(2 * phi),
                                        sig * np.cos(2 * phi), 0.0)))
    return out


def propose_step(state: SubsolutionState, chi=None, N=64, tol=1e-12) -> LaminateStep:
    """Centre at the admissible node of largest pointwise gap, best cone direction there.

    The direction maximises the amplitude that keeps e(s +- a d) below chi/2
    at the centre; the amplitude is SAFETY times the smaller of that bound
    and the centre hull margin.
    """
    if chi is not None:
        state = state.with_chi(chi)
    g = state.grid
    radii = _radii(g)
    gap = pointwise_gap(state)
    r_ok, t_ok = _admissible_centers(g, radii)
    masked = np.where(r_ok[:, None, None] & t_ok[None, None, :], gap, -np.inf)
    best = masked.max()
    scale = float(np.max(np.abs(gap))) + 1.0
    if not best > tol * scale:
        raise Saturated("no admissible node has a positive gap")
    # argmax over a C-ordered array returns the lowest lexicographic index among ties
    idx = np.unravel_index(int(np.argmax(masked)), masked.shape)
    rho = float(g.r[idx[0]])
    level = 0.5 * float(np.asarray(state.chi.evaluate(g.t[idx[2]])))
    base = _center_state(state, idx)
    margin = level - _energy_state(rho, base)
    if not margin > 0:
        raise Saturated("centre has no hull margin left")
    mc = np.array([base.m_r, base.m_z])
    u_scale = max(float(np.hypot(*mc)) / rho, 1.0)
    best_key = None
    for phi, sig, d in direction_candidates(mc, u_scale):
        a = _feasible_amplitude(rho, base, d, level, margin)
        if best_key is None or a > best_key[0] + 1e-14:
            best_key = (a, phi, sig, d)
    a_feas, phi, sig, d = best_key
    _, xi = lambda_direction(State(), d)
    xi = xi + 0.0  # drop signed zeros
    point = (float(g.r[idx[0]]), float(g.z[idx[1]]), float(g.t[idx[2]]))
    return LaminateStep(tuple(int(i) for i in idx), point, d, xi, int(N),
                        SAFETY * min(margin, a_feas), radii, float(phi), float(sig), margin)


def cutoff(grid, point, radii, t_slice=slice(None)):
    """Peak-one tensor bump eta on the grid (r, z periodic, t restricted)."""
    (r0, z0, t0), (ar, az, at) = point, radii
    P = grid.domain.z_period
    A, dA = bump_profile((grid.r - r0) / ar)
    dz = np.mod(grid.z - z0 + 0.5 * P, P) - 0.5 * P
    B, dB = bump_profile(dz / az)
    C, dC = bump_profile((grid.t[t_slice] - t0) / at)
    peak = np.exp(3.0)
    return peak, (A, dA / ar), (B, dB / az), (C, dC / at), dz


def wave_increment(grid, step: LaminateStep, amplitude=None):
    """(t_slice, dm, dU) for one step, dm from the stream function."""
    a = step.amplitude if amplitude is None else amplitude
    (r0, z0, t0), (ar, az, at) = step.point, step.radii
    it = np.nonzero(np.abs(grid.t - t0) < at)[0]
    sl = slice(it[0], it[-1] + 1)
    peak, (A, _), (B, _), (C, _), dz = cutoff(grid, step.point, step.radii, sl)
    eta = peak * A[:, None, None] * B[None, :, None] * C[None, None, :]
    xr, xz, xt = step.xi
    theta = (xr * (grid.r - r0))[:, None, None] + (xz * dz)[None, :, None] \
        + (xt * (grid.t[sl] - t0))[None, None, :]
    N = step.N
    mb = np.array([step.direction.m_r, step.direction.m_z])
    kappa = float(np.hypot(xr, xz))
    orient = np.sign(xz * mb[0] - xr * mb[1])
    psi = a / (N * orient * kappa) * eta * np.sin(N * theta)
    dm = np.stack([d6_z(psi, grid.h_z), -d6_r(psi, grid.h_r)], axis=-1)
    wave = a * eta * np.cos(N * theta)
    dU = np.stack([wave * step.direction.u, wave * step.direction.w], axis=-1)
    return sl, dm, dU, eta, theta


def _add(state, sl, dm, dU):
    m = np.array(state.m.samples)
    U = np.array(state.U.samples)
    m[:, :, sl] += dm
    U[:, :, sl] += dU
    g = state.grid
    return replace(state, m=GridField(g, m, "vec2"), U=GridField(g, U, "sym2-traceless"),
                   analytic=False)


def apply_step(state: SubsolutionState, step: LaminateStep, gap_before=None):
    """Add the wave, halving the amplitude until the hull and gap tests pass.

    Returns ``(new_state, accepted_step, info)``. Raises :class:`StepRejected`
    after ``MAX_HALVINGS`` halvings.
    """
    if step.amplitude == 0:
        return state, step, {"halvings": 0, "gap_decrease": 0.0, "lower_bound": 0.0}
    g = state.grid
    gap_before = energy_gap_spacetime(state) if gap_before is None else gap_before
    a = step.amplitude
    for h in range(MAX_HALVINGS + 1):
        sl, dm, dU, eta, theta = wave_increment(g, step, a)
        trial = _add(state, sl, dm, dU)
        margin = hull_margin(trial)[:, :, sl]
        gap_after = energy_gap_spacetime(trial)
        dec = gap_before - gap_after
        if margin.min() > 0 and dec > 0:
            prof = (eta * np.cos(step.N * theta)) ** 2
            lower = 0.25 * a * a * float(kernels.contract3(np.ascontiguousarray(prof), g.w_r,
                                                           g.w_z, g.w_t[sl]))
            info = {"halvings": h, "gap_decrease": dec, "lower_bound": lower,
                    "gap": gap_after, "margin_min": float(margin.min())}
            return trial, step.with_amplitude(a), info
        a *= 0.5
    raise StepRejected(f"step at {step.center} still violates the hull after "
                       f"{MAX_HALVINGS} halvings")


@dataclass
class IterationTrace:
    records: list = field(default_factory=list)
    gap0: float = float("nan")
    residual0: float = float("nan")
    perturbation_residual: float = float("nan")
    stopped: str = "completed"

    @property
    def gaps(self):
        return np.array([self.gap0] + [r["gap"] for r in self.records])

    def fitted_c(self):
        """min_k (G_k - G_{k+1}) / G_k^2, the constant in G_{k+1} <= G_k - c G_k^2."""
        G = self.gaps
        if len(G) < 2:
            return float("nan")
        return float(np.min((G[:-1] - G[1:]) / G[:-1] ** 2))

    def empirical_exponent(self):
        """Slope of log(G_k - G_{k+1}) against log(G_k) by least squares."""
        G = self.gaps
        if len(G) < 3:
            return float("nan")
        dec = G[:-1] - G[1:]
        if np.any(dec <= 0) or np.ptp(np.log(G[:-1])) == 0:
            return float("nan")
        return float(np.polyfit(np.log(G[:-1]), np.log(dec), 1)[0])

    def to_dict(self):
        return {
            "gap0": self.gap0, "residual0": self.residual0, "stopped": self.stopped,
            "perturbation_residual": self.perturbation_residual,
            "fitted_c": self.fitted_c(), "empirical_exponent": self.empirical_exponent(),
            "steps": self.records,
        }


def residual_norm(state: SubsolutionState, vtests, stests):
    """Max absolute weak residual over momentum and divergence tests."""
    mom = weak_residual("linear-momentum", {"m": state.m, "U": state.U, "q": state.q}, vtests)
    g = state.grid
    v = GridField(g, state.m.samples / g.r[:, None, None, None], "vec2")
    div = weak_residual("axisym-divergence", {"v": v}, stests)
    return float(max(np.max(np.abs(mom)), np.max(np.abs(div))))


def run_iteration(state: SubsolutionState, chi=None, K=20, N=64, seed=0, n_tests=12):
    """Run up to K laminate steps; returns ``(final_state, trace)``."""
    if K < 1:
        raise ValueError("K must be at least 1")
    if chi is not None:
        state = state.with_chi(chi)
    start = state
    dom = state.grid.domain
    vtests = random_bumps(dom, n_tests, seed, vector=True)
    stests = random_bumps(dom, n_tests, seed + 1)
    trace = IterationTrace(gap0=energy_gap_spacetime(state),
                           residual0=residual_norm(state, vtests, stests))
    gap = trace.gap0
    for k in range(K):
        try:
            step = propose_step(state, N=N)
        except Saturated:
            trace.stopped = "saturated"
            break
        state, step, info = apply_step(state, step, gap)
        gap = info["gap"]
        div = float(np.max(np.abs(discrete_divergence(state.m))))
        trace.records.append({
            "step": k + 1, "center": list(step.center), "point": list(step.point),
            "phi": step.phi, "sigma": step.sigma, "xi": list(map(float, step.xi)),
            "amplitude": step.amplitude, "halvings": info["halvings"],
            "gap": gap, "gap_decrease": info["gap_decrease"],
            "decrease_lower_bound": info["lower_bound"],
            "hull_margin_min": float(hull_margin(state).min()),
            "divergence_max": div,
            "residual": residual_norm(state, vtests, stests),
        })
    trace.perturbation_residual = perturbation_residual(start, state, vtests, stests)
    return state, trace


def perturbation_residual(start: SubsolutionState, end: SubsolutionState, vtests, stests):
    """Weak residual of ``end - start`` alone; the weak forms are linear in the fields."""
    g = end.grid
    diff = replace(end, m=GridField(g, end.m.samples - start.m.samples, "vec2"),
                   U=GridField(g, end.U.samples - start.U.samples, "sym2-traceless"),
                   q=GridField(g, end.q.samples - start.q.samples))
    return residual_norm(diff, vtests, stests)
