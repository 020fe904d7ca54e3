"""Grid fields on the periodic strip (delta, R) x T, calculus and weak forms.

Samples are stored with axes ``(i_r, i_z, i_t[, component])``. The r and t
axes carry ``n + 1`` nodes including both endpoints; the periodic z axis
carries ``nz`` cell midpoints.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .errors import (GridMismatch, GridTooCoarse, InvalidDomain, InvalidField,
                     UnknownWeakForm)

RANKS = {"scalar": (), "vec2": (2,), "sym2-traceless": (2,)}
AXES = {"r": 0, "z": 1, "t": 2}


@dataclass(frozen=True)
class Domain:
    delta: float
    R: float
    z_period: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        vals = (self.delta, self.R, self.z_period, self.T)
        if not all(np.isfinite(v) for v in vals):
            raise InvalidDomain("domain parameters must be finite")
        if not 0 < self.delta < self.R:
            raise InvalidDomain(f"need 0 < delta < R, got {self.delta}, {self.R}")
        if self.z_period <= 0 or self.T <= 0:
            raise InvalidDomain("z_period and T must be positive")


@dataclass(frozen=True)
class Grid:
    domain: Domain
    nr: int
    nz: int
    nt: int

    def __post_init__(self):
        if min(self.nr, self.nz, self.nt) < 1:
            raise GridTooCoarse("every grid axis needs at least one cell")

    @property
    def h_r(self):
        return (self.domain.R - self.domain.delta) / self.nr

    @property
    def h_z(self):
        return self.domain.z_period / self.nz

    @property
    def h_t(self):
        return self.domain.T / self.nt

    @cached_property
    def r(self):
        return self.domain.delta + self.h_r * np.arange(self.nr + 1)

    @cached_property
    def z(self):
        return self.h_z * (np.arange(self.nz) + 0.5)

    @cached_property
    def t(self):
        return self.h_t * np.arange(self.nt + 1)

    @property
    def shape(self):
        return (self.nr + 1, self.nz, self.nt + 1)

    @cached_property
    def w_r(self):
        w = np.full(self.nr + 1, self.h_r)
        w[0] = w[-1] = 0.5 * self.h_r
        return w

    @cached_property
    def w_z(self):
        return np.full(self.nz, self.h_z)

    @cached_property
    def w_t(self):
        w = np.full(self.nt + 1, self.h_t)
        w[0] = w[-1] = 0.5 * self.h_t
        return w

    def mesh(self):
        """Broadcastable (r, z, t) coordinate arrays."""
        return (self.r[:, None, None], self.z[None, :, None], self.t[None, None, :])

    def refined(self, factor=2):
        return Grid(self.domain, self.nr * factor, self.nz * factor, self.nt * factor)


@dataclass(frozen=True, eq=False)
class GridField:
    grid: Grid
    samples: np.ndarray
    rank: str = "scalar"

    def __post_init__(self):
        if self.rank not in RANKS:
            raise InvalidField(f"unknown rank {self.rank!r}")
        arr = np.asarray(self.samples, dtype=np.float64)
        expected = self.grid.shape + RANKS[self.rank]
        if arr.shape != expected:
            arr = np.broadcast_to(arr, expected)
        if not np.all(np.isfinite(arr)):
            raise InvalidField("grid field contains non-finite samples")
        arr = np.array(arr, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    domain = property(lambda self: self.grid.domain)
    nr = property(lambda self: self.grid.nr)
    nz = property(lambda self: self.grid.nz)
    nt = property(lambda self: self.grid.nt)

    def component(self, k):
        if self.rank == "scalar":
            return self.samples
        return self.samples[..., k]

    @classmethod
    def from_function(cls, grid, fn, rank="scalar"):
        """Sample ``fn(r, z, t)`` (broadcasting) on ``grid``."""
        r, z, t = grid.mesh()
        vals = fn(r, z, t)
        if rank != "scalar":
            vals = np.stack([np.broadcast_to(v, grid.shape) for v in vals], axis=-1)
        return cls(grid, vals, rank)


def fd_derivative(f: GridField, axis: str) -> GridField:
    """Second-order finite difference along ``axis`` in {"r", "z", "t"}.

    Centered in the interior, periodic in z, one-sided second order at the
    r and t ends.
    """
    ax = AXES[axis]
    n = f.samples.shape[ax]
    if n < 4:
        raise GridTooCoarse(f"axis {axis} has {n} nodes, need at least 4")
    g = f.grid
    if axis == "z":
        out = (np.roll(f.samples, -1, axis=1) - np.roll(f.samples, 1, axis=1)) / (2 * g.h_z)
    else:
        h = g.h_r if axis == "r" else g.h_t
        out = np.gradient(f.samples, h, axis=ax, edge_order=2)
    return GridField(g, out, f.rank)


def integrate(f: GridField, weight="1", t_index=0) -> float:
    """Trapezoid in r times midpoint in periodic z at a fixed time node."""
    if f.rank != "scalar":
        raise InvalidField("integrate expects a scalar field")
    g = f.grid
    vals = f.samples[:, :, t_index]
    if weight == "r":
        vals = vals * g.r[:, None]
    elif weight != "1":
        raise ValueError(f"weight must be '1' or 'r', got {weight!r}")
    return float(g.w_r @ vals @ g.w_z)


def spacetime_integral(values, grid: Grid) -> float:
    """Quadrature of a full (r, z, t) array."""
    return kernels.contract3(np.asarray(values, dtype=np.float64), grid.w_r, grid.w_z, grid.w_t)


# ---------------------------------------------------------------- test functions

def bump_profile(s):
    """exp(-1/(1-s^2)) on |s| < 1, zero outside, and its derivative."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1
    val = np.zeros_like(s)
    der = np.zeros_like(s)
    si = s[inside]
    one_m = 1.0 - si * si
    v = np.exp(-1.0 / one_m)
    val[inside] = v
    der[inside] = v * (-2.0 * si / one_m ** 2)
    return val, der


@dataclass(frozen=True)
class BumpTestFn:
    """Tensor-product bump; vector valued when ``coeff`` is given.

    The vector test is ``coeff * phi`` with ``phi`` the scalar bump.
    """

    center: tuple
    radii: tuple
    coeff: tuple = None

    @property
    def vector(self):
        return self.coeff is not None

    def check_support(self, domain: Domain):
        (r0, z0, t0), (ar, az, at) = self.center, self.radii
        if not (r0 - ar > domain.delta and r0 + ar < domain.R):
            raise InvalidField("test support must stay inside (delta, R)")
        if not 0 < az < domain.z_period / 2:
            raise InvalidField("z radius must be below half the period")
        if not (t0 + at < domain.T and t0 > -at):
            raise InvalidField("test support must lie in [0, T)")

    def __call__(self, r, z, t, domain: Domain):
        """Pointwise value and derivatives (phi, d_r, d_z, d_t) of the scalar bump."""
        (r0, z0, t0), (ar, az, at) = self.center, self.radii
        P = domain.z_period
        dz = np.mod(np.asarray(z) - z0 + 0.5 * P, P) - 0.5 * P
        A, dA = bump_profile((np.asarray(r) - r0) / ar)
        B, dB = bump_profile(dz / az)
        C, dC = bump_profile((np.asarray(t) - t0) / at)
        return A * B * C, dA / ar * B * C, A * dB / az * C, A * B * dC / at

    def scaled(self, factor):
        if self.coeff is None:
            raise InvalidField("only vector tests carry a coefficient to scale")
        return BumpTestFn(self.center, self.radii, tuple(factor * c for c in self.coeff))

    def factors(self, grid: Grid):
        """Quadrature-weighted 1D factors restricted to the support box."""
        (r0, z0, t0), (ar, az, at) = self.center, self.radii
        P = grid.domain.z_period
        ir = np.nonzero(np.abs(grid.r - r0) < ar)[0]
        it = np.nonzero(np.abs(grid.t - t0) < at)[0]
        sl_r = slice(ir[0], ir[-1] + 1) if ir.size else slice(0, 0)
        sl_t = slice(it[0], it[-1] + 1) if it.size else slice(0, 0)
        A, dA = bump_profile((grid.r[sl_r] - r0) / ar)
        dz = np.mod(grid.z - z0 + 0.5 * P, P) - 0.5 * P
        B, dB = bump_profile(dz / az)
        C, dC = bump_profile((grid.t[sl_t] - t0) / at)
        wr, wz, wt = grid.w_r[sl_r], grid.w_z, grid.w_t[sl_t]
        C0, _ = bump_profile(np.array([(0.0 - t0) / at]))
        return _Factors(sl_r, sl_t, wr * A, wr * dA / ar, wz * B, wz * dB / az,
                        wt * C, wt * dC / at, float(C0[0]), grid.r[sl_r])


@dataclass(frozen=True)
class _Factors:
    sl_r: slice
    sl_t: slice
    a: np.ndarray
    da: np.ndarray
    b: np.ndarray
    db: np.ndarray
    c: np.ndarray
    dc: np.ndarray
    c0: float
    r: np.ndarray

    def pick(self, kind):
        # kind: value "0", or derivative "r", "z", "t"; "/r" divides the r factor by r
        a = {"r": self.da}.get(kind, self.a)
        if kind == "/r":
            a = self.a / self.r
        b = self.db if kind == "z" else self.b
        c = self.dc if kind == "t" else self.c
        return a, b, c


@dataclass
class CompositeTest:
    """Finite linear combination of bump tests, ``sum_k w_k phi_k``."""

    terms: list = field(default_factory=list)


# ---------------------------------------------------------------- weak forms

WEAK_FORMS = (
    "compressible-continuity",
    "compressible-momentum",
    "linear-momentum",
    "axisym-momentum",
    "axisym-linear-momentum",
    "axisym-divergence",
    "compressible-energy",
    "axisym-energy",
    "burgers",
)

_REQUIRED = {
    "compressible-continuity": ("rho", "m"),
    "compressible-momentum": ("rho", "m"),
    "linear-momentum": ("m", "U", "q"),
    "axisym-momentum": ("v", "pi"),
    "axisym-linear-momentum": ("v", "U", "q"),
    "axisym-divergence": ("v",),
    "compressible-energy": ("rho", "v"),
    "axisym-energy": ("v", "pi"),
    "burgers": ("f",),
}

_VECTOR_TEST = {"compressible-momentum", "linear-momentum", "axisym-momentum",
                "axisym-linear-momentum"}


def _flux_terms(system, F, grid, gamma, lam):
    """Assemble (array, derivative kind, component) triples and initial terms.

    Component ``None`` means a scalar test; 0/1 select the r/z coefficient of
    a vector test.
    """
    r = grid.r[:, None, None]
    terms, init = [], []
    if system == "compressible-continuity":
        rho, m = F["rho"].samples, F["m"].samples
        terms += [(rho, "t", None), (m[..., 0], "r", None), (m[..., 1], "z", None)]
        init += [(rho[:, :, 0], None)]
    elif system in ("compressible-momentum", "linear-momentum"):
        m = F["m"].samples
        if system == "compressible-momentum":
            rho = F["rho"].samples
            p = rho ** gamma
            S = [[m[..., 0] ** 2 / rho + p, m[..., 0] * m[..., 1] / rho],
                 [None, m[..., 1] ** 2 / rho + p]]
        else:
            U, q = F["U"].samples, F["q"].samples
            S = [[U[..., 0] + q, U[..., 1]], [None, -U[..., 0] + q]]
        S[1][0] = S[0][1]
        for i in (0, 1):
            terms += [(m[..., i], "t", i), (S[i][0], "r", i), (S[i][1], "z", i)]
            init += [(m[:, :, 0, i], i)]
    elif system in ("axisym-momentum", "axisym-linear-momentum"):
        v = F["v"].samples
        if system == "axisym-momentum":
            P = F["pi"].samples
            flux = [[r * v[..., i] * v[..., j] for j in (0, 1)] for i in (0, 1)]
        else:
            U, P = F["U"].samples, F["q"].samples
            Uf = [[U[..., 0], U[..., 1]], [U[..., 1], -U[..., 0]]]
            flux = [[r * Uf[i][j] for j in (0, 1)] for i in (0, 1)]
        rP = r * P
        for i in (0, 1):
            terms += [(r * v[..., i], "t", i), (flux[i][0], "r", i), (flux[i][1], "z", i)]
            init += [(r[:, :, 0] * v[:, :, 0, i], i)]
        terms += [(rP, "r", 0), (rP, "/r", 0), (rP, "z", 1)]
    elif system == "axisym-divergence":
        v = F["v"].samples
        terms += [(r * v[..., 0], "r", None), (r * v[..., 1], "z", None)]
    elif system == "compressible-energy":
        rho, v = F["rho"].samples, F["v"].samples
        v2 = v[..., 0] ** 2 + v[..., 1] ** 2
        pg = rho ** gamma
        E = 0.5 * rho * v2 + pg / (gamma - 1)
        H = 0.5 * rho * v2 + gamma / (gamma - 1) * pg
        terms += [(E, "t", None), (H * v[..., 0], "r", None), (H * v[..., 1], "z", None)]
        init += [(E[:, :, 0], None)]
    elif system == "axisym-energy":
        v, P = F["v"].samples, F["pi"].samples
        v2 = v[..., 0] ** 2 + v[..., 1] ** 2
        H = (0.5 * v2 + P) * r
        terms += [(0.5 * v2 * r, "t", None), (H * v[..., 0], "r", None), (H * v[..., 1], "z", None)]
        init += [(0.5 * v2[:, :, 0] * r[:, :, 0], None)]
    elif system == "burgers":
        f = F["f"].samples
        terms += [(f, "t", None), (0.5 * lam * f * f, "r", None)]
        init += [(f[:, :, 0], None)]
    return terms, init


def _contract_test(terms, init, test, grid, absolute=False):
    fac = test.factors(grid)
    coeff = test.coeff
    total = 0.0
    op = np.abs if absolute else (lambda x: x)
    for arr, kind, comp in terms:
        w = 1.0 if comp is None else coeff[comp]
        if w == 0.0:
            continue
        a, b, c = fac.pick(kind)
        box = arr[fac.sl_r, :, fac.sl_t]
        if box.size == 0:
            continue
        total += op(w) * kernels.contract3(op(box), op(a), op(b), op(c))
    if fac.c0 != 0.0:
        for arr0, comp in init:
            w = 1.0 if comp is None else coeff[comp]
            box = np.ascontiguousarray(arr0[fac.sl_r, :])[:, :, None]
            total += op(w) * op(fac.c0) * kernels.contract3(op(box), op(fac.a), op(fac.b),
                                                            np.ones(1))
    return total


def weak_residual(system, fields, tests, gamma=None, lam=None, return_scale=False):
    """Signed weak-form residual for each test function.

    ``fields`` maps names (``rho``, ``m``, ``v``, ``U``, ``q``, ``pi``, ``f``)
    to :class:`GridField` objects on one grid. With ``return_scale`` the
    quadrature of the absolute integrand is returned as a second array, which
    is the natural yardstick for relative tolerances.
    """
    if system not in _REQUIRED:
        raise UnknownWeakForm(system)
    missing = [k for k in _REQUIRED[system] if k not in fields]
    if missing:
        raise InvalidField(f"{system} needs fields {missing}")
    used = [fields[k] for k in _REQUIRED[system]]
    grid = used[0].grid
    if any(f.grid != grid for f in used):
        raise GridMismatch("all fields must share one grid")
    if system in ("compressible-momentum", "compressible-energy") and gamma is None:
        raise InvalidField(f"{system} needs gamma")
    if system == "burgers" and lam is None:
        raise InvalidField("burgers needs lam")
    terms, init = _flux_terms(system, fields, grid, gamma, lam)
    terms = [(np.asarray(a, dtype=np.float64), k, c) for a, k, c in terms]
    vector = system in _VECTOR_TEST

    def flat(ts):
        for t in ts:
            if isinstance(t, CompositeTest):
                yield t
            else:
                if t.vector != vector:
                    kind = "vector" if vector else "scalar"
                    raise InvalidField(f"{system} takes {kind} test functions")
                t.check_support(grid.domain)
                yield t

    values, scales = [], []
    for t in flat(tests):
        parts = t.terms if isinstance(t, CompositeTest) else [(1.0, t)]
        val = sc = 0.0
        for w, bump in parts:
            bump.check_support(grid.domain)
            val += w * _contract_test(terms, init, bump, grid)
            if return_scale:
                sc += abs(w) * _contract_test(terms, init, bump, grid, absolute=True)
        values.append(val)
        scales.append(sc)
    values = np.array(values)
    if return_scale:
        return values, np.array(scales)
    return values


def random_bumps(domain: Domain, n, seed=0, vector=False, radius_frac=(0.3, 0.45),
                 t_mode="interior"):
    """Deterministic random bumps whose support lies inside the strip.

    ``t_mode`` is ``"interior"`` (support in (0, T)), ``"initial"``
    (support touches t = 0, exercising the initial-data term) or ``"origin"``
    (centred at t = 0 with time radius 0.9 T, so the initial-data term and
    the trapezoid endpoint error dominate).
    """
    rng = np.random.default_rng(seed)
    L = domain.R - domain.delta
    out = []
    for _ in range(n):
        ar = rng.uniform(*radius_frac) * L
        az = rng.uniform(*radius_frac) * domain.z_period
        at = rng.uniform(*radius_frac) * domain.T
        if t_mode == "origin":
            at = 0.9 * domain.T
        r0 = rng.uniform(domain.delta + ar * 1.02, domain.R - ar * 1.02)
        z0 = rng.uniform(0, domain.z_period)
        if t_mode == "origin":
            t0 = 0.0
        elif t_mode == "initial":
            t0 = rng.uniform(0.0, 0.5 * at)
        else:
            t0 = rng.uniform(at * 1.02, domain.T - at * 1.02)
        coeff = None
        if vector:
            ang = rng.uniform(0, 2 * np.pi)
            coeff = (float(np.cos(ang)), float(np.sin(ang)))
        out.append(BumpTestFn((r0, z0, t0), (ar, az, at), coeff))
    return out


def write_csv(path, fields):
    """Dump named fields: header ``r,z,t,<components>``, t outer, r inner."""
    names = list(fields)
    grid = fields[names[0]].grid
    cols, header = [], []
    for name in names:
        f = fields[name]
        if f.grid != grid:
            raise GridMismatch("CSV dump needs fields on one grid")
        if f.rank == "scalar":
            cols.append(f.samples)
            header.append(name)
        else:
            suffix = ("r", "z") if f.rank == "vec2" else ("u", "w")
            for k, s in enumerate(suffix):
                cols.append(f.samples[..., k])
                header.append(f"{name}_{s}")
    lines = [",".join(["r", "z", "t"] + header)]
    for k, t in enumerate(grid.t):
        for j, z in enumerate(grid.z):
            for i, r in enumerate(grid.r):
                row = [r, z, t] + [c[i, j, k] for c in cols]
                lines.append(",".join(f"{x:.17g}" for x in row))
    text = "\n".join(lines) + "\n"
    from .report import atomic_write_text
    atomic_write_text(path, text)
