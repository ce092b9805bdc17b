"""Gabor systems over relatively separated node sets.

Frame operators are assembled directly from time-frequency shifted
windows (dense route) or through their Weyl symbol
``sum_lambda T_lambda W(h, g)`` (symbol route).  Frame bounds of square
lattices with rational density come from the Zibulski-Zeevi fiber
matrices of the Zak transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import optimize

from . import tfcore
from .tfcore import (GridError, GridSpec, PhaseSpaceFunction, SampledSignal, Window,
                     symbol_grid)
from .weyl import OperatorMatrix, spectral_edges

MASS_THRESHOLD = 1e-14


@dataclass(frozen=True, eq=False)
class AtomSet:
    """Finite list of time-frequency nodes.

    ``periodic_box = (x0, period_x, w0, period_w)`` marks the set as one
    period of a doubly periodic set; ``lattice_step`` is set for square
    lattices ``c Z^2``.
    """

    points: np.ndarray
    periodic_box: tuple | None = None
    lattice_step: float | None = None

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(p)):
            raise ValueError("atom coordinates must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)
        if self.periodic_box is not None:
            object.__setattr__(self, "periodic_box", tuple(float(v) for v in self.periodic_box))

    def __len__(self):
        return len(self.points)

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def omega(self):
        return self.points[:, 1]

    # constructors ------------------------------------------------------

    @classmethod
    def lattice(cls, step: float, grid: GridSpec | None = None, *, half_x=None, half_w=None):
        """``step * Z^2`` restricted to a box.

        With ``grid`` the set is one period of the lattice on the grid's
        phase-space torus (requires the torus sides to be multiples of
        ``step``); otherwise a finite patch ``|x| <= half_x, |w| <= half_w``.
        """
        if grid is not None:
            box = torus(grid)
            nx, nw = box[1] / step, box[3] / step
            if abs(nx - round(nx)) > 1e-9 or abs(nw - round(nw)) > 1e-9:
                raise GridError("lattice step does not tile the grid torus")
            xs = step * (math.ceil(box[0] / step - 1e-9) + np.arange(int(round(nx))))
            ws = step * (math.ceil(box[2] / step - 1e-9) + np.arange(int(round(nw))))
            X, Wm = np.meshgrid(_fold(xs, box[0], box[1]), _fold(ws, box[2], box[3]), indexing="ij")
            return cls(np.column_stack([X.ravel(), Wm.ravel()]), box, step)
        hx = 4.0 if half_x is None else half_x
        hw = hx if half_w is None else half_w
        kx = np.arange(-math.floor(hx / step + 1e-9), math.floor(hx / step + 1e-9) + 1)
        kw = np.arange(-math.floor(hw / step + 1e-9), math.floor(hw / step + 1e-9) + 1)
        X, Wm = np.meshgrid(step * kx, step * kw, indexing="ij")
        return cls(np.column_stack([X.ravel(), Wm.ravel()]), None, step)

    @classmethod
    def jittered(cls, step=1.0, amplitude=0.1, seed=0, grid: GridSpec | None = None, **kw):
        """Square lattice with i.i.d. uniform jitter in ``[-amplitude, amplitude)``."""
        base = cls.lattice(step, grid, **kw)
        rng = np.random.default_rng(seed)
        pts = base.points + rng.uniform(-amplitude, amplitude, size=base.points.shape)
        if base.periodic_box is not None:
            b = base.periodic_box
            pts = np.column_stack([_fold(pts[:, 0], b[0], b[1]), _fold(pts[:, 1], b[2], b[3])])
        return cls(pts, base.periodic_box, None)

    @classmethod
    def random_separated(cls, n, min_dist=0.9, half=4.0, seed=0, max_tries=100000):
        """Random points in ``[-half, half]^2`` with pairwise distance >= ``min_dist``."""
        rng = np.random.default_rng(seed)
        pts = []
        tries = 0
        while len(pts) < n and tries < max_tries:
            tries += 1
            p = rng.uniform(-half, half, size=2)
            if all(math.hypot(*(p - q)) >= min_dist for q in pts):
                pts.append(p)
        if len(pts) < n:
            raise ValueError("could not place the requested number of points")
        return cls(np.array(pts))

    def shifted(self, z) -> "AtomSet":
        return AtomSet(self.points + np.asarray(z, dtype=float)[None, :],
                       self.periodic_box, self.lattice_step)


def torus(grid: GridSpec) -> tuple:
    """Phase-space torus ``(t0, P, -1/(2 dt), 1/dt)`` of a grid."""
    return (grid.t0, grid.period, -0.5 / grid.dt, 1.0 / grid.dt)


def _fold(v, start, period):
    return start + np.mod(np.asarray(v) - start, period)


def rel_separation(L: AtomSet) -> int:
    """``sup_x #(Lambda cap (x + [0,1)^2))`` with half-open unit squares.

    Some optimal square has a point on its left edge and a point on its
    bottom edge, so anchors range over point coordinates.
    """
    p = L.points
    if len(p) == 0:
        return 0
    order = np.argsort(p[:, 0], kind="stable")
    xs, ws = p[order, 0], p[order, 1]
    best = 0
    for ax in np.unique(xs):
        lo = np.searchsorted(xs, ax, side="left")
        hi = np.searchsorted(xs, ax + 1.0, side="left")
        strip = np.sort(ws[lo:hi])
        if len(strip) <= best:
            continue
        top = np.searchsorted(strip, strip + 1.0, side="left")
        best = max(best, int(np.max(top - np.arange(len(strip)))))
    return best


def dilate_set(L: AtomSet, alpha: float) -> AtomSet:
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    box = None
    if L.periodic_box is not None:
        box = tuple(alpha * v for v in L.periodic_box)
    step = None if L.lattice_step is None else alpha * L.lattice_step
    return AtomSet(alpha * L.points, box, step)


def measure_norm(L: AtomSet, step=0.125) -> float:
    """``||sum delta_lambda||_{M^infty}`` with the Gaussian window ``phi x phi``.

    The supremum of ``|V mu(z, zeta)|`` is attained at ``zeta = 0`` where all
    terms are positive, so it equals ``sup_z sum_lambda Phi(lambda - z)``.
    """
    p = L.points
    if len(p) == 0:
        return 0.0
    xs = np.arange(p[:, 0].min() - 1, p[:, 0].max() + 1 + step, step)
    ws = np.arange(p[:, 1].min() - 1, p[:, 1].max() + 1 + step, step)
    gx = np.exp(-math.pi * (xs[None, :] - p[:, :1]) ** 2)
    gw = np.exp(-math.pi * (ws[None, :] - p[:, 1:2]) ** 2)
    return float(math.sqrt(2) * np.max(gx.T @ gw))


# --------------------------------------------------------------------------
# frame operators
# --------------------------------------------------------------------------


def effective_points(g: SampledSignal, L: AtomSet, grid: GridSpec) -> np.ndarray:
    """Nodes that contribute on ``grid``.

    Periodic sets must live on the grid torus and are folded into it.
    Finite sets drop nodes whose window keeps less than ``1e-14`` of its
    energy inside the box.
    """
    p = L.points
    if L.periodic_box is not None:
        if not np.allclose(L.periodic_box, torus(grid), rtol=1e-12, atol=1e-12):
            raise GridError("periodic atom set does not match the grid torus")
        b = L.periodic_box
        return np.column_stack([_fold(p[:, 0], b[0], b[1]), _fold(p[:, 1], b[2], b[3])])
    if len(p) == 0:
        return p
    e = np.abs(g.samples) ** 2
    e = e / e.sum()
    t = grid.t
    # energy profiles as functions of offset from the window centre (assumed at 0)
    frac_t = np.array([_mass_in(t, e, grid.t0 - x, grid.t0 + grid.period - x) for x in p[:, 0]])
    spec = np.abs(np.fft.fft(g.samples)) ** 2
    spec = spec / spec.sum()
    nu = grid.freqs
    frac_w = np.array([_mass_in(nu, spec, -grid.nyquist - w, grid.nyquist - w) for w in p[:, 1]])
    return p[frac_t * frac_w >= MASS_THRESHOLD]


def _mass_in(coords, weights, lo, hi):
    return float(weights[(coords >= lo) & (coords < hi)].sum())


def frame_operator(g: SampledSignal, h: SampledSignal, L: AtomSet,
                   grid: GridSpec | None = None) -> OperatorMatrix:
    """``S f = sum <f, pi(l) g> pi(l) h`` as a dense matrix on sample vectors."""
    grid = grid or g.grid
    tfcore._same_grid(g.grid, grid)
    tfcore._same_grid(h.grid, grid)
    pts = effective_points(g, L, grid)
    if len(pts) == 0:
        raise ValueError("no atoms contribute on this grid")
    G = tfcore.atoms(g, pts)
    H = G if h is g else tfcore.atoms(h, pts)
    S = (H.T @ G.conj()) * grid.dt
    if h is g:
        S = 0.5 * (S + S.conj().T)
    return OperatorMatrix(S, grid.dt)


@dataclass(frozen=True)
class FrameBounds:
    A: float
    B: float
    method: str
    resolution: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.A < 0 or self.B < self.A:
            raise ValueError(f"invalid frame bounds A={self.A}, B={self.B}")

    def to_json(self, rel=None) -> dict:
        d = {"A": self.A, "B": self.B, "method": self.method}
        d.update(self.resolution)
        if rel is not None:
            d["rel"] = rel
        return d


def frame_bounds(g: SampledSignal, L: AtomSet, grid: GridSpec | None = None,
                 method="auto") -> FrameBounds:
    """Optimal frame bounds of the (discrete, periodic) Gabor system."""
    grid = grid or g.grid
    S = frame_operator(g, g, L, grid)
    e = spectral_edges(S, method=method)
    scale = max(e.sigma_plus, 0.0)
    if e.sigma_minus < -1e-8 * max(scale, 1e-300):
        raise ArithmeticError(f"frame operator not positive: {e.sigma_minus}")
    A = max(e.sigma_minus, 0.0)
    used = "dense" if (method == "auto" and S.dim <= 2048) or method == "dense" else "lanczos"
    return FrameBounds(A, max(e.sigma_plus, A), used,
                       {"L": grid.num_samples, "dt": grid.dt, "atoms": int(len(effective_points(g, L, grid)))})


# --------------------------------------------------------------------------
# Weyl symbol of the frame operator
# --------------------------------------------------------------------------


def _axis_phases(n, step, shifts):
    nu = np.fft.fftfreq(n, d=step)
    ph = np.exp(-2j * np.pi * np.outer(shifts, nu))
    if n % 2 == 0:
        ph[:, n // 2] = np.cos(np.pi * np.asarray(shifts) / step)
    return ph


def _resample_axis(values, axis, origin, step, coords):
    """Trigonometric interpolation of ``values`` along ``axis`` at ``coords``."""
    n = values.shape[axis]
    k = np.fft.fftfreq(n, d=1.0 / n)
    u = (np.asarray(coords) - origin) / (n * step)
    ph = np.exp(2j * np.pi * np.outer(u, k))
    if n % 2 == 0:
        ph[:, n // 2] = np.cos(np.pi * n * u)
    c = np.fft.fft(values, axis=axis) / n
    return np.moveaxis(np.tensordot(ph, np.moveaxis(c, axis, 0), axes=(1, 0)), 0, axis)


def dilate_samples(F: PhaseSpaceFunction, a: float) -> np.ndarray:
    """Band-limited evaluation of ``F(a z)`` on F's own grid."""
    ps = F.psgrid
    v = _resample_axis(F.values, 0, ps.x0, ps.dx, a * ps.x)
    return _resample_axis(v, 1, ps.w0, ps.dw, a * ps.omega)


def _translate_sum(values, ps, pts):
    """``sum_lambda F(z - lambda)`` with band-limited translations."""
    Ax = _axis_phases(ps.nx, ps.dx, pts[:, 0])
    Aw = _axis_phases(ps.nw, ps.dw, pts[:, 1])
    phase = Ax.T @ Aw
    return np.fft.ifft2(np.fft.fft2(values) * phase)


def frame_symbol(g, h, L: AtomSet, delta: float = 0.0, grid: GridSpec | None = None,
                 route="numeric") -> PhaseSpaceFunction:
    """``G_delta = sum_lambda T_lambda D_{1/sqrt(1+delta)} W(h, g)`` on the symbol grid.

    ``g`` and ``h`` are sampled signals (or :class:`Window` objects together
    with ``grid``).  With ``route='analytic'`` both must be the standard
    Gaussian and the closed-form Wigner distribution is summed directly.
    At ``delta = 0`` this is the Weyl symbol of ``S_{g,h,L}``; the dilated
    set ``alpha L`` has symbol ``D_{sqrt(1+delta)} G_delta`` with
    ``sqrt(1+delta) = 1/alpha``.
    """
    if not abs(delta) < 1:
        raise ValueError("|delta| must be < 1")
    if isinstance(g, Window) or isinstance(h, Window):
        if grid is None:
            raise ValueError("grid required for Window arguments")
    grid = grid or g.grid
    gs = g.sample(grid) if isinstance(g, Window) else g
    hs = h.sample(grid) if isinstance(h, Window) else h
    sg = symbol_grid(grid)
    c = 1.0 / math.sqrt(1.0 + delta)
    pts = effective_points(gs, L, grid)
    if route == "analytic":
        return PhaseSpaceFunction(sg, _gaussian_symbol(sg, pts, c, grid))
    if route != "numeric":
        raise ValueError(f"unknown route {route!r}")
    W = tfcore.wigner(hs, gs, sg)
    vals = W.values if delta == 0 else dilate_samples(W, c)
    out = _translate_sum(vals, sg, pts)
    if hs is gs:
        out = out.real
    return PhaseSpaceFunction(sg, out)


def _gaussian_symbol(sg, pts, c, grid):
    P, Q = grid.period, 1.0 / grid.dt

    def periodized(coords, centres, period):
        d = coords[None, :] - centres[:, None]
        d = d - period * np.round(d / period)
        return sum(np.exp(-2 * math.pi * c * c * (d + k * period) ** 2) for k in (-1, 0, 1))

    Ax = periodized(sg.x, pts[:, 0], P)
    Aw = periodized(sg.omega, pts[:, 1], Q)
    return 2.0 * (Ax.T @ Aw)


def frame_symbol_derivative(g, h, L: AtomSet, delta: float, grid: GridSpec | None = None):
    """``d/d delta G_delta = -1/(2(1+delta)) mu * D_c (x.grad W(h, g))``."""
    from .weyl import radial_derivative

    grid = grid or g.grid
    sg = symbol_grid(grid)
    W = tfcore.wigner(h, g, sg)
    R = radial_derivative(W)
    c = 1.0 / math.sqrt(1.0 + delta)
    vals = R.values if delta == 0 else dilate_samples(R, c)
    pts = effective_points(g, L, grid)
    out = -_translate_sum(vals, sg, pts) / (2.0 * (1.0 + delta))
    if h is g:
        out = out.real
    return PhaseSpaceFunction(sg, out)


# --------------------------------------------------------------------------
# Zak-transform oracle for square lattices
# --------------------------------------------------------------------------


def _support_radius(win, tol=1e-17):
    if win.kind == "raised_cosine":
        return (win.params[0] if win.params else 2.0) / 2
    t = np.linspace(0, 64, 8193)
    v = np.abs(win(t))
    big = np.nonzero(v > tol * max(v.max(), 1e-300))[0]
    return float(t[big[-1]]) + 0.5 if len(big) else 1.0


def _as_window(g) -> Window:
    if isinstance(g, Window):
        return g
    if isinstance(g, SampledSignal):
        return Window("custom", (), g)
    raise TypeError("window must be a Window or SampledSignal")


class ZakOracle:
    """Frame bounds of ``G(g, a Z x b Z)`` for rational ``ab = p/q``.

    Reduces to the lattice ``(ab) Z x Z`` with window ``D_b g`` and
    evaluates the q-by-p Zibulski-Zeevi matrices
    ``p^(-1/2) Z gamma(t - l p/q, xi + k/p)`` on ``[0,1) x [0,1/p)``.
    """

    def __init__(self, g, a: float, b: float, max_den=4096):
        self.window = _as_window(g)
        ab = Fraction(a * b).limit_denominator(max_den)
        if abs(float(ab) - a * b) > 1e-12 * max(1.0, a * b):
            raise ValueError(f"lattice density a*b={a * b!r} is not rational (q <= {max_den})")
        self.p, self.q = ab.numerator, ab.denominator
        self.a, self.b = a, b
        r = _support_radius(self.window) * b
        self._m = np.arange(-math.ceil(r) - 2, math.ceil(r) + 3)

    def gamma(self, t):
        return self.window(np.asarray(t) / self.b) / math.sqrt(self.b)

    def matrices(self, t, xi):
        """Stack of Zibulski-Zeevi matrices for arrays ``t`` (n,) and ``xi`` (n,)."""
        p, q = self.p, self.q
        t = np.atleast_1d(t)
        xi = np.atleast_1d(xi)
        x = t[:, None] - (p / q) * np.arange(q)[None, :]                     # (n, q)
        shift = np.floor(x)
        vals = self.gamma((x - shift)[:, :, None] - self._m[None, None, :])  # (n, q, m)
        f = xi[:, None] + np.arange(p)[None, :] / p                         # (n, p)
        ph = np.exp(2j * np.pi * self._m[None, :, None] * f[:, None, :])    # (n, m, p)
        # quasi-periodicity Z(x + j, xi) = exp(2 pi i j xi) Z(x, xi)
        quasi = np.exp(2j * np.pi * shift[:, :, None] * f[:, None, :])      # (n, q, p)
        return np.einsum("nqm,nmp->nqp", vals, ph) * quasi / math.sqrt(p)

    def local_bounds(self, t, xi):
        M = self.matrices(t, xi)
        s = np.linalg.svd(M, compute_uv=False)
        lo = s[:, -1] ** 2 if self.q >= self.p else np.zeros(len(s))
        return lo, s[:, 0] ** 2

    def bounds(self, res=64, refine=True) -> FrameBounds:
        p = self.p
        # shifts t - l p/q put window singularities (e.g. a cusp at 0) on (1/q) Z
        tt = np.unique(np.concatenate([np.arange(res) / res, np.arange(self.q) / self.q]))
        xx = np.arange(res) / (res * p)
        lo = np.empty((len(tt), res))
        hi = np.empty((len(tt), res))
        for i, t in enumerate(tt):
            lo[i], hi[i] = self.local_bounds(np.full(res, t), xx)
        A, B = float(lo.min()), float(hi.max())
        if refine:
            A = self._refine(lo, tt, xx, 0, A)
            B = -self._refine(-hi, tt, xx, 1, -B)
        A = max(A, 0.0)
        return FrameBounds(A, max(B, A), "zak",
                           {"res": res, "p": self.p, "q": self.q, "a": self.a, "b": self.b})

    def _refine(self, grid_vals, tt, xx, which, best, starts=3):
        if which == 0 and self.q < self.p:
            return 0.0
        sign = 1.0 if which == 0 else -1.0

        def obj(v):
            out = self.local_bounds(np.array([v[0]]), np.array([v[1]]))[which][0]
            return sign * out

        flat = np.argsort(grid_vals, axis=None)[:starts]
        hx = 1.0 / len(tt)
        hy = xx[1] - xx[0] if len(xx) > 1 else 1.0 / self.p
        for idx in flat:
            i, j = np.unravel_index(idx, grid_vals.shape)
            x0 = np.array([tt[i], xx[j]])
            simplex = np.array([x0, x0 + [hx, 0], x0 + [0, hy]])
            res = optimize.minimize(obj, x0, method="Nelder-Mead",
                                    options={"initial_simplex": simplex, "xatol": 1e-10,
                                             "fatol": 1e-17, "maxiter": 2000})
            best = min(best, float(res.fun))
        return best


def zak_bounds(g, a: float, b: float, res=64, refine=True) -> FrameBounds:
    return ZakOracle(g, a, b).bounds(res, refine)


def zak_lattice_bounds(g, alpha_num: int, alpha_den: int, res=64, refine=True) -> FrameBounds:
    """Frame bounds of ``G(g, alpha Z^2)`` for rational ``alpha = p/q``."""
    if math.gcd(alpha_num, alpha_den) != 1:
        raise ValueError("alpha_num/alpha_den must be in lowest terms")
    alpha = alpha_num / alpha_den
    return ZakOracle(g, alpha, alpha, max_den=alpha_den ** 2).bounds(res, refine)


# --------------------------------------------------------------------------
# symbol bounds over a range of deformations
# --------------------------------------------------------------------------

SYMBOL_TREND_DELTA0 = (0.3, 0.6)


def symbol_bound_trend(window: Window | None = None, s=1.0, delta0s=SYMBOL_TREND_DELTA0,
                       grid: GridSpec | None = None, samples=(-0.95, -0.5, 0.0, 0.5, 0.95)) -> dict:
    """Growth of ``sup ||G_delta||`` and ``sup ||d/d delta G_delta||`` over
    ``|delta| < delta0`` as ``delta0`` grows.

    The symbol norm is ``M^{inf,1}_{0,s}`` and the derivative norm
    ``M^{inf,1}_{0,s-2}``.  Constants are fitted against ``(1-delta0)^-1``
    and ``(1-delta0)^-3`` (d = 1); PASS when the constant needed at the
    largest ``delta0`` is at most twice the one at the smallest.
    """
    from .modspace import MixedNormParams, mixed_norm_symbol

    grid = grid or GridSpec.centered(256, 1 / 16)
    g = (window or Window("gaussian")).sample(grid)
    lat = AtomSet.lattice(1.0, grid)
    p_sym, p_der = MixedNormParams(math.inf, 1, 0.0, s), MixedNormParams(math.inf, 1, 0.0, s - 2)
    rows = []
    for d0 in sorted(delta0s):
        sym = der = 0.0
        for u in samples:
            delta = u * d0
            sym = max(sym, mixed_norm_symbol(frame_symbol(g, g, lat, delta, grid), p_sym))
            der = max(der, mixed_norm_symbol(frame_symbol_derivative(g, g, lat, delta, grid), p_der))
        rows.append({"delta0": d0, "sup_symbol": sym, "sup_derivative": der,
                     "constant_symbol": sym * (1 - d0), "constant_derivative": der * (1 - d0) ** 3})
    first, last = rows[0], rows[-1]
    ok = (last["constant_symbol"] <= 2 * first["constant_symbol"]
          and last["constant_derivative"] <= 2 * first["constant_derivative"])
    return {"rows": rows, "s": s, "pass": bool(ok)}
