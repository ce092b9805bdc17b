"""Weighted mixed-norm modulation-space norms, dilations and truncation approximants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import tfcore
from .tfcore import GridSpec, PhaseSpaceFunction, PhaseSpaceGrid, SampledSignal, Window

SUPPORTED_EXPONENTS = (1, 2, math.inf)
SYMBOL_EXPONENTS = ((math.inf, 1), (1, 1))
DILATION_RANGE = (0.25, 4.0)
RING_TOL = 1e-6


class CoverageError(ValueError):
    """Phase-space grid does not contain the numerical support of the STFT."""


@dataclass(frozen=True)
class MixedNormParams:
    """Exponents ``p`` (position) and ``q`` (frequency) with weights
    ``(1+|x|)^s`` and ``(1+|w|)^t``."""

    p: float = 2
    q: float = 2
    s: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        for name in ("p", "q"):
            v = float(getattr(self, name))
            if v not in SUPPORTED_EXPONENTS:
                raise ValueError(f"{name}={v} not in {{1, 2, inf}}")
            object.__setattr__(self, name, v)
        if not (math.isfinite(self.s) and math.isfinite(self.t)):
            raise ValueError("weights must be finite")


@dataclass(frozen=True)
class ApproxParams:
    a: float
    b: float
    c: float
    epsilon: float
    region: str = "frequency_band"

    def __post_init__(self):
        if not self.a <= self.b <= self.c:
            raise ValueError("need a <= b <= c")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if self.region not in ("frequency_band", "phase_space_ball"):
            raise ValueError(f"unknown region {self.region!r}")

    @property
    def radius(self) -> float:
        return 1.0 / self.epsilon - 1.0


def _mixed(values, wx, ww, dx, dw, p, q):
    a = np.abs(values) * wx[:, None]
    if p == math.inf:
        inner = a.max(axis=0)
    else:
        inner = (np.sum(a ** p, axis=0) * dx) ** (1.0 / p)
    inner = inner * ww
    if q == math.inf:
        return float(inner.max())
    return float((np.sum(inner ** q) * dw) ** (1.0 / q))


def _ring_fraction(weighted):
    nx, nw = weighted.shape
    rx, rw = max(1, nx // 32), max(1, nw // 32)
    total = weighted.sum()
    if total == 0:
        return 0.0
    inner = weighted[rx:nx - rx, rw:nw - rw].sum()
    return float((total - inner) / total)


def mixed_norm_signal(f: SampledSignal, params: MixedNormParams, psgrid: PhaseSpaceGrid,
                      window: SampledSignal | None = None, check=True) -> float:
    """``||V_phi f||`` in the weighted mixed norm, by Riemann sums or maxima.

    With ``check`` the weighted STFT magnitude on the outer ring of
    ``psgrid`` must stay below ``1e-6`` of the total.
    """
    g = window if window is not None else tfcore.make_window("gaussian", f.grid)
    V = tfcore.stft_at(f, g, psgrid.x, psgrid.omega)
    return _norm_from_stft(V, params, psgrid, check)


def _norm_from_stft(V, params, psgrid, check=True):
    wx = (1 + np.abs(psgrid.x)) ** params.s
    ww = (1 + np.abs(psgrid.omega)) ** params.t
    if check:
        frac = _ring_fraction(np.abs(V) * wx[:, None] * ww[None, :])
        if frac > RING_TOL:
            raise CoverageError(f"weighted STFT mass {frac:.2e} on the grid boundary")
    return _mixed(V, wx, ww, psgrid.dx, psgrid.dw, params.p, params.q)


# --------------------------------------------------------------------------
# symbol norms (STFT on R^2 with window phi x phi)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SymbolNormGrid:
    """Coarse sampling of the 4-D STFT: ``n_pos`` positions spanning the
    symbol's box and ``n_freq`` frequencies in ``[-freq_half, freq_half)``
    per axis."""

    n_pos: int = 32
    n_freq: int = 32
    freq_half: float = 4.0

    def refined(self) -> "SymbolNormGrid":
        return SymbolNormGrid(2 * self.n_pos, 2 * self.n_freq, self.freq_half)


def _axis_kernel(coords, step, positions, freqs):
    # K[(p, k), n] = phi(c_n - p) exp(-2 pi i k c_n) * step
    phi = 2 ** 0.25 * np.exp(-math.pi * (coords[None, :] - positions[:, None]) ** 2)
    mod = np.exp(-2j * math.pi * np.outer(freqs, coords))
    return (phi[:, None, :] * mod[None, :, :]).reshape(-1, len(coords)) * step


def symbol_stft(F: PhaseSpaceFunction, ng: SymbolNormGrid = SymbolNormGrid()):
    """4-D STFT ``V[p1, k1, p2, k2]`` of ``F`` and the sampling axes."""
    ps = F.psgrid
    px = ps.x0 + (np.arange(ng.n_pos) + 0.5) * (ps.nx * ps.dx / ng.n_pos)
    pw = ps.w0 + (np.arange(ng.n_pos) + 0.5) * (ps.nw * ps.dw / ng.n_pos)
    kf = -ng.freq_half + np.arange(ng.n_freq) * (2 * ng.freq_half / ng.n_freq)
    K1 = _axis_kernel(ps.x, ps.dx, px, kf)
    K2 = _axis_kernel(ps.omega, ps.dw, pw, kf)
    V = (K1 @ F.values) @ K2.T
    V = V.reshape(ng.n_pos, ng.n_freq, ng.n_pos, ng.n_freq)
    return V, (px, pw, kf)


def mixed_norm_symbol(F: PhaseSpaceFunction, params: MixedNormParams,
                      ng: SymbolNormGrid = SymbolNormGrid()) -> float:
    """Approximate ``M^{inf,1}_{0,t}`` or ``M^1_{s,t}`` norm of a 2-D symbol.

    Position weights use ``|z|`` and frequency weights ``|zeta|`` with the
    Euclidean norm on R^2.
    """
    if (params.p, params.q) not in SYMBOL_EXPONENTS:
        raise ValueError(f"unsupported symbol norm (p, q) = ({params.p}, {params.q})")
    if not np.any(F.values):
        return 0.0
    V, (px, pw, kf) = symbol_stft(F, ng)
    A = np.abs(V).transpose(0, 2, 1, 3)          # (p1, p2, k1, k2)
    dpos = (px[1] - px[0]) * (pw[1] - pw[0])
    dk = (kf[1] - kf[0]) ** 2
    zeta = np.hypot(kf[:, None], kf[None, :])
    wz = (1 + zeta) ** params.t
    if params.p == math.inf:
        inner = A.max(axis=(0, 1))
    else:
        pos = np.hypot(px[:, None], pw[None, :])
        inner = np.sum(A * ((1 + pos) ** params.s)[:, :, None, None], axis=(0, 1)) * dpos
    return float(np.sum(inner * wz) * dk)


# --------------------------------------------------------------------------
# dilations
# --------------------------------------------------------------------------


def resample_axis(values, axis, origin, step, coords, periodic=True):
    """Trigonometric interpolation of ``values`` along ``axis`` at ``coords``.

    With ``periodic=False`` coordinates outside ``[origin, origin + n*step)``
    give 0 instead of a periodic image.
    """
    n = values.shape[axis]
    coords = np.asarray(coords, dtype=float)
    k = np.fft.fftfreq(n, d=1.0 / n)
    u = (coords - origin) / (n * step)
    ph = np.exp(2j * np.pi * np.outer(u, k))
    if n % 2 == 0:
        ph[:, n // 2] = np.cos(np.pi * n * u)
    if not periodic:
        ph[(u < 0) | (u >= 1)] = 0.0
    c = np.fft.fft(values, axis=axis) / n
    return np.moveaxis(np.tensordot(ph, np.moveaxis(c, axis, 0), axes=(1, 0)), 0, axis)


def _check_dilation(a):
    lo, hi = DILATION_RANGE
    if not lo <= a <= hi:
        raise ValueError(f"dilation factor {a} outside [{lo}, {hi}]")


def dilate_signal(f, a: float, grid: GridSpec | None = None) -> SampledSignal:
    """``D_a f(t) = f(a t)`` on the same grid (no renormalisation).

    Analytic windows are re-evaluated exactly (``grid`` required); sampled
    signals are resampled by band-limited interpolation.
    """
    _check_dilation(a)
    if isinstance(f, Window):
        if grid is None:
            raise ValueError("grid required to dilate an analytic window")
        if f.analytic:
            return SampledSignal(grid, f(a * grid.t))
        f = f.sample(grid)
    if a == 1:
        return f
    g = f.grid
    vals = resample_axis(f.samples, 0, g.t0, g.dt, a * g.t, periodic=False)
    return SampledSignal(g, vals)


def dilate_symbol(F: PhaseSpaceFunction, a: float, periodic=False) -> PhaseSpaceFunction:
    """``D_a F(z) = F(a z)`` by separable band-limited interpolation."""
    _check_dilation(a)
    if a == 1:
        return F
    ps = F.psgrid
    v = resample_axis(F.values, 0, ps.x0, ps.dx, a * ps.x, periodic)
    v = resample_axis(v, 1, ps.w0, ps.dw, a * ps.omega, periodic)
    if np.isrealobj(F.values):
        v = v.real
    return PhaseSpaceFunction(ps, v)


# --------------------------------------------------------------------------
# truncation approximants
# --------------------------------------------------------------------------


def truncation_mask(psgrid: PhaseSpaceGrid, radius: float, region: str) -> np.ndarray:
    if region == "frequency_band":
        return np.broadcast_to(np.abs(psgrid.omega)[None, :] <= radius, (psgrid.nx, psgrid.nw))
    if region == "phase_space_ball":
        return np.hypot(psgrid.x[:, None], psgrid.omega[None, :]) <= radius
    raise ValueError(f"unknown region {region!r}")


def truncate_approx(g: SampledSignal, params: ApproxParams, psgrid: PhaseSpaceGrid,
                    check=True) -> SampledSignal:
    """``h = istft(chi_Omega * V_phi g)`` with ``Omega`` a frequency band or a ball of radius
    ``1/epsilon - 1``."""
    phi = tfcore.make_window("gaussian", g.grid)
    V = tfcore.stft_at(g, phi, psgrid.x, psgrid.omega)
    if check:
        frac = _ring_fraction(np.abs(V))
        if frac > RING_TOL:
            raise CoverageError(f"STFT mass {frac:.2e} on the grid boundary")
    mask = truncation_mask(psgrid, params.radius, params.region)
    return tfcore.istft(PhaseSpaceFunction(psgrid, V * mask), phi)


def loglog_slope(x, y) -> float:
    x, y = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    good = np.isfinite(y)
    if good.sum() < 2:
        return float("nan")
    return float(np.polyfit(x[good], y[good], 1)[0])


REGION_NORMS = {
    # part (i): M^{inf,1}_{0,w}; part (ii): M^1_{w,w}
    "frequency_band": lambda w: MixedNormParams(math.inf, 1, 0.0, w),
    "phase_space_ball": lambda w: MixedNormParams(1, 1, w, w),
}


@dataclass
class TradeoffTable:
    a: float
    b: float
    c: float
    rows: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)

    CSV_HEADER = ("epsilon", "region", "err_norm_a", "h_norm_c", "slope_err", "slope_growth")

    def csv_rows(self):
        for eps, region, err, grow in self.rows:
            se, sg = self.slopes[region]
            yield eps, region, err, grow, se, sg

    def targets(self) -> dict:
        return {"frequency_band": (self.b - self.a, -(self.c - self.b)),
                "phase_space_ball": (self.b - self.a, -2 * (self.c - self.b))}


def tradeoff_table(g: SampledSignal, a: float, b: float, c: float, eps_list,
                   psgrid: PhaseSpaceGrid, regions=("frequency_band", "phase_space_ball"),
                   check=False) -> TradeoffTable:
    """Approximation error at weight ``a`` and growth at weight ``c`` per epsilon.

    Norms are taken of the sampled STFTs on ``psgrid``; ``check=False``
    skips the coverage test, which slowly decaying corpus signals fail by
    design.
    """
    if not a <= b <= c:
        raise ValueError("need a <= b <= c")
    eps_list = sorted(float(e) for e in eps_list)
    if not all(0 < e <= 1 for e in eps_list):
        raise ValueError("epsilon values must lie in (0, 1]")
    phi = tfcore.make_window("gaussian", g.grid)
    Vg = tfcore.stft_at(g, phi, psgrid.x, psgrid.omega)
    table = TradeoffTable(a, b, c)
    for region in regions:
        norm = REGION_NORMS[region]
        errs, grows = [], []
        for eps in eps_list:
            ap = ApproxParams(a, b, c, eps, region)
            mask = truncation_mask(psgrid, ap.radius, region)
            h = tfcore.istft(PhaseSpaceFunction(psgrid, Vg * mask), phi, tol=math.inf)
            Vh = tfcore.stft_at(h, phi, psgrid.x, psgrid.omega)
            err = _norm_from_stft(Vg - Vh, norm(a), psgrid, check)
            grow = _norm_from_stft(Vh, norm(c), psgrid, check)
            table.rows.append((eps, region, err, grow))
            errs.append(err)
            grows.append(grow)
        table.slopes[region] = (loglog_slope(eps_list, errs), loglog_slope(eps_list, grows))
    return table


# --------------------------------------------------------------------------
# corpus with prescribed frequency decay
# --------------------------------------------------------------------------


def power_law_signal(grid: GridSpec, kappa: float, scale: float = 1.0) -> SampledSignal:
    """Unit-norm signal with spectrum ``(1 + (xi/scale)^2)^(-kappa/2)`` centred at t=0.

    Its STFT decays like ``(1+|w|)^-kappa``, so it lies in ``M^{inf,1}_{0,b}``
    exactly for ``b < kappa - 1``.
    """
    xi = grid.freqs
    spec = (1 + (xi / scale) ** 2) ** (-kappa / 2)
    # centre at t = 0 on a grid starting at t0
    spec = spec * np.exp(2j * np.pi * xi * grid.t0)
    f = np.fft.ifft(spec)
    f = f / (np.linalg.norm(f) * math.sqrt(grid.dt))
    return SampledSignal(grid, f)


# --------------------------------------------------------------------------
# dilation norm estimates
# --------------------------------------------------------------------------

DILATION_FACTORS = (0.5, 0.75, 1.0, 1.5, 2.0)


def signal_dilation_factor(a: float, s: float, d: int = 1) -> float:
    return max(1.0, a ** d) * max(1.0, a ** s)


def symbol_dilation_factor(a: float, s: float, d: int = 1) -> float:
    return max(1.0, a ** (-2 * d)) * max(1.0, a ** s)


def _fitted_constant(norms, base, factors, weight):
    ratios = [n / (weight(a) * base) for n, a in zip(norms, factors)]
    return max(ratios), ratios


def signal_dilation_constant(windows, s: float, grid: GridSpec, psgrid: PhaseSpaceGrid,
                             factors=DILATION_FACTORS) -> dict:
    """Smallest ``C`` with ``||D_a f|| <= C max{1,a} max{1,a^s} ||f||`` in
    ``M^{inf,1}_{0,s}`` over the windows and dilation factors."""
    params = MixedNormParams(math.inf, 1, 0.0, s)
    per = {}
    for w in windows:
        norms = [mixed_norm_signal(dilate_signal(w, a, grid), params, psgrid, check=False)
                 for a in factors]
        base = mixed_norm_signal(dilate_signal(w, 1.0, grid), params, psgrid, check=False)
        per[w.kind] = _fitted_constant(norms, base, factors,
                                       lambda a: signal_dilation_factor(a, s))[1]
    return {"constant": max(max(r) for r in per.values()), "ratios": per}


def symbol_dilation_constant(symbols: dict, s: float, ng: SymbolNormGrid,
                             factors=DILATION_FACTORS) -> dict:
    """Smallest ``C`` with ``||D_a F|| <= C max{1,a^-2} max{1,a^s} ||F||`` in
    ``M^1_{0,s}`` over the symbols and dilation factors."""
    params = MixedNormParams(1, 1, 0.0, s)
    per = {}
    for name, F in symbols.items():
        norms = [mixed_norm_symbol(dilate_symbol(F, a), params, ng) for a in factors]
        base = mixed_norm_symbol(F, params, ng)
        per[name] = _fitted_constant(norms, base, factors,
                                     lambda a: symbol_dilation_factor(a, s))[1]
    return {"constant": max(max(r) for r in per.values()), "ratios": per}


def dilation_experiment(signal_s=(0.5, 1.0, 2.0), symbol_s=(1.0,), factors=DILATION_FACTORS,
                        stability=2.0) -> dict:
    """Fitted dilation constants for signals and symbols at a coarse and a
    refined phase-space grid; PASS when every constant moves by less than
    the factor ``stability`` under refinement."""
    grid = GridSpec.centered(1024, 1 / 32)
    windows = [Window("gaussian"), tfcore.window_spec("hermite", n=2),
               tfcore.window_spec("raised_cosine"), tfcore.window_spec("matern", kappa=5.0)]
    psgrids = (PhaseSpaceGrid.centered(64, 128, 8.0, 16.0), PhaseSpaceGrid.centered(128, 256, 8.0, 16.0))
    sgrid = GridSpec.centered(512, 1 / 16)
    sps = PhaseSpaceGrid.centered(128, 128, 8.0, 8.0)
    phi = tfcore.make_window("gaussian", sgrid)
    h1 = tfcore.make_window("hermite", sgrid, n=1)
    h2 = tfcore.make_window("hermite", sgrid, n=2)
    symbols = {"W(phi)": tfcore.wigner(phi, phi, sps), "W(h1)": tfcore.wigner(h1, h1, sps),
               "W(phi,h2)": tfcore.wigner(phi, h2, sps)}
    ngs = (SymbolNormGrid(), SymbolNormGrid().refined())
    rows = []
    for s in signal_s:
        c = [signal_dilation_constant(windows, s, grid, ps, factors)["constant"] for ps in psgrids]
        rows.append({"kind": "signal", "s": s, "coarse": c[0], "fine": c[1]})
    for s in symbol_s:
        c = [symbol_dilation_constant(symbols, s, ng, factors)["constant"] for ng in ngs]
        rows.append({"kind": "symbol", "s": s, "coarse": c[0], "fine": c[1]})
    for r in rows:
        q = r["fine"] / r["coarse"]
        r["pass"] = bool(1 / stability <= q <= stability)
    return {"rows": rows, "factors": list(factors), "pass": all(r["pass"] for r in rows)}
