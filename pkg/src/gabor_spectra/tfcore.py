"""Time-frequency primitives on a periodic sampled model of L^2(R).

Signals live on a uniform grid ``t_n = t0 + n*dt`` (n = 0..L-1) that is
treated as one period of length ``P = L*dt``.  Inner products are the
Riemann sums ``<f, g> = sum f * conj(g) * dt``.  Translations by arbitrary
real amounts use a frequency-domain phase ramp (band-limited periodic
shift); modulations are pointwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

GAUSS_PEAK = 2.0 ** 0.25


class GridError(ValueError):
    """Two objects do not live on compatible grids."""


# --------------------------------------------------------------------------
# grids and containers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic sampling grid ``[t0, t0 + L*dt)``."""

    num_samples: int
    dt: float
    t0: float

    def __post_init__(self):
        if int(self.num_samples) != self.num_samples or self.num_samples < 2:
            raise ValueError("num_samples must be an integer >= 2")
        if self.num_samples % 2:
            raise ValueError("num_samples must be even")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        if not math.isfinite(self.t0):
            raise ValueError("t0 must be finite")
        if self.num_samples * self.dt < 8:
            raise ValueError("grid span L*dt must be at least 8")

    @classmethod
    def centered(cls, num_samples=1024, dt=1.0 / 32):
        return cls(num_samples, dt, -0.5 * num_samples * dt)

    @property
    def L(self) -> int:
        return self.num_samples

    @property
    def period(self) -> float:
        return self.num_samples * self.dt

    @property
    def nyquist(self) -> float:
        return 0.5 / self.dt

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.num_samples)

    @property
    def freqs(self) -> np.ndarray:
        """Signed DFT frequencies ``k/P`` in numpy FFT order."""
        return np.fft.fftfreq(self.num_samples, d=self.dt)

    @property
    def is_pow2(self) -> bool:
        n = self.num_samples
        return n & (n - 1) == 0


@dataclass(frozen=True, eq=False)
class SampledSignal:
    grid: GridSpec
    samples: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != (self.grid.num_samples,):
            raise GridError(
                f"expected {self.grid.num_samples} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.samples) ** 2)) * self.grid.dt)

    def inner(self, other: "SampledSignal") -> complex:
        _same_grid(self.grid, other.grid)
        return complex(np.sum(self.samples * np.conj(other.samples)) * self.grid.dt)

    def __add__(self, other):
        _same_grid(self.grid, other.grid)
        return SampledSignal(self.grid, self.samples + other.samples)

    def __sub__(self, other):
        _same_grid(self.grid, other.grid)
        return SampledSignal(self.grid, self.samples - other.samples)

    def __mul__(self, c):
        return SampledSignal(self.grid, self.samples * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class TFPoint:
    x: float
    omega: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.omega)):
            raise ValueError("TFPoint coordinates must be finite")


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Uniform grid ``x0 + i*dx`` (i < nx) by ``w0 + k*dw`` (k < nw)."""

    nx: int
    nw: int
    dx: float
    dw: float
    x0: float
    w0: float

    def __post_init__(self):
        if self.nx < 1 or self.nw < 1:
            raise ValueError("grid sizes must be positive")
        if not (self.dx > 0 and self.dw > 0):
            raise ValueError("grid steps must be positive")

    @classmethod
    def centered(cls, nx=256, nw=256, half_x=8.0, half_w=8.0):
        return cls(nx, nw, 2 * half_x / nx, 2 * half_w / nw, -half_x, -half_w)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.nx)

    @property
    def omega(self) -> np.ndarray:
        return self.w0 + self.dw * np.arange(self.nw)

    @property
    def cell(self) -> float:
        return self.dx * self.dw

    @property
    def area(self) -> float:
        return self.nx * self.nw * self.cell


@dataclass(frozen=True, eq=False)
class PhaseSpaceFunction:
    psgrid: PhaseSpaceGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.psgrid.nx, self.psgrid.nw):
            raise GridError(
                f"values shape {v.shape} does not match grid "
                f"({self.psgrid.nx}, {self.psgrid.nw})")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def l2_norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.values) ** 2)) * self.psgrid.cell)

    def __mul__(self, c):
        return PhaseSpaceFunction(self.psgrid, self.values * c)

    __rmul__ = __mul__


def _same_grid(a: GridSpec, b: GridSpec):
    if a != b:
        raise GridError(f"incompatible grids: {a} vs {b}")


def symbol_grid(grid: GridSpec) -> PhaseSpaceGrid:
    """Phase-space grid matched to ``grid`` for Weyl symbols.

    Positions sit on the half grid ``t0 + s*dt/2`` (2L nodes) and
    frequencies on ``k/P`` for ``k in [-L/2, L/2)`` so that every midpoint
    ``(t_n + t_n')/2`` is a node and the frequency axis spans one full
    period ``1/dt``.
    """
    L = grid.num_samples
    return PhaseSpaceGrid(2 * L, L, grid.dt / 2, 1.0 / grid.period,
                          grid.t0, -0.5 / grid.dt)


# --------------------------------------------------------------------------
# windows
# --------------------------------------------------------------------------


def _hermite(n, t):
    # orthonormal in L^2(R): e^{-pi t^2} H_n(sqrt(2 pi) t) scaled
    c = 2.0 ** 0.25 / math.sqrt(2.0 ** n * math.factorial(n))
    return c * special.eval_hermite(n, math.sqrt(2 * math.pi) * t) * np.exp(-math.pi * t * t)


def _raised_cosine(t, width):
    out = 0.5 * (1.0 + np.cos(2 * np.pi * t / width))
    return np.where(np.abs(t) < width / 2, out, 0.0)


def _matern(t, kappa):
    # |2 pi t|^nu K_nu(|2 pi t|), spectrum proportional to (1 + xi^2)^(-kappa/2)
    nu = (kappa - 1) / 2
    u = np.abs(2 * math.pi * np.asarray(t, dtype=float))
    with np.errstate(invalid="ignore", over="ignore"):
        out = np.where(u > 0, u ** nu * special.kv(nu, np.maximum(u, 1e-300)), 0.0)
    out = np.where(u > 700, 0.0, out)
    return np.where(u == 0, 2 ** (nu - 1) * special.gamma(nu), out)


def _matern_norm2(kappa):
    nu = (kappa - 1) / 2
    c = 2 ** (nu - 1) * special.gamma(nu + 0.5) / math.sqrt(math.pi)
    return c * c * math.sqrt(math.pi) * special.gamma(kappa - 0.5) / special.gamma(kappa)


_ANALYTIC = {
    "gaussian": lambda t: GAUSS_PEAK * np.exp(-math.pi * t * t),
    "raised_cosine": lambda t, width=2.0: _raised_cosine(t, width),
    "two_sided_exponential": lambda t, rate=math.pi: np.exp(-rate * np.abs(t)),
    "smoothed_exponential": lambda t, rate=math.pi: (1 + rate * np.abs(t)) * np.exp(-rate * np.abs(t)),
    "matern": _matern,
}

# squared L^2 norms of the unnormalized analytic forms
_NORM2 = {
    "gaussian": lambda: 1.0,
    "raised_cosine": lambda width=2.0: 3.0 * width / 8.0,
    "two_sided_exponential": lambda rate=math.pi: 1.0 / rate,
    "smoothed_exponential": lambda rate=math.pi: 5.0 / (2.0 * rate),
    "matern": _matern_norm2,
}

WINDOW_KINDS = ("gaussian", "hermite", "raised_cosine", "two_sided_exponential",
                "smoothed_exponential", "matern", "custom")


@dataclass(frozen=True)
class Window:
    """A window function that can be evaluated anywhere on R.

    Analytic kinds are normalized to unit continuous L^2 norm.  A
    ``custom`` window wraps a :class:`SampledSignal` and is evaluated
    through its trigonometric interpolant.
    """

    kind: str = "gaussian"
    params: tuple = ()
    samples: SampledSignal | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in WINDOW_KINDS:
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.kind == "hermite":
            if len(self.params) != 1 or int(self.params[0]) != self.params[0] or self.params[0] < 0:
                raise ValueError("hermite window needs one integer order n >= 0")
        if self.kind == "matern" and (len(self.params) != 1 or not self.params[0] > 1):
            raise ValueError("matern window needs one exponent kappa > 1")
        if self.kind == "custom" and self.samples is None:
            raise ValueError("custom window needs samples")

    @property
    def analytic(self) -> bool:
        return self.kind != "custom"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "hermite":
            return _hermite(int(self.params[0]), t)
        if self.kind == "custom":
            return interpolate(self.samples, t)
        raw = _ANALYTIC[self.kind](t, *self.params)
        return raw / math.sqrt(_NORM2[self.kind](*self.params))

    def sample(self, grid: GridSpec, normalize=True) -> SampledSignal:
        """Samples of the window, periodized over the grid box."""
        if self.kind == "custom":
            if self.samples.grid == grid:
                vals = self.samples.samples
            else:
                vals = self(grid.t)
        else:
            t = grid.t
            P = grid.period
            vals = np.zeros(grid.num_samples, dtype=complex)
            # nearest image plus its neighbours; windows decay well inside P/2
            c = t - P * np.round(t / P)
            for k in (-1, 0, 1):
                vals += self(c + k * P)
        f = SampledSignal(grid, vals)
        if normalize:
            n = f.norm()
            if n == 0:
                raise ValueError("window vanishes on this grid")
            f = f * (1.0 / n)
        return f

    def describe(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}


def make_window(kind="gaussian", grid: GridSpec | None = None, *, n=None,
                width=None, rate=None, kappa=None, samples=None) -> SampledSignal:
    """Unit-norm window samples on ``grid`` (discrete inner product).

    ``kind`` is one of ``gaussian``, ``hermite`` (needs ``n``),
    ``raised_cosine`` (``width``, default 2), ``two_sided_exponential`` and
    ``smoothed_exponential`` (``rate``, default pi), ``matern`` (``kappa``,
    default 2.25) or ``custom``
    (``samples``: array of length L).
    """
    if grid is None:
        grid = GridSpec.centered()
    if kind == "custom":
        arr = np.asarray(samples, dtype=complex)
        if arr.shape != (grid.num_samples,):
            raise GridError("custom samples have the wrong length")
        f = SampledSignal(grid, arr)
        return f * (1.0 / f.norm())
    return window_spec(kind, n=n, width=width, rate=rate, kappa=kappa).sample(grid)


def window_spec(kind="gaussian", *, n=None, width=None, rate=None, kappa=None) -> Window:
    if kind == "hermite":
        if n is None or n < 0:
            raise ValueError("hermite window needs n >= 0")
        return Window("hermite", (int(n),))
    if kind == "raised_cosine":
        return Window(kind, () if width is None else (float(width),))
    if kind in ("two_sided_exponential", "smoothed_exponential"):
        return Window(kind, () if rate is None else (float(rate),))
    if kind == "matern":
        return Window(kind, (2.25 if kappa is None else float(kappa),))
    if kind == "gaussian":
        return Window("gaussian")
    raise ValueError(f"unknown window kind {kind!r}")


# --------------------------------------------------------------------------
# interpolation, shifts
# --------------------------------------------------------------------------


def _spectrum(f: SampledSignal) -> np.ndarray:
    return np.fft.fft(f.samples)


def _interp_matrix(grid: GridSpec, t) -> np.ndarray:
    """Rows evaluate the trigonometric interpolant of grid samples at ``t``."""
    L = grid.num_samples
    k = np.fft.fftfreq(L, d=1.0 / L)  # integer frequencies
    t = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
    u = (t - grid.t0) / grid.period
    ph = np.exp(2j * np.pi * np.outer(u, k))
    # Nyquist bin split symmetrically so real data interpolate to real values
    ph[:, L // 2] = np.cos(np.pi * L * u)
    dft = np.exp(-2j * np.pi * np.outer(k, np.arange(L)) / L) / L
    return ph @ dft


def interpolate(f: SampledSignal, t) -> np.ndarray:
    """Band-limited periodic interpolation of ``f`` at arbitrary times."""
    t = np.asarray(t, dtype=float)
    L = f.grid.num_samples
    c = _spectrum(f) / L
    k = np.fft.fftfreq(L, d=1.0 / L)
    u = ((t.ravel() - f.grid.t0) / f.grid.period)
    out = np.empty(u.size, dtype=complex)
    # chunk to bound memory
    step = max(1, 2 ** 22 // L)
    nyq = L // 2
    for i in range(0, u.size, step):
        uu = u[i:i + step]
        ph = np.exp(2j * np.pi * np.outer(uu, k))
        ph[:, nyq] = np.cos(np.pi * L * uu)
        out[i:i + step] = ph @ c
    return out.reshape(t.shape)


def shift_phases(grid: GridSpec, xs) -> np.ndarray:
    """Phase ramps ``exp(-2 pi i nu x)`` (rows) for band-limited translation."""
    nu = grid.freqs
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ph = np.exp(-2j * np.pi * np.outer(xs, nu))
    # Nyquist bin: keep the translation real-preserving
    nyq = grid.num_samples // 2
    ph[:, nyq] = np.cos(np.pi * xs / grid.dt)
    return ph


def translate(f: SampledSignal, x: float) -> SampledSignal:
    """Periodic band-limited translation ``f(t - x)``."""
    k = x / f.grid.dt
    if k == round(k):
        return SampledSignal(f.grid, np.roll(f.samples, int(round(k))))
    ph = shift_phases(f.grid, [x])[0]
    return SampledSignal(f.grid, np.fft.ifft(_spectrum(f) * ph))


def modulate(f: SampledSignal, omega: float) -> SampledSignal:
    if omega == 0:
        return f
    return SampledSignal(f.grid, f.samples * np.exp(2j * np.pi * omega * f.grid.t))


def tf_shift(f: SampledSignal, z: TFPoint) -> SampledSignal:
    """``pi(z) f = M_omega T_x f``; unitary on the periodic model."""
    return modulate(translate(f, z.x), z.omega)


def atoms(g: SampledSignal, points) -> np.ndarray:
    """Matrix whose rows are the time-frequency shifted windows ``pi(lambda) g``.

    Modulation uses the representative of ``t_n`` nearest to the atom
    center, i.e. the atoms are samples of the time-periodized continuous
    atoms.  This differs from :func:`tf_shift` only where ``g`` is
    negligible, and keeps atoms smooth across the box seam for
    frequencies that are not multiples of ``1/P``.
    """
    grid = g.grid
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return np.zeros((0, grid.num_samples), dtype=complex)
    ph = shift_phases(grid, pts[:, 0])
    rows = np.fft.ifft(_spectrum(g)[None, :] * ph, axis=1)
    P = grid.period
    d = grid.t[None, :] - pts[:, :1]
    tau = pts[:, :1] + (d - P * np.round(d / P))
    rows *= np.exp(2j * np.pi * pts[:, 1:2] * tau)
    return rows


# --------------------------------------------------------------------------
# STFT
# --------------------------------------------------------------------------


def _freq_matrix(grid: GridSpec, omegas, sign=-1) -> np.ndarray:
    """``E[n, k] = exp(sign * 2 pi i omega_k t_n)``."""
    return np.exp(sign * 2j * np.pi * np.outer(grid.t, omegas))


def stft_at(f: SampledSignal, g: SampledSignal, xs, omegas) -> np.ndarray:
    """``V_g f(x_m, omega_k) = <f, pi(x_m, omega_k) g>`` on a product set."""
    _same_grid(f.grid, g.grid)
    grid = f.grid
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    shifted = np.fft.ifft(_spectrum(g)[None, :] * shift_phases(grid, xs), axis=1)
    prod = f.samples[None, :] * np.conj(shifted)
    return (prod @ _freq_matrix(grid, omegas)) * grid.dt


def stft(f: SampledSignal, g: SampledSignal, psgrid: PhaseSpaceGrid) -> PhaseSpaceFunction:
    """Short-time Fourier transform sampled on ``psgrid``."""
    return PhaseSpaceFunction(psgrid, stft_at(f, g, psgrid.x, psgrid.omega))


def synthesis_residual(g: SampledSignal, psgrid: PhaseSpaceGrid) -> float:
    """Estimate of the reconstruction defect of :func:`istft` for window ``g``.

    Combines the partition-of-unity defect ``|sum_x |g(t-x)|^2 dx - |g|^2|``
    on the part of the box covered by ``psgrid`` and the frequency
    aliasing of the Riemann sum in omega (window products must fit in a
    period ``1/dw``).
    """
    grid = g.grid
    shifted = np.fft.ifft(_spectrum(g)[None, :] * shift_phases(grid, psgrid.x), axis=1)
    pou = np.sum(np.abs(shifted) ** 2, axis=0) * psgrid.dx
    t = grid.t
    margin = min(4.0, (psgrid.x[-1] - psgrid.x[0]) / 4)
    inside = (t >= psgrid.x[0] + margin) & (t <= psgrid.x[-1] - margin)
    g2 = g.norm() ** 2
    pou_defect = float(np.max(np.abs(pou[inside] - g2))) if inside.any() else float("inf")
    # energy of |g|^2 outside a window of length 1/dw around its centre
    span = 1.0 / psgrid.dw
    w = np.abs(g.samples) ** 2
    centre = t[np.argmax(w)]
    d = t - centre
    d = d - grid.period * np.round(d / grid.period)
    alias = float(np.sum(w[np.abs(d) >= span / 2]) * grid.dt / max(g2, 1e-300))
    return pou_defect + alias


def istft(F: PhaseSpaceFunction, g: SampledSignal, *, tol=1e-4) -> SampledSignal:
    """Riemann-sum synthesis ``sum F(z) pi(z) g dx dw``.

    The output carries ``info['synthesis_residual']``; a warning is issued
    when it exceeds ``tol``.
    """
    grid = g.grid
    ps = F.psgrid
    residual = synthesis_residual(g, ps)
    if residual > tol:
        warnings.warn(f"phase-space grid too coarse or small for synthesis: "
                      f"residual estimate {residual:.2e}", RuntimeWarning, stacklevel=2)
    if not np.any(F.values):
        return SampledSignal(grid, np.zeros(grid.num_samples),
                             {"synthesis_residual": residual})
    shifted = np.fft.ifft(_spectrum(g)[None, :] * shift_phases(grid, ps.x), axis=1)
    # (nx, nw) @ (nw, L): sum over omega of F * exp(2 pi i omega t)
    mod = F.values @ _freq_matrix(grid, ps.omega, sign=+1).T
    out = np.sum(mod * shifted, axis=0) * ps.cell
    return SampledSignal(grid, out, {"synthesis_residual": residual})


# --------------------------------------------------------------------------
# Wigner distribution
# --------------------------------------------------------------------------


def upsample2(f: SampledSignal) -> np.ndarray:
    """Values of ``f`` on the half grid ``t0 + s*dt/2``, s < 2L."""
    L = f.grid.num_samples
    c = _spectrum(f)
    pad = np.zeros(2 * L, dtype=complex)
    h = L // 2
    pad[:h] = c[:h]
    pad[-h:] = c[-h:]
    # split the Nyquist bin between +/- frequencies
    pad[h] = 0.5 * c[h]
    pad[-h] = 0.5 * c[h]
    return np.fft.ifft(pad) * 2


def _half_grid_index(grid: GridSpec, xs) -> np.ndarray:
    s = (np.asarray(xs, dtype=float) - grid.t0) / (grid.dt / 2)
    si = np.round(s)
    if np.max(np.abs(s - si), initial=0.0) > 1e-6:
        raise GridError("Wigner positions must lie on the half grid of dt")
    return si.astype(np.int64) % (2 * grid.num_samples)


def wigner_lag_products(f: SampledSignal, g: SampledSignal, xs) -> np.ndarray:
    """``f(x + j dt/2) conj g(x - j dt/2)`` for lags j in [-L/2, L/2)."""
    _same_grid(f.grid, g.grid)
    L = f.grid.num_samples
    fu = upsample2(f)
    gu = upsample2(g) if g is not f else fu
    s = _half_grid_index(f.grid, xs)
    j = np.arange(-L // 2, L // 2)
    return fu[(s[:, None] + j[None, :]) % (2 * L)] * np.conj(gu[(s[:, None] - j[None, :]) % (2 * L)])


def wigner(f: SampledSignal, g: SampledSignal, psgrid: PhaseSpaceGrid) -> PhaseSpaceFunction:
    """Cross-Wigner distribution ``W(f, g)`` on ``psgrid``.

    Positions must be half-grid nodes.  The lag integral runs over
    ``|t| < P/2`` with step dt using the band-limited half-grid values of
    both signals; when the frequency nodes are ``k/P`` the transform is an
    FFT, otherwise a direct sum.
    """
    grid = f.grid
    L = grid.num_samples
    prod = wigner_lag_products(f, g, psgrid.x)
    j = np.arange(-L // 2, L // 2)
    k0 = psgrid.w0 * grid.period
    fast = (abs(psgrid.dw * grid.period - 1) < 1e-12 and abs(k0 - round(k0)) < 1e-9
            and psgrid.nw <= L)
    if fast:
        # sum_j p_j e^{-2 pi i (k0+k) j/L}; reorder lags to FFT order
        spec = np.fft.fft(np.fft.ifftshift(prod, axes=1), axis=1)
        k = (int(round(k0)) + np.arange(psgrid.nw)) % L
        vals = spec[:, k] * grid.dt
    else:
        E = np.exp(-2j * np.pi * np.outer(j * grid.dt, psgrid.omega))
        vals = prod @ E * grid.dt
    return PhaseSpaceFunction(psgrid, vals)


def gaussian_wigner(x, omega):
    """Closed form ``W(phi)(x, omega) = 2 exp(-2 pi (x^2 + omega^2))``."""
    return 2.0 * np.exp(-2 * np.pi * (np.asarray(x) ** 2 + np.asarray(omega) ** 2))
