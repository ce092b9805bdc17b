"""Weyl quantization of sampled symbols and spectral edges of Hermitian matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import linalg as sla

from .tfcore import GridError, GridSpec, PhaseSpaceFunction, PhaseSpaceGrid, symbol_grid

DENSE_LIMIT = 2048


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense matrix of an operator on sampled signals.

    ``entries`` act on sample vectors; ``dt`` is the quadrature weight of
    the underlying inner product, kept for bookkeeping only.
    """

    entries: np.ndarray
    dt: float = 1.0
    hermitian_defect: float = 0.0

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError("operator matrix must be square")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "hermitian_defect",
                           float(np.max(np.abs(e - e.conj().T), initial=0.0)))

    @classmethod
    def from_array(cls, a, dt=1.0):
        return cls(np.asarray(a, dtype=complex), dt)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.entries), initial=0.0))

    def is_hermitian(self, rtol=1e-8) -> bool:
        return self.hermitian_defect <= rtol * max(self.scale, 1e-300)

    def __sub__(self, other):
        return OperatorMatrix(self.entries - other.entries, self.dt)

    def __add__(self, other):
        return OperatorMatrix(self.entries + other.entries, self.dt)

    def __matmul__(self, v):
        return self.entries @ v


@dataclass(frozen=True)
class SpectralEdges:
    sigma_minus: float
    sigma_plus: float

    def __post_init__(self):
        if self.sigma_minus > self.sigma_plus:
            raise ValueError("sigma_minus exceeds sigma_plus")


def weyl_quantize(sigma: PhaseSpaceFunction, grid: GridSpec) -> OperatorMatrix:
    """Matrix of the Weyl operator with sampled symbol ``sigma``.

    ``sigma`` must be sampled on :func:`tfcore.symbol_grid` of ``grid``.
    The kernel ``K(y, x) = int sigma((x+y)/2, w) exp(2 pi i (y-x) w) dw`` is
    obtained by an FFT along the frequency axis and read off at the
    midpoint node and the wrapped lag; the matrix is ``K * dt``.
    """
    sg = symbol_grid(grid)
    ps = sigma.psgrid
    if (ps.nx, ps.nw) != (sg.nx, sg.nw) or not (
            np.isclose(ps.dx, sg.dx) and np.isclose(ps.dw, sg.dw)
            and np.isclose(ps.x0, sg.x0) and np.isclose(ps.w0, sg.w0)):
        raise GridError("symbol must be sampled on symbol_grid(grid)")
    L = grid.num_samples
    dt = grid.dt
    # khat[s, j] = sum_k sigma[s, k] exp(2 pi i w_k j dt) dw for j in [-L/2, L/2)
    j = np.arange(-L // 2, L // 2)
    inv = np.fft.ifft(sigma.values, axis=1) * L  # index j mod L, frequency k from 0
    base = np.exp(2j * np.pi * ps.w0 * j * dt)
    khat = inv[:, j % L] * base[None, :] * ps.dw

    n = np.arange(L)
    lag = (n[:, None] - n[None, :] + L // 2) % L - L // 2  # wrapped y - x in [-L/2, L/2)
    mid = (2 * n[None, :] + lag) % (2 * L)
    K = khat[mid, lag + L // 2]
    # antipodal pairs: average the two midpoint choices so real symbols stay Hermitian
    anti = lag == -L // 2
    if np.any(anti):
        mid2 = (2 * n[None, :] + L // 2) % (2 * L)
        alt = inv[:, (L // 2) % L] * np.exp(2j * np.pi * ps.w0 * (L // 2) * dt) * ps.dw
        K = np.where(anti, 0.5 * (K + alt[mid2]), K)
    return OperatorMatrix(K * dt, dt)


def _start_vector(n, seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def spectral_edges(T: OperatorMatrix, method="auto", rtol=1e-8) -> SpectralEdges:
    """Smallest and largest eigenvalue of a Hermitian operator matrix."""
    if not T.is_hermitian(rtol):
        raise NotHermitianError(
            f"hermitian defect {T.hermitian_defect:.2e} exceeds tolerance")
    A = 0.5 * (T.entries + T.entries.conj().T)
    if method == "auto":
        method = "dense" if T.dim <= DENSE_LIMIT else "lanczos"
    if method == "dense":
        ev = np.linalg.eigvalsh(A)
        return SpectralEdges(float(ev[0]), float(ev[-1]))
    if method != "lanczos":
        raise ValueError(f"unknown method {method!r}")
    # ARPACK implicitly restarted Lanczos, seeded start vector for reproducibility
    v0 = _start_vector(T.dim)
    lo = sla.eigsh(A, k=1, which="SA", v0=v0, tol=1e-12, return_eigenvectors=False)[0]
    hi = sla.eigsh(A, k=1, which="LA", v0=v0, tol=1e-12, return_eigenvectors=False)[0]
    return SpectralEdges(float(min(lo, hi)), float(max(lo, hi)))


def edge_diff(A1: OperatorMatrix, A2: OperatorMatrix) -> tuple[float, float]:
    """``(|s_-(A1) - s_-(A2)|, |s_+(A1) - s_+(A2)|)``."""
    e1, e2 = spectral_edges(A1), spectral_edges(A2)
    return abs(e1.sigma_minus - e2.sigma_minus), abs(e1.sigma_plus - e2.sigma_plus)


def operator_norm(T: OperatorMatrix, seed=0) -> float:
    """Largest singular value."""
    A = T.entries
    if not np.any(A):
        return 0.0
    if min(A.shape) <= 2:
        return float(np.linalg.norm(A, 2))
    v0 = _start_vector(A.shape[1], seed)
    return float(sla.svds(A, k=1, v0=v0, tol=1e-12, return_singular_vectors=False)[0])


def _spectral_derivative(values: np.ndarray, step: float, axis: int) -> np.ndarray:
    n = values.shape[axis]
    k = 2j * np.pi * np.fft.fftfreq(n, d=step)
    if n % 2 == 0:
        k[n // 2] = 0.0
    shape = [1, 1]
    shape[axis] = n
    return np.fft.ifft(np.fft.fft(values, axis=axis) * k.reshape(shape), axis=axis)


def radial_derivative(F: PhaseSpaceFunction) -> PhaseSpaceFunction:
    """``(x d/dx + w d/dw) F`` by spectral differentiation on the periodic grid."""
    ps = F.psgrid
    dx = _spectral_derivative(F.values, ps.dx, 0)
    dw = _spectral_derivative(F.values, ps.dw, 1)
    out = ps.x[:, None] * dx + ps.omega[None, :] * dw
    if np.isrealobj(F.values) or not np.any(F.values.imag):
        out = out.real
    return PhaseSpaceFunction(ps, out)


def to_csv_rows(T: OperatorMatrix):
    """Upper-triangle rows ``(row, col, re, im)`` for debugging exports."""
    iu = np.triu_indices(T.dim)
    for r, c in zip(*iu):
        v = T.entries[r, c]
        yield int(r), int(c), float(v.real), float(v.imag)


# --------------------------------------------------------------------------
# boundedness on the Sjostrand class
# --------------------------------------------------------------------------


def smooth_symbol_family(grid: GridSpec, n=10, seed=42, max_bumps=3):
    """Real symbols made of 1 to ``max_bumps`` modulated Gaussian bumps with
    random centres in ``[-3, 3]^2``, radii in ``[0.7, 2.5]`` and frequencies
    in ``[-1.5, 1.5]^2``."""
    sg = symbol_grid(grid)
    X, W = np.meshgrid(sg.x, sg.omega, indexing="ij")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        v = np.zeros_like(X)
        for _ in range(rng.integers(1, max_bumps + 1)):
            x0, w0 = rng.uniform(-3, 3, 2)
            r = rng.uniform(0.7, 2.5)
            u, nu = rng.uniform(-1.5, 1.5, 2)
            v += (rng.normal() * np.cos(2 * np.pi * (u * X + nu * W))
                  * np.exp(-np.pi * ((X - x0) ** 2 + (W - w0) ** 2) / r ** 2))
        out.append(PhaseSpaceFunction(sg, v))
    return out


def norm_bound_experiment(n=10, seed=42, grid: GridSpec | None = None, spread_limit=10.0) -> dict:
    """Ratios ``||sigma^w||_op / ||sigma||_{M^{inf,1}}`` over a random smooth
    family; PASS when max/min stays within ``spread_limit``."""
    from .modspace import MixedNormParams, mixed_norm_symbol

    grid = grid or GridSpec.centered(256, 1 / 16)
    params = MixedNormParams(math.inf, 1, 0.0, 0.0)
    ratios = []
    for F in smooth_symbol_family(grid, n, seed):
        ratios.append(operator_norm(weyl_quantize(F, grid)) / mixed_norm_symbol(F, params))
    spread = max(ratios) / min(ratios)
    return {"ratios": ratios, "constant": max(ratios), "spread": spread,
            "pass": bool(spread <= spread_limit)}
