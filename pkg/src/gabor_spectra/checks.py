"""Numerical identity checks shared by ``gabor-spectra verify`` and the test suite.

Each check returns a plain dict with the measured value, the tolerance
it is held to and a ``pass`` flag.
"""

from __future__ import annotations

import math

import numpy as np

from . import gabor, tfcore, weyl
from .tfcore import GridSpec, PhaseSpaceGrid, SampledSignal, TFPoint


def _result(name, value, tol, ok=None, **extra):
    ok = (value <= tol) if ok is None else ok
    return {"check": name, "value": float(value), "tolerance": float(tol), "pass": bool(ok), **extra}


def random_signal(grid: GridSpec, rng, atoms=6, spread=4.0) -> SampledSignal:
    """Sum of Gaussian atoms with random complex amplitudes and centres in
    ``[-spread, spread]^2``; numerically band-limited and time-limited."""
    phi = tfcore.make_window("gaussian", grid)
    out = np.zeros(grid.num_samples, dtype=complex)
    for _ in range(atoms):
        x, w = rng.uniform(-spread, spread, size=2)
        c = rng.normal() + 1j * rng.normal()
        out += c * tfcore.tf_shift(phi, TFPoint(x, w)).samples
    f = SampledSignal(grid, out)
    return f * (1.0 / f.norm())


def isometry(n=20, seed=42, grid=None, psgrid=None):
    grid = grid or GridSpec.centered()
    psgrid = psgrid or PhaseSpaceGrid.centered()
    rng = np.random.default_rng(seed)
    phi = tfcore.make_window("gaussian", grid)
    worst = 0.0
    for _ in range(n):
        f = random_signal(grid, rng)
        V = tfcore.stft(f, phi, psgrid)
        worst = max(worst, abs(V.l2_norm() / f.norm() - 1.0))
    return _result("stft_isometry", worst, 1e-6, n_signals=n)


def covariance(seed=42, grid=None):
    grid = grid or GridSpec.centered()
    rng = np.random.default_rng(seed)
    phi = tfcore.make_window("gaussian", grid)
    f = random_signal(grid, rng, spread=2.0)
    z1s = [TFPoint(float(x), float(w)) for x, w in rng.uniform(-2, 2, size=(5, 2))]
    z2s = rng.uniform(-3, 3, size=(5, 2))
    worst = 0.0
    for z1 in z1s:
        shifted = tfcore.tf_shift(f, z1)
        for x2, w2 in z2s:
            lhs = abs(tfcore.stft_at(shifted, phi, [x2], [w2])[0, 0])
            rhs = abs(tfcore.stft_at(f, phi, [x2 - z1.x], [w2 - z1.omega])[0, 0])
            worst = max(worst, abs(lhs - rhs))
    return _result("stft_covariance", worst, 1e-8, design="5x5")


def inversion(n=5, seed=42, grid=None, psgrid=None):
    grid = grid or GridSpec.centered()
    psgrid = psgrid or PhaseSpaceGrid.centered()
    rng = np.random.default_rng(seed)
    phi = tfcore.make_window("gaussian", grid)
    worst = 0.0
    for _ in range(n):
        f = random_signal(grid, rng)
        back = tfcore.istft(tfcore.stft(f, phi, psgrid), phi)
        worst = max(worst, (back - f).norm() / f.norm())
    return _result("stft_inversion", worst, 1e-4, n_signals=n)


def random_hermitian(rng, n):
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (M + M.conj().T)


def edge_perturbation(pairs=1000, dim=64, seed=42):
    """Count violations of ``|sigma(A1) - sigma(A2)| <= ||A1 - A2||`` at both edges."""
    rng = np.random.default_rng(seed)
    violations = 0
    worst = -math.inf
    for k in range(pairs):
        A1 = random_hermitian(rng, dim)
        # mix of small and large perturbations
        scale = 10.0 ** rng.uniform(-6, 1)
        A2 = A1 + scale * random_hermitian(rng, dim)
        dm, dp = weyl.edge_diff(weyl.OperatorMatrix(A1), weyl.OperatorMatrix(A2))
        bound = np.linalg.norm(A1 - A2, 2)
        slack = 1e-10 * max(bound, np.linalg.norm(A1, 2))
        excess = max(dm, dp) - bound
        worst = max(worst, excess / max(bound, 1e-300))
        if excess > slack:
            violations += 1
    return _result("spectral_edge_perturbation", violations, 0, pairs=pairs, dim=dim,
                   worst_relative_excess=worst)


def cross_route_sets(seed=42):
    return {
        "lattice": gabor.AtomSet.lattice(1.0, half_x=4),
        "jittered": gabor.AtomSet.jittered(1.0, 0.2, seed=seed, half_x=4),
        "random": gabor.AtomSet.random_separated(40, 0.9, half=4.0, seed=seed),
    }


CROSS_ROUTE_GRIDS = {512: 1 / 16, 1024: 1 / 32}
CROSS_ROUTE_FLOOR = 1e-10


def cross_route(seed=42, sizes=(512, 1024)):
    """Relative operator-norm gap between the dense frame operator and the
    Weyl quantization of its symbol, for three node sets and two grids."""
    sets = cross_route_sets(seed)
    errs = {}
    for L in sizes:
        grid = GridSpec.centered(L, CROSS_ROUTE_GRIDS.get(L, 32.0 / L))
        g = tfcore.make_window("gaussian", grid)
        for name, lam in sets.items():
            S = gabor.frame_operator(g, g, lam, grid)
            Sw = weyl.weyl_quantize(gabor.frame_symbol(g, g, lam, 0.0, grid), grid)
            errs[f"{name}@{L}"] = weyl.operator_norm(S - Sw) / weyl.operator_norm(S)
    coarse, fine = sizes[0], sizes[-1]
    ok = True
    for name in sets:
        e0, e1 = errs[f"{name}@{coarse}"], errs[f"{name}@{fine}"]
        # halving, measured against a floor once both sit at rounding level
        ok &= e0 <= 1e-2 and e1 <= max(e0 / 2, CROSS_ROUTE_FLOOR)
    return _result("cross_route_identity", max(errs.values()), 1e-2, ok, errors=errs,
                   halving_floor=CROSS_ROUTE_FLOOR)


def wigner_identities(grid=None):
    grid = grid or GridSpec.centered(256, 1 / 16)
    phi = tfcore.make_window("gaussian", grid)
    h1 = tfcore.make_window("hermite", grid, n=1)
    sg = tfcore.symbol_grid(grid)
    W = tfcore.wigner(phi, phi, sg)
    W12 = tfcore.wigner(phi, h1, sg)
    imag = float(np.max(np.abs(W.values.imag)) / np.max(np.abs(W.values.real)))
    moyal = abs(W12.l2_norm() - phi.norm() * h1.norm())
    mass = abs(float(np.sum(W.values.real)) * sg.cell - 1.0)
    ok = imag <= 1e-10 and moyal <= 1e-5 and mass <= 1e-6
    return _result("wigner_identities", max(imag, moyal, mass), 1e-6, ok,
                   imag_ratio=imag, moyal_error=moyal, mass_error=mass)


def run_all(seed=42):
    return [isometry(seed=seed), covariance(seed=seed), inversion(seed=seed),
            edge_perturbation(seed=seed), wigner_identities(), cross_route(seed=seed)]
