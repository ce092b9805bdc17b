import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gabor_spectra import checks, tfcore, weyl
from gabor_spectra.tfcore import GridError, GridSpec, PhaseSpaceFunction, PhaseSpaceGrid
from gabor_spectra.weyl import OperatorMatrix

GRID = GridSpec.centered(256, 1 / 16)
SG = tfcore.symbol_grid(GRID)
X, OM = np.meshgrid(SG.x, SG.omega, indexing="ij")


def sym(values):
    return PhaseSpaceFunction(SG, values)


def test_constant_symbol_is_identity():
    T = weyl.weyl_quantize(sym(np.ones_like(X)), GRID)
    assert weyl.operator_norm(T - OperatorMatrix(np.eye(GRID.num_samples))) <= 1e-6


def test_gaussian_wigner_quantizes_to_projector():
    phi = tfcore.make_window("gaussian", GRID)
    T = weyl.weyl_quantize(tfcore.wigner(phi, phi, SG), GRID)
    ev = np.linalg.eigvalsh(T.entries)
    assert ev[-1] == pytest.approx(1.0, abs=1e-3)
    assert abs(ev[-2]) <= 1e-3
    # compare with the outer-product oracle
    P = np.outer(phi.samples, phi.samples.conj()) * GRID.dt
    assert np.max(np.abs(T.entries - P)) <= 1e-10


def test_position_symbol_is_multiplication():
    bump = np.exp(-(X / 6.0) ** 8)
    T = weyl.weyl_quantize(sym(X * bump), GRID)
    t = GRID.t
    inside = np.abs(t) <= 4
    target = np.diag(t * np.exp(-(t / 6.0) ** 8))
    assert np.max(np.abs(T.entries - target)[inside][:, inside]) <= 1e-4


def test_cross_wigner_quantizes_to_rank_one():
    phi = tfcore.make_window("gaussian", GRID)
    h1 = tfcore.make_window("hermite", GRID, n=1)
    T = weyl.weyl_quantize(tfcore.wigner(h1, phi, SG), GRID)
    P = np.outer(h1.samples, phi.samples.conj()) * GRID.dt
    assert np.max(np.abs(T.entries - P)) <= 1e-10


def test_real_symbols_give_hermitian_matrices():
    for F in weyl.smooth_symbol_family(GRID, n=3, seed=1):
        T = weyl.weyl_quantize(F, GRID)
        assert T.is_hermitian()


def test_quantize_rejects_wrong_grid():
    with pytest.raises(GridError):
        weyl.weyl_quantize(PhaseSpaceFunction(PhaseSpaceGrid.centered(8, 8), np.ones((8, 8))), GRID)


def test_edges_diagonal_and_projector():
    e = weyl.spectral_edges(OperatorMatrix(np.diag([1.0, 2.0, 3.0])))
    assert (e.sigma_minus, e.sigma_plus) == (1.0, 3.0)
    phi = tfcore.make_window("gaussian", GRID)
    e = weyl.spectral_edges(OperatorMatrix(np.outer(phi.samples, phi.samples.conj()) * GRID.dt))
    assert abs(e.sigma_minus) <= 1e-6
    assert e.sigma_plus == pytest.approx(1.0, abs=1e-6)


def test_edges_reject_non_hermitian():
    with pytest.raises(weyl.NotHermitianError):
        weyl.spectral_edges(OperatorMatrix(np.array([[0.0, 1.0], [0.0, 0.0]])))


def test_lanczos_matches_dense():
    rng = np.random.default_rng(5)
    A = checks.random_hermitian(rng, 300)
    T = OperatorMatrix(A)
    d = weyl.spectral_edges(T, "dense")
    lz = weyl.spectral_edges(T, "lanczos")
    scale = np.linalg.norm(A, 2)
    assert abs(d.sigma_minus - lz.sigma_minus) <= 1e-8 * scale
    assert abs(d.sigma_plus - lz.sigma_plus) <= 1e-8 * scale


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(1e-6, 10.0))
def test_edge_perturbation_property(seed, scale):
    rng = np.random.default_rng(seed)
    A1 = checks.random_hermitian(rng, 24)
    A2 = A1 + scale * checks.random_hermitian(rng, 24)
    dm, dp = weyl.edge_diff(OperatorMatrix(A1), OperatorMatrix(A2))
    bound = np.linalg.norm(A1 - A2, 2)
    assert max(dm, dp) <= bound * (1 + 1e-10) + 1e-12


def test_operator_norm_basics():
    assert weyl.operator_norm(OperatorMatrix(np.eye(5))) == pytest.approx(1.0)
    assert weyl.operator_norm(OperatorMatrix(np.zeros((5, 5)))) == 0.0
    rng = np.random.default_rng(1)
    A = rng.normal(size=(40, 40)) + 1j * rng.normal(size=(40, 40))
    assert weyl.operator_norm(OperatorMatrix(A)) == pytest.approx(np.linalg.norm(A, 2), rel=1e-8)


def test_radial_derivative_constant_and_gaussian():
    ps = PhaseSpaceGrid.centered(128, 128, 6.0, 6.0)
    x, w = np.meshgrid(ps.x, ps.omega, indexing="ij")
    assert np.max(np.abs(weyl.radial_derivative(PhaseSpaceFunction(ps, np.ones_like(x))).values)) <= 1e-12
    r2 = x * x + w * w
    out = weyl.radial_derivative(PhaseSpaceFunction(ps, np.exp(-math.pi * r2)))
    assert np.max(np.abs(out.values - (-2 * math.pi * r2 * np.exp(-math.pi * r2)))) <= 1e-6


def test_radial_derivative_finite_differences():
    phi = tfcore.make_window("gaussian", GRID)
    W = tfcore.wigner(phi, phi, SG)
    out = weyl.radial_derivative(W).values.real
    h = 1e-4
    pts = [(0.3, -0.2), (0.5, 0.5), (-0.7, 0.1)]
    for x, w in pts:
        i = np.argmin(abs(SG.x - x))
        k = np.argmin(abs(SG.omega - w))
        xn, wn = SG.x[i], SG.omega[k]
        # d/dh F((1+h) z) at h = 0 is the radial derivative
        fd = (tfcore.gaussian_wigner((1 + h) * xn, (1 + h) * wn)
              - tfcore.gaussian_wigner((1 - h) * xn, (1 - h) * wn)) / (2 * h)
        assert out[i, k] == pytest.approx(fd, abs=1e-5)


def test_csv_rows_cover_upper_triangle():
    rows = list(weyl.to_csv_rows(OperatorMatrix(np.arange(9.0).reshape(3, 3))))
    assert len(rows) == 6
    assert rows[1] == (0, 1, 1.0, 0.0)


def test_norm_bound_family_small():
    out = weyl.norm_bound_experiment(n=4, seed=3)
    assert all(r > 0 for r in out["ratios"])
    assert out["spread"] >= 1.0
