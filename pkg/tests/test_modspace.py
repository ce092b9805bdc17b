import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gabor_spectra import checks, modspace, tfcore
from gabor_spectra.modspace import ApproxParams, MixedNormParams, SymbolNormGrid
from gabor_spectra.tfcore import GridSpec, PhaseSpaceFunction, PhaseSpaceGrid, Window

GRID = GridSpec.centered()
PS = PhaseSpaceGrid.centered()


@pytest.fixture(scope="module")
def phi():
    return tfcore.make_window("gaussian", GRID)


@pytest.fixture(scope="module")
def corpus():
    rng = np.random.default_rng(3)
    return [checks.random_signal(GRID, rng, atoms=4, spread=3.0) for _ in range(10)]


def test_params_validation():
    with pytest.raises(ValueError):
        MixedNormParams(3, 1)
    with pytest.raises(ValueError):
        ApproxParams(1, 0, 2, 0.5)
    with pytest.raises(ValueError):
        ApproxParams(0, 1, 2, 0.0)
    assert ApproxParams(0, 1, 2, 0.25).radius == 3.0


def test_l2_case_equals_signal_norm(corpus):
    for f in corpus[:3]:
        n = modspace.mixed_norm_signal(f, MixedNormParams(2, 2), PS)
        assert n == pytest.approx(f.norm(), rel=1e-5)


def test_zero_signal(phi):
    assert modspace.mixed_norm_signal(phi * 0.0, MixedNormParams(1, 1), PS) == 0.0


def test_gaussian_m1_norm(phi):
    # integral of exp(-pi (x^2 + w^2) / 2) over the plane
    assert modspace.mixed_norm_signal(phi, MixedNormParams(1, 1), PS) == pytest.approx(2.0, abs=1e-4)


def test_gaussian_sup_norm(phi):
    assert modspace.mixed_norm_signal(phi, MixedNormParams(math.inf, math.inf), PS) == \
        pytest.approx(1.0, abs=1e-10)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 10.0), st.sampled_from([(1, 1), (2, 2), (math.inf, 1)]))
def test_homogeneity(c, pq):
    f = tfcore.make_window("hermite", GRID, n=1)
    p = MixedNormParams(*pq, 0.5, 1.0)
    assert modspace.mixed_norm_signal(f * c, p, PS) == \
        pytest.approx(c * modspace.mixed_norm_signal(f, p, PS), rel=1e-12)


def test_weight_monotonicity(corpus):
    for f in corpus[:4]:
        prev = 0.0
        for s in (0.0, 0.5, 1.0, 2.0):
            n = modspace.mixed_norm_signal(f, MixedNormParams(1, 1, s, s), PS)
            assert n >= prev
            prev = n


def test_window_equivalence(corpus):
    ratios = {n: [] for n in (0, 1, 2)}
    for f in corpus:
        ref = modspace.mixed_norm_signal(f, MixedNormParams(1, 1), PS)
        for n in ratios:
            h = tfcore.make_window("hermite", GRID, n=n)
            ratios[n].append(modspace.mixed_norm_signal(f, MixedNormParams(1, 1), PS, window=h) / ref)
    for r in ratios.values():
        assert max(r) / min(r) <= 1.2 / 0.8


def test_coverage_error():
    f = tfcore.tf_shift(tfcore.make_window("gaussian", GRID), tfcore.TFPoint(0.0, 6.0))
    with pytest.raises(modspace.CoverageError):
        modspace.mixed_norm_signal(f, MixedNormParams(1, 1), PhaseSpaceGrid.centered(64, 64, 4, 4))


# symbol norms ---------------------------------------------------------------

SGRID = GridSpec.centered(512, 1 / 16)
SPS = PhaseSpaceGrid.centered(128, 128, 8.0, 8.0)


@pytest.fixture(scope="module")
def wphi():
    f = tfcore.make_window("gaussian", SGRID)
    return tfcore.wigner(f, f, SPS)


def test_symbol_norm_zero_and_homogeneous(wphi):
    p = MixedNormParams(1, 1)
    zero = PhaseSpaceFunction(SPS, np.zeros((SPS.nx, SPS.nw)))
    assert modspace.mixed_norm_symbol(zero, p) == 0.0
    assert modspace.mixed_norm_symbol(wphi * 2.0, p) == pytest.approx(
        2 * modspace.mixed_norm_symbol(wphi, p), rel=1e-12)


def test_symbol_norm_self_convergence(wphi):
    p = MixedNormParams(1, 1)
    coarse = modspace.mixed_norm_symbol(wphi, p, SymbolNormGrid(16, 16))
    fine = modspace.mixed_norm_symbol(wphi, p, SymbolNormGrid(32, 32))
    assert np.isfinite(coarse) and coarse > 0
    assert abs(coarse / fine - 1) <= 0.10


def test_symbol_norm_unsupported(wphi):
    with pytest.raises(ValueError):
        modspace.mixed_norm_symbol(wphi, MixedNormParams(2, 2))


# dilations ------------------------------------------------------------------

def test_dilate_identity_and_range(phi):
    assert modspace.dilate_signal(phi, 1.0) is phi
    with pytest.raises(ValueError):
        modspace.dilate_signal(phi, 5.0)
    with pytest.raises(ValueError):
        modspace.dilate_symbol(PhaseSpaceFunction(SPS, np.zeros((SPS.nx, SPS.nw))), 0.1)


def test_dilate_gaussian_norm():
    d = modspace.dilate_signal(Window("gaussian"), 2.0, GRID)
    assert d.norm() == pytest.approx(2 ** -0.5, abs=1e-8)


@pytest.mark.parametrize("a", [0.5, 0.8, 1.3, 2.0])
def test_sampled_dilation_matches_analytic(phi, a):
    exact = modspace.dilate_signal(Window("gaussian"), a, GRID)
    resampled = modspace.dilate_signal(phi, a)
    assert np.max(np.abs(exact.samples - resampled.samples)) <= 1e-8


def test_dilate_symbol_pointwise(wphi):
    a = math.sqrt(2)
    D = modspace.dilate_symbol(wphi, a)
    X, Om = np.meshgrid(SPS.x, SPS.omega, indexing="ij")
    assert np.max(np.abs(D.values - tfcore.gaussian_wigner(a * X, a * Om))) <= 1e-6


def test_dilation_estimates_hold_with_unit_constant():
    windows = [Window("gaussian"), tfcore.window_spec("hermite", n=2)]
    ps = PhaseSpaceGrid.centered(64, 128, 8.0, 16.0)
    out = modspace.signal_dilation_constant(windows, 1.0, GRID, ps)
    assert out["constant"] == pytest.approx(1.0, abs=1e-12)
    for r in out["ratios"].values():
        assert max(r) <= 1.0 + 1e-12


# truncation and tradeoff ----------------------------------------------------

def test_truncation_keeps_everything_for_small_eps(phi):
    h = modspace.truncate_approx(phi, ApproxParams(0, 1, 2, 1 / 9), PS)
    assert (h - phi).norm() <= 1e-6


def test_truncation_contracts_at_eps_one(phi):
    f = tfcore.make_window("hermite", GRID, n=2)
    for region in ("frequency_band", "phase_space_ball"):
        h = modspace.truncate_approx(f, ApproxParams(0, 1, 2, 1.0, region), PS)
        assert h.norm() <= f.norm()


def test_tradeoff_band_limited_errors_vanish(phi):
    table = modspace.tradeoff_table(phi, 0, 1, 2, [1 / 9, 1 / 10], PS, regions=("frequency_band",))
    assert all(r[2] <= 1e-6 for r in table.rows)
    assert [r[0] for r in table.rows] == [0.1, 1 / 9]


def test_tradeoff_validation(phi):
    with pytest.raises(ValueError):
        modspace.tradeoff_table(phi, 2, 1, 0, [0.5], PS)
    with pytest.raises(ValueError):
        modspace.tradeoff_table(phi, 0, 1, 2, [1.5], PS)


def test_power_law_signal_spectrum():
    grid = GridSpec(4096, 1 / 128, -16.0)
    f = modspace.power_law_signal(grid, 2.25)
    assert f.norm() == pytest.approx(1.0, abs=1e-12)
    assert abs(f.samples[np.argmin(abs(grid.t))]) == pytest.approx(np.max(np.abs(f.samples)))
    spec = np.abs(np.fft.fft(f.samples))
    xi = grid.freqs
    k1, k2 = np.argmin(abs(xi - 10)), np.argmin(abs(xi - 40))
    slope = math.log(spec[k2] / spec[k1]) / math.log(math.hypot(1, xi[k2]) / math.hypot(1, xi[k1]))
    assert slope == pytest.approx(-2.25, abs=1e-9)
