import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gabor_spectra import deform, gabor
from gabor_spectra.deform import SweepConfig, SweepResult, SweepRow
from gabor_spectra.gabor import AtomSet
from gabor_spectra.tfcore import GridSpec, Window

G512 = GridSpec.centered(512, 1 / 16)


def synthetic(fA, fB=None, alphas=None):
    alphas = alphas or [0.75 + 0.0001, 0.8, 0.85, 0.9, 0.95, 0.98, 0.99, 0.995, 0.999, 1.0, 1.01, 1.1]
    fB = fB or (lambda d: 0.0)
    rows = [SweepRow(a, a, 1.0 - fA(abs(1 - a)) if a != 1 else 1.0,
                     2.0 + fB(abs(1 - a)), "dense", 0) for a in alphas]
    return SweepResult(rows)


def test_gamma_values():
    assert deform.gamma(0.5) == pytest.approx(0.1)
    assert deform.gamma(1) == 0.5
    assert deform.gamma(2) == 1.0
    assert deform.gamma(3) == 1.0
    with pytest.raises(ValueError):
        deform.gamma(0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 5.0), st.floats(0.01, 5.0))
def test_gamma_monotone_and_bounded(s1, s2):
    lo, hi = sorted((s1, s2))
    assert 0 < deform.gamma(lo) <= deform.gamma(hi) <= 1


@settings(max_examples=50, deadline=None)
@given(st.floats(0.76, 1.99), st.sampled_from([0.5, 1.0, 2.0]))
def test_delta_alpha_consistency(alpha, s):
    delta = deform.delta_from_alpha(alpha)
    assert deform.alpha_from_delta(delta) == pytest.approx(alpha, rel=1e-12)
    # |delta| / |1 - alpha| = (1 + alpha) / alpha^2, largest (28/9) at alpha = 3/4
    c = (28 / 9) ** (s / 2)
    assert abs(delta) ** (s / 2) <= c * abs(1 - alpha) ** (s / 2) * (1 + 1e-12)
    if alpha >= 0.77:
        assert abs(delta) ** (s / 2) <= 3 * abs(1 - alpha) ** (s / 2) * (1 + 1e-12)


def test_snap_alpha():
    fr, a = deform.snap_alpha(0.9)
    assert fr.denominator <= deform.ZAK_MAX_DEN
    assert a == pytest.approx(math.sqrt(fr))
    assert abs(a - 0.9) <= 0.01
    assert deform.snap_alpha(1.0)[1] == 1.0


def test_adaptive_grid_keeps_sampling_density():
    g, a = deform.adaptive_grid(G512, 0.9)
    assert g.num_samples % 2 == 0
    assert g.period == pytest.approx(a * G512.period)
    assert 1 / g.dt == pytest.approx(a * (1 / G512.dt))
    assert abs(a - 0.9) <= 1 / G512.num_samples


@pytest.mark.parametrize("e", [1.0, 0.5, 0.25])
def test_holder_fit_exact_power_law(e):
    f = deform.holder_fit(synthetic(lambda d: 0.3 * d ** e), "A")
    assert f.exponent == pytest.approx(e, abs=1e-6)
    assert f.constant == pytest.approx(0.3, rel=1e-6)
    assert f.r2 == pytest.approx(1.0, abs=1e-12)


def test_holder_fit_branches_and_errors():
    res = synthetic(lambda d: d, alphas=[0.8, 0.9, 0.95, 0.99, 1.0, 1.01, 1.05, 1.1, 1.2])
    assert deform.holder_fit(res, "A", branch="left").n == 4
    assert deform.holder_fit(res, "A", branch="right").n == 4
    flat = synthetic(lambda d: 0.0)
    with pytest.raises(ValueError):
        deform.holder_fit(flat, "A")
    with pytest.raises(ValueError):
        deform.increments(flat, "C")
    with pytest.raises(ValueError):
        SweepResult([SweepRow(0.9, 0.9, 1, 2, "dense", 0)]).reference()


def test_bound_check_trivial_and_controls():
    zero = synthetic(lambda d: 0.0)
    assert deform.bound_check(zero, 2.0, g_norm_sq=1.0, rel=1)["pass"]
    lin = synthetic(lambda d: 0.2 * d, lambda d: 0.1 * d)
    assert deform.bound_check(lin, 2.0, g_norm_sq=1.0, rel=1)["pass"]
    ctrl = deform.bound_check(lin, 2.0, g_norm_sq=1.0, rel=1, exponent=2.0)
    assert not ctrl["pass"]
    assert ctrl["exponent_tested"] == 2.0
    with pytest.raises(ValueError):
        deform.bound_check(lin, 2.0)


def test_ratio_spread_one_sided():
    d = np.array([0.2, 0.1, 0.05, 0.01])
    assert deform.ratio_spread(d, np.array([1.0, 1.0, 1.0, 1.0])) == 1.0
    # ratios shrinking toward alpha = 1 never fail
    assert deform.ratio_spread(d, np.array([8.0, 4.0, 2.0, 0.1])) <= 1.0
    assert deform.ratio_spread(d, np.array([1.0, 1.0, 2.0, 50.0])) > deform.SPREAD_LIMIT


def test_sweep_config_validation():
    lat = AtomSet.lattice(1.0, G512)
    g = Window("gaussian")
    with pytest.raises(ValueError):
        SweepConfig(g, lat, (0.9, 0.95), G512)
    with pytest.raises(ValueError):
        SweepConfig(g, lat, (1.0, 0.9), G512)
    with pytest.raises(ValueError):
        SweepConfig(g, lat, (0.6, 1.0), G512)
    with pytest.raises(ValueError):
        SweepConfig(g, lat, (0.9, 1.0), G512, method="magic")
    with pytest.raises(ValueError):
        SweepConfig(g, AtomSet.lattice(1.0, half_x=3), (0.9, 1.0), G512)
    with pytest.raises(ValueError):
        SweepConfig(g, AtomSet.jittered(1.0, 0.1, 0, G512), (0.9, 1.0), G512, method="zak-snap")


@pytest.fixture(scope="module")
def gaussian_sweep():
    alphas = (0.85, 0.88, 0.91, 0.94, 0.97, 1.0)
    return deform.sweep(SweepConfig(Window("gaussian"), AtomSet.lattice(1.0, G512), alphas, G512))


def test_gaussian_sweep_lower_bound_shape(gaussian_sweep):
    A = gaussian_sweep.column("A")
    B = gaussian_sweep.column("B")
    assert np.all(A[:-1] > 0)
    assert np.all(np.diff(A[:-1]) < 0)
    assert A[-1] <= 1e-3 * B[-1]
    assert np.all(A <= B)
    assert gaussian_sweep.fits["exponent_A"] == pytest.approx(1.0, abs=0.15)


def test_dense_and_zak_routes_agree_on_snapped_alpha():
    _, a = deform.snap_alpha(0.9)
    lat = AtomSet.lattice(1.0, G512)
    zak = deform.sweep(SweepConfig(Window("gaussian"), lat, (a, 1.0), G512, "zak-snap", zak_res=32))
    dense_row = deform._dense_row(SweepConfig(Window("gaussian"), lat, (a, 1.0), G512), a)
    z = zak.rows[0]
    # the dense grid realises sqrt(L'/L), within 1/L of the snapped value
    assert abs(dense_row.alpha_used - z.alpha_used) <= 1 / 512
    assert dense_row.A == pytest.approx(z.A, rel=0.02)
    assert dense_row.B == pytest.approx(z.B, rel=0.01)


def test_sweep_parallel_matches_serial():
    alphas = (0.9, 0.95, 1.0)
    lat = AtomSet.lattice(1.0, G512)
    a = deform.sweep(SweepConfig(Window("gaussian"), lat, alphas, G512, threads=1))
    b = deform.sweep(SweepConfig(Window("gaussian"), lat, alphas, G512, threads=3))
    assert list(a.csv_rows()) == list(b.csv_rows())


def test_sweep_failure_reports_alpha(monkeypatch):
    def boom(*args, **kw):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(gabor, "frame_bounds", boom)
    cfg = SweepConfig(Window("gaussian"), AtomSet.lattice(1.0, G512), (0.9, 1.0), G512)
    with pytest.raises(RuntimeError, match="alpha=0.9"):
        deform.sweep(cfg)


def test_sweep_report_fields(gaussian_sweep):
    rep = deform.sweep_report(gaussian_sweep, 2.0, Window("gaussian"), AtomSet.lattice(1.0, G512))
    for key in ("exponent_A", "exponent_B", "constant", "r2", "pass", "fit_window"):
        assert key in rep
    assert rep["fit_window"] == list(deform.FIT_WINDOW)


def test_m1_norm_of_gaussian():
    assert deform.m1_norm_squared(Window("gaussian"), 0.0) == pytest.approx(4.0, rel=1e-4)
    assert deform.m1_norm_squared(Window("gaussian"), 1.0) > 4.0
