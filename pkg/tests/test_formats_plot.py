import json
import math
import re
from pathlib import Path

import numpy as np
import pytest

from gabor_spectra import formats, modspace, svgplot, tfcore
from gabor_spectra.deform import SweepResult, SweepRow
from gabor_spectra.gabor import AtomSet
from gabor_spectra.tfcore import GridSpec, PhaseSpaceGrid

DATA = Path(__file__).parent / "data"


def fixed_sweep():
    alphas = (0.8, 0.9, 0.95, 0.98, 0.99, 1.0, 1.02, 1.1)
    rows = [SweepRow(a, a, 0.5 * abs(1 - a), 2.0 + 0.25 * abs(1 - a) ** 0.5, "dense", 1024)
            for a in alphas]
    return SweepResult(rows, s_class=2.0)


def test_fmt_is_exact_and_stable():
    assert formats.fmt(0.1) == "0.1"
    assert float(formats.fmt(1 / 3)) == 1 / 3
    assert formats.fmt(np.float64(2.5)) == "2.5"
    assert formats.fmt(True) == "true"
    assert formats.fmt(np.int64(7)) == "7"
    assert formats.fmt(math.inf) == "inf"


def test_signal_round_trip(tmp_path):
    f = tfcore.make_window("hermite", GridSpec.centered(256, 1 / 16), n=1)
    f = f * (1 + 0.5j)
    formats.write_signal(tmp_path / "s.csv", f)
    g = formats.read_signal(tmp_path / "s.csv")
    assert np.array_equal(g.samples, f.samples)
    assert g.grid.num_samples == 256
    assert g.grid.dt == pytest.approx(1 / 16, rel=1e-12)


def test_signal_header_checked(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        formats.read_signal(p)


def test_psf_round_trip(tmp_path):
    ps = PhaseSpaceGrid.centered(8, 6, 2.0, 1.5)
    rng = np.random.default_rng(0)
    F = tfcore.PhaseSpaceFunction(ps, rng.normal(size=(8, 6)) + 1j * rng.normal(size=(8, 6)))
    formats.write_psf(tmp_path / "f.csv", F)
    G = formats.read_psf(tmp_path / "f.csv")
    assert np.array_equal(G.values, F.values)
    assert np.allclose(G.psgrid.x, ps.x) and np.allclose(G.psgrid.omega, ps.omega)


def test_atoms_round_trip(tmp_path):
    a = AtomSet.jittered(1.0, 0.2, 3, GridSpec.centered(256, 1 / 16))
    formats.write_atoms(tmp_path / "a.csv", a)
    b = formats.read_atoms(tmp_path / "a.csv", a.periodic_box)
    assert np.array_equal(a.points, b.points)


def test_json_cleans_numpy_and_nonfinite(tmp_path):
    formats.write_json(tmp_path / "r.json", {"b": np.float64(1.5), "a": [np.int32(2), np.bool_(True)],
                                            "c": math.nan})
    d = json.loads((tmp_path / "r.json").read_text())
    assert d == {"a": [2, True], "b": 1.5, "c": "nan"}


def test_sweep_csv(tmp_path):
    formats.write_sweep(tmp_path / "sweep.csv", fixed_sweep())
    rows = formats.read_csv(tmp_path / "sweep.csv")
    assert tuple(rows[0].keys()) == SweepResult.CSV_HEADER
    assert len(rows) == 8
    assert float(rows[1]["alpha"]) == 0.9


def test_golden_sweep_svg(tmp_path):
    out = svgplot.emit_plot(fixed_sweep(), tmp_path / "plot.svg")
    assert out.read_bytes() == (DATA / "golden_sweep.svg").read_bytes()


def test_two_point_sweep_draws_markers_and_one_line():
    res = SweepResult([SweepRow(0.9, 0.9, 0.1, 2.0, "dense", 0),
                       SweepRow(0.95, 0.95, 0.05, 2.0, "dense", 0),
                       SweepRow(1.0, 1.0, 0.0, 2.0, "dense", 0)])
    text = svgplot.render(svgplot.sweep_series(res), "t", "x", "y")
    # two data markers plus one legend marker; B has no increments
    assert text.count("<circle") == 3
    assert text.count("stroke-dasharray") == 1


def test_emit_plot_errors(tmp_path):
    with pytest.raises(ValueError):
        svgplot.emit_plot(SweepResult([SweepRow(1.0, 1.0, 0.0, 1.0, "dense", 0)]), tmp_path / "p.svg")
    flat = SweepResult([SweepRow(a, a, 1.0, 1.0, "dense", 0) for a in (0.9, 1.0)])
    with pytest.raises(ValueError):
        svgplot.emit_plot(flat, tmp_path / "p.svg")
    with pytest.raises(TypeError):
        svgplot.emit_plot([1, 2], tmp_path / "p.svg")
    with pytest.raises(ValueError):
        svgplot.render([], "t", "x", "y")


def test_tradeoff_plot_slopes_match_table(tmp_path):
    grid = GridSpec.centered(1024, 1 / 32)
    f = modspace.power_law_signal(grid, 2.25)
    table = modspace.tradeoff_table(f, 0, 1, 2, [0.5, 0.35, 0.25, 0.18], PhaseSpaceGrid.centered(),
                                    regions=("frequency_band",))
    text = svgplot.emit_plot(table, tmp_path / "plot.svg").read_text()
    shown = [float(m) for m in re.findall(r"slope (-?[0-9.]+)", text)]
    se, sg = table.slopes["frequency_band"]
    assert shown == [pytest.approx(se, abs=5e-4), pytest.approx(sg, abs=5e-4)]


def test_png_figure(tmp_path):
    from gabor_spectra import figures

    p = figures.sweep_png(fixed_sweep(), tmp_path / "plot.png")
    assert Path(p).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
