"""CSV and JSON readers/writers for the package's data types.

Floats are written with ``repr``, which round-trips exactly (up to 17
significant digits) and is byte-stable across runs.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .tfcore import GridSpec, PhaseSpaceFunction, PhaseSpaceGrid, SampledSignal


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def write_json(path, obj):
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


# signals -------------------------------------------------------------------

SIGNAL_HEADER = ("index", "t", "re", "im")


def write_signal(path, f: SampledSignal):
    t = f.grid.t
    write_csv(path, SIGNAL_HEADER,
              ((n, t[n], v.real, v.imag) for n, v in enumerate(f.samples)))


def read_signal(path) -> SampledSignal:
    rows = read_csv(path)
    if not rows or tuple(rows[0].keys()) != SIGNAL_HEADER:
        raise ValueError(f"{path}: expected header {','.join(SIGNAL_HEADER)}")
    t = np.array([float(r["t"]) for r in rows])
    vals = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    dt = (t[-1] - t[0]) / (len(t) - 1)
    return SampledSignal(GridSpec(len(t), dt, float(t[0])), vals)


# phase-space functions -----------------------------------------------------

PSF_HEADER = ("ix", "iw", "x", "omega", "re", "im")


def write_psf(path, F: PhaseSpaceFunction):
    ps = F.psgrid
    x, w = ps.x, ps.omega

    def rows():
        for i in range(ps.nx):
            for j in range(ps.nw):
                v = complex(F.values[i, j])
                yield i, j, x[i], w[j], v.real, v.imag

    write_csv(path, PSF_HEADER, rows())


def read_psf(path) -> PhaseSpaceFunction:
    rows = read_csv(path)
    ix = np.array([int(r["ix"]) for r in rows])
    iw = np.array([int(r["iw"]) for r in rows])
    nx, nw = ix.max() + 1, iw.max() + 1
    x = np.zeros(nx)
    w = np.zeros(nw)
    vals = np.zeros((nx, nw), dtype=complex)
    for r, i, j in zip(rows, ix, iw):
        x[i], w[j] = float(r["x"]), float(r["omega"])
        vals[i, j] = complex(float(r["re"]), float(r["im"]))
    dx = (x[-1] - x[0]) / (nx - 1) if nx > 1 else 1.0
    dw = (w[-1] - w[0]) / (nw - 1) if nw > 1 else 1.0
    return PhaseSpaceFunction(PhaseSpaceGrid(nx, nw, dx, dw, x[0], w[0]), vals)


# operators, atoms, tables --------------------------------------------------

def write_operator(path, T):
    from .weyl import to_csv_rows

    write_csv(path, ("row", "col", "re", "im"), to_csv_rows(T))


ATOM_HEADER = ("x", "omega")


def write_atoms(path, atoms):
    write_csv(path, ATOM_HEADER, ((p[0], p[1]) for p in atoms.points))


def read_atoms(path, periodic_box=None):
    from .gabor import AtomSet

    rows = read_csv(path)
    if rows and tuple(rows[0].keys()) != ATOM_HEADER:
        raise ValueError(f"{path}: expected header x,omega")
    pts = np.array([[float(r["x"]), float(r["omega"])] for r in rows]).reshape(-1, 2)
    return AtomSet(pts, periodic_box)


def write_sweep(path, result):
    write_csv(path, result.CSV_HEADER, result.csv_rows())


def write_tradeoff(path, table):
    write_csv(path, table.CSV_HEADER, table.csv_rows())
