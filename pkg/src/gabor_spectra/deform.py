"""Dilation sweeps ``alpha -> A(alpha L), B(alpha L)`` and Hölder-exponent checks."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import gabor, modspace, tfcore
from .gabor import AtomSet, FrameBounds
from .tfcore import GridSpec, PhaseSpaceGrid, Window

FIT_WINDOW = (1e-3, 0.25)
ZAK_MAX_DEN = 64
SPREAD_LIMIT = 5.0
ALPHA_RANGE = (0.75, 2.0)


def gamma(s: float) -> float:
    """Hölder exponent of the frame bounds for windows in ``M^1_s``."""
    if not s > 0:
        raise ValueError("s must be positive")
    if s < 1:
        return s / (2 * (4 - 3 * s))
    if s <= 2:
        return s / 2
    return 1.0


def delta_from_alpha(alpha):
    return np.asarray(alpha, float) ** -2 - 1.0


def alpha_from_delta(delta):
    return (1.0 + np.asarray(delta, float)) ** -0.5


def snap_alpha(alpha: float, max_den: int = ZAK_MAX_DEN) -> tuple[Fraction, float]:
    """Nearest ``alpha^2 = p/q`` with ``q <= max_den``; returns ``(p/q, sqrt(p/q))``.

    Snapping the density ``alpha^2`` keeps the fiber matrices at most
    ``max_den`` rows tall.
    """
    fr = Fraction(alpha * alpha).limit_denominator(max_den)
    return fr, math.sqrt(fr)


@dataclass(frozen=True)
class SweepConfig:
    window: Window
    atoms: AtomSet
    alphas: tuple
    resolution: GridSpec
    method: str = "dense"
    s_class: float = 2.0
    zak_res: int = 64
    threads: int | None = None

    def __post_init__(self):
        al = tuple(float(a) for a in self.alphas)
        if any(b <= a for a, b in zip(al, al[1:])):
            raise ValueError("alphas must be strictly increasing")
        if 1.0 not in al:
            raise ValueError("alphas must include 1")
        if not all(ALPHA_RANGE[0] < a < ALPHA_RANGE[1] for a in al):
            raise ValueError(f"alphas must lie in {ALPHA_RANGE}")
        if self.method not in ("dense", "zak-snap"):
            raise ValueError(f"unknown sweep method {self.method!r}")
        if self.method == "zak-snap" and self.atoms.lattice_step is None:
            raise ValueError("zak-snap needs a square lattice")
        if self.method == "dense" and self.atoms.periodic_box is None:
            raise ValueError("dense sweeps need a periodic atom set")
        object.__setattr__(self, "alphas", al)


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    alpha_used: float
    A: float
    B: float
    method: str
    L: int


@dataclass
class SweepResult:
    rows: list
    fits: dict = field(default_factory=dict)
    s_class: float | None = None

    CSV_HEADER = ("alpha", "alpha_used", "A", "B", "method", "L")

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: r.alpha)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    def reference(self) -> SweepRow:
        for r in self.rows:
            if r.alpha == 1.0:
                return r
        raise ValueError("sweep has no alpha = 1 row")

    def csv_rows(self):
        for r in self.rows:
            yield r.alpha, r.alpha_used, r.A, r.B, r.method, r.L


def adaptive_grid(grid: GridSpec, alpha: float) -> tuple[GridSpec, float]:
    """Grid whose phase-space torus is the ``alpha``-dilate of ``grid``'s.

    ``L' = alpha^2 L`` is rounded to an even integer, so the dilation
    actually realised is ``sqrt(L'/L)``.
    """
    L = grid.num_samples
    Lp = 2 * max(1, int(round(alpha * alpha * L / 2)))
    a = math.sqrt(Lp / L)
    return GridSpec(Lp, grid.dt / a, grid.t0 * a), a


def _dense_row(cfg: SweepConfig, alpha: float) -> SweepRow:
    g2, a = adaptive_grid(cfg.resolution, alpha)
    lam = gabor.dilate_set(cfg.atoms, a)
    lam = AtomSet(lam.points, gabor.torus(g2), lam.lattice_step)
    fb = gabor.frame_bounds(cfg.window.sample(g2), lam, g2)
    return SweepRow(alpha, a, fb.A, fb.B, "dense", g2.num_samples)


def _zak_row(cfg: SweepConfig, alpha: float) -> SweepRow:
    _, a = snap_alpha(alpha)
    step = cfg.atoms.lattice_step * a
    fb = gabor.ZakOracle(cfg.window, step, step).bounds(cfg.zak_res)
    return SweepRow(alpha, a, fb.A, fb.B, "zak-snap", cfg.zak_res)


def _thread_count(threads):
    if threads is None:
        env = os.environ.get("GABOR_SPECTRA_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


def sweep(cfg: SweepConfig) -> SweepResult:
    """Frame bounds of ``alpha * atoms`` for every configured alpha."""
    worker = _dense_row if cfg.method == "dense" else _zak_row

    def run(alpha):
        try:
            return worker(cfg, alpha)
        except Exception as exc:
            raise RuntimeError(f"sweep failed at alpha={alpha}: {exc}") from exc

    n = _thread_count(cfg.threads)
    if n == 1:
        rows = [run(a) for a in cfg.alphas]
    else:
        with ThreadPoolExecutor(n) as pool:
            rows = list(pool.map(run, cfg.alphas))
    result = SweepResult(rows, s_class=cfg.s_class)
    result.fits = fit_summary(result)
    return result


# --------------------------------------------------------------------------
# fits and checks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class HolderFit:
    exponent: float
    constant: float
    r2: float
    n: int


def increments(result: SweepResult, side: str, branch="both", fit_window=FIT_WINDOW):
    """``(|1 - alpha_used|, |sigma(alpha) - sigma(1)|)`` on the fit window."""
    if side not in ("A", "B"):
        raise ValueError("side must be 'A' or 'B'")
    ref = result.reference()
    d = np.array([abs(1 - r.alpha_used) for r in result.rows])
    inc = np.array([abs(getattr(r, side) - getattr(ref, side)) for r in result.rows])
    left = np.array([r.alpha_used < 1 for r in result.rows])
    sel = (d >= fit_window[0]) & (d <= fit_window[1])
    if branch == "left":
        sel &= left
    elif branch == "right":
        sel &= ~left
    return d[sel], inc[sel]


def holder_fit(result: SweepResult, side: str = "A", branch="both",
               fit_window=FIT_WINDOW, floor=1e-12) -> HolderFit:
    """Least squares of ``log |sigma(alpha) - sigma(1)|`` against ``log |1 - alpha|``.

    Increments below ``floor * B(1)`` carry no information and are dropped.
    """
    d, inc = increments(result, side, branch, fit_window)
    keep = inc > floor * max(result.reference().B, 1e-300)
    d, inc = d[keep], inc[keep]
    if len(d) < 4 or np.ptp(np.log(d)) == 0:
        raise ValueError(f"degenerate fit window: {len(d)} usable rows")
    X, Y = np.log(d), np.log(inc)
    slope, icpt = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + icpt)
    ss = np.sum((Y - Y.mean()) ** 2)
    r2 = 1.0 - float(np.sum(resid ** 2) / ss) if ss > 0 else 1.0
    return HolderFit(float(slope), float(math.exp(icpt)), r2, len(d))


def fit_summary(result: SweepResult, fit_window=FIT_WINDOW) -> dict:
    """Exponents, constants and the worse r^2 of both sides; ``None`` where
    the fit window has too few usable rows."""
    out = {}
    r2 = []
    for side in ("A", "B"):
        try:
            f = holder_fit(result, side, fit_window=fit_window)
        except ValueError:
            out[f"exponent_{side}"] = out[f"constant_{side}"] = None
            continue
        out[f"exponent_{side}"], out[f"constant_{side}"] = f.exponent, f.constant
        r2.append(f.r2)
    out["r2"] = min(r2) if r2 else None
    return out


def ratio_spread(d, ratio) -> float:
    """One-sided spread: worst ratio among the rows closest to alpha = 1,
    relative to the median ratio over all rows."""
    if len(ratio) == 0 or not np.any(ratio):
        return 0.0
    med = float(np.median(ratio))
    if med == 0:
        return math.inf
    near = d <= np.median(d)
    return float(np.max(ratio[near]) / med)


def m1_norm_squared(window: Window, s: float, grid: GridSpec | None = None) -> float:
    """``||g||^2_{M^1_s}`` of a unit-norm window on a grid reaching its Nyquist band."""
    grid = grid or GridSpec.centered(1024, 1 / 32)
    g = window.sample(grid)
    ps = _default_psgrid(grid)
    n = modspace.mixed_norm_signal(g, modspace.MixedNormParams(1, 1, s, s), ps, check=False)
    return n * n


def bound_check(result: SweepResult, s: float, g=None, L: AtomSet | None = None, *,
                exponent: float | None = None, g_norm_sq: float | None = None,
                rel: int | None = None, fit_window=FIT_WINDOW) -> dict:
    """Ratio of the observed increments to ``rel * |1-alpha|^e * ||g||^2_{M^1_s}``.

    ``e = gamma(s)`` unless ``exponent`` overrides it (negative controls).
    PASS iff the one-sided spread of the ratio is at most 5 for both bounds.
    """
    result.reference()
    e = gamma(s) if exponent is None else float(exponent)
    if rel is None:
        if L is None:
            raise ValueError("need the atom set or rel")
        rel = gabor.rel_separation(L)
    if g_norm_sq is None:
        if g is None:
            raise ValueError("need the window or its norm")
        g_norm_sq = m1_norm_squared(g, s) if isinstance(g, Window) else modspace.mixed_norm_signal(
            g, modspace.MixedNormParams(1, 1, s, s), _default_psgrid(g.grid), check=False) ** 2
    out = {"s": s, "exponent_tested": e, "rel": rel, "g_norm_sq": g_norm_sq,
           "fit_window": list(fit_window)}
    ok = True
    consts = []
    for side in ("A", "B"):
        d, inc = increments(result, side, "both", fit_window)
        scale = rel * g_norm_sq * d ** e
        ratio = inc / scale if len(d) else np.array([])
        spread = ratio_spread(d, ratio)
        out[f"spread_{side}"] = spread
        out[f"constant_{side}"] = float(ratio.max()) if len(ratio) else 0.0
        consts.append(out[f"constant_{side}"])
        ok &= spread <= SPREAD_LIMIT
    out["constant"] = max(consts)
    out["pass"] = bool(ok)
    return out


def _default_psgrid(grid: GridSpec) -> PhaseSpaceGrid:
    half_x = min(8.0, grid.period / 2)
    return PhaseSpaceGrid(int(8 * half_x), int(8 * grid.nyquist), 0.25, 0.25, -half_x, -grid.nyquist)


def sweep_report(result: SweepResult, s: float, window: Window, atoms: AtomSet,
                 fit_window=FIT_WINDOW) -> dict:
    """Report JSON: fitted exponents plus the bound check."""
    fits = fit_summary(result, fit_window)
    bc = bound_check(result, s, window, atoms, fit_window=fit_window)
    return {"exponent_A": fits["exponent_A"], "exponent_B": fits["exponent_B"],
            "constant": bc["constant"], "r2": fits["r2"],
            "pass": bc["pass"], "fit_window": list(fit_window),
            "gamma": gamma(s), "spread_A": bc["spread_A"], "spread_B": bc["spread_B"],
            "continuity": _continuity_or_none(result)}


def _continuity_or_none(result):
    try:
        return continuity_check(result)["pass"]
    except ValueError:
        return None


def continuity_check(result: SweepResult, steps=3) -> dict:
    """Increments over the ``steps`` alphas nearest 1 from below must shrink
    monotonically as alpha approaches 1, for both bounds."""
    ref = result.reference()
    left = sorted((r for r in result.rows if r.alpha_used < 1), key=lambda r: r.alpha_used)
    if len(left) < steps:
        raise ValueError(f"need {steps} alphas below 1, got {len(left)}")
    tail = left[-steps:]
    out = {"alphas": [r.alpha_used for r in tail]}
    ok = True
    for side in ("A", "B"):
        inc = [abs(getattr(r, side) - getattr(ref, side)) for r in tail]
        mono = all(b < a for a, b in zip(inc, inc[1:]))
        out[f"increments_{side}"] = inc
        out[f"monotone_{side}"] = mono
        ok &= mono
    out["pass"] = bool(ok)
    return out


def continuity_experiment(alphas=(0.9, 0.95, 0.97, 0.98, 0.99, 1.0), seed=7, threads=None) -> dict:
    """Raised-cosine window (M^1 but no better) on a jittered copy of Z^2."""
    grid = GridSpec.centered()
    atoms = AtomSet.jittered(1.0, 0.1, seed, grid)
    result = sweep(SweepConfig(Window("raised_cosine"), atoms, tuple(alphas), grid,
                               "dense", 0.5, threads=threads))
    return {**continuity_check(result), "result": result}


SATURATION_ALPHAS = (0.85, 0.87, 0.89, 0.91, 0.93, 0.95, 0.97, 0.99, 1.0, 1.05)


def saturation_experiment(res_levels=(32, 64), alphas=SATURATION_ALPHAS, threads=None) -> dict:
    """Gaussian on ``alpha Z^2`` through the Zak oracle at several resolutions."""
    levels = []
    for res in sorted(res_levels):
        cfg = SweepConfig(Window("gaussian"), AtomSet.lattice(1.0), tuple(alphas),
                          GridSpec.centered(), "zak-snap", 2.0, res, threads)
        result = sweep(cfg)
        fit = holder_fit(result, "A", branch="left")
        ref = result.reference()
        right = [r.A for r in result.rows if r.alpha_used >= 1]
        left = [(r.alpha_used, r.A) for r in result.rows if r.alpha_used < 1]
        (a1, A1), (a2, A2) = left[-2], left[-1]
        levels.append({"res": res, "exponent_A": fit.exponent, "constant": fit.constant,
                       "r2": fit.r2, "B_ref": ref.B, "A_right_max": max(right),
                       "left_slope": (A2 - A1) / (a2 - a1), "result": result})
    fin = levels[-1]
    stable = abs(levels[-1]["exponent_A"] - levels[-2]["exponent_A"]) if len(levels) > 1 else 0.0
    ok = (0.85 <= fin["exponent_A"] <= 1.15 and fin["A_right_max"] <= 1e-3 * fin["B_ref"]
          and stable <= 0.05)
    return {"levels": levels, "exponent_A": fin["exponent_A"], "stability": stable,
            "pass": bool(ok)}


HOLDER_ALPHAS = (0.8, 0.872, 0.936, 0.968, 0.984, 0.992, 0.996, 0.998, 1.0)


def holder_corpus() -> dict:
    """One window per smoothness class: Matern windows with spectral decay
    ``(1+xi^2)^(-kappa/2)``, ``kappa = 1 + s + 1/4``, and the Gaussian for s = 2."""
    return {0.5: Window("matern", (1.75,)), 1.0: Window("matern", (2.25,)), 2.0: Window("gaussian")}


def holder_law_experiment(corpus=None, alphas=HOLDER_ALPHAS, grid: GridSpec | None = None,
                          threads=None, margin=0.1) -> dict:
    """Dense sweeps of each corpus window on the integer lattice.

    Per class: fitted increment exponents must reach ``gamma(s) - margin``,
    the bound check at ``gamma(s)`` must PASS and the negative control at
    ``2 gamma(s)`` must FAIL.
    """
    corpus = corpus or holder_corpus()
    grid = grid or GridSpec.centered(1024, 1 / 32)
    atoms = AtomSet.lattice(1.0, grid)
    rows = []
    for s, win in sorted(corpus.items()):
        result = sweep(SweepConfig(win, atoms, tuple(alphas), grid, "dense", s, threads=threads))
        norm_sq = m1_norm_squared(win, s, grid)
        rel = gabor.rel_separation(atoms)
        check = bound_check(result, s, g_norm_sq=norm_sq, rel=rel)
        control = bound_check(result, s, g_norm_sq=norm_sq, rel=rel, exponent=2 * gamma(s))
        eA = holder_fit(result, "A").exponent
        eB = holder_fit(result, "B").exponent
        g = gamma(s)
        row = {"s": s, "window": win.describe(), "gamma": g, "exponent_A": eA, "exponent_B": eB,
               "exponents_ok": bool(min(eA, eB) >= g - margin), "check_pass": check["pass"],
               "check_spread": max(check["spread_A"], check["spread_B"]),
               "control_pass": control["pass"],
               "control_spread": max(control["spread_A"], control["spread_B"])}
        row["pass"] = row["exponents_ok"] and row["check_pass"] and not row["control_pass"]
        rows.append(row)
    return {"rows": rows, "pass": all(r["pass"] for r in rows)}
