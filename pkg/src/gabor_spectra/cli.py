"""``gabor-spectra`` command-line front end.

Every command reads a JSON run configuration, writes its artifacts to a
temporary directory next to the output directory and moves them into
place only when the command finishes.  Exit status: 0 success or PASS,
2 a check reported FAIL, 1 error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import platform
import shutil
import sys
import tempfile
import time
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from . import __version__, checks, deform, formats, gabor, modspace, svgplot, tfcore
from .tfcore import GridSpec, PhaseSpaceGrid, Window

log = logging.getLogger("gabor_spectra")

COMMANDS = ("stft", "wigner", "modnorm", "framebounds", "sweep", "tradeoff", "saturation", "verify")
EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
DEFAULT_SEED = 42


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


def schema() -> dict:
    text = resources.files("gabor_spectra").joinpath("data/runconfig.schema.json").read_text()
    return json.loads(text)


def bundled_configs() -> list[str]:
    d = resources.files("gabor_spectra").joinpath("data/configs")
    return sorted(p.name[:-5] for p in d.iterdir() if p.name.endswith(".json"))


def load_config(arg: str) -> dict:
    """Read a config file, or a bundled config by name (e.g. ``gaussian-z2``)."""
    p = Path(arg)
    if p.is_file():
        text = p.read_text()
    elif arg in bundled_configs():
        text = resources.files("gabor_spectra").joinpath(f"data/configs/{arg}.json").read_text()
    else:
        raise ConfigError(f"config {arg!r} is neither a file nor a bundled config "
                          f"({', '.join(bundled_configs())})")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def validate_config(cfg: dict) -> None:
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config field {where}: {e.message}")


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


# --------------------------------------------------------------------------
# builders
# --------------------------------------------------------------------------


def build_grid(spec: dict | None, default=(1024, 1 / 32)) -> GridSpec:
    spec = spec or {}
    L = spec.get("L", default[0])
    dt = spec.get("dt", default[1])
    return GridSpec(L, dt, spec.get("t0", -L * dt / 2))


def build_psgrid(spec: dict | None, default=(256, 256, 8.0, 8.0)) -> PhaseSpaceGrid:
    spec = spec or {}
    nx, nw, hx, hw = default
    return PhaseSpaceGrid.centered(spec.get("nx", nx), spec.get("nw", nw),
                                   spec.get("half_x", hx), spec.get("half_w", hw))


def build_window(spec: dict | None, inputs: dict | None = None) -> Window:
    spec = spec or {"kind": "gaussian"}
    inputs = inputs or {}
    kind = spec["kind"]
    if kind == "custom":
        if "window" not in inputs:
            raise ConfigError("custom window needs inputs.window")
        return Window("custom", (), formats.read_signal(inputs["window"]))
    if kind in ("power_law", "random"):
        raise ConfigError(f"{kind!r} is a signal, not a window")
    return tfcore.window_spec(kind, n=spec.get("n"), width=spec.get("width"), rate=spec.get("rate"),
                              kappa=spec.get("kappa"))


def build_signal(spec: dict | None, grid: GridSpec, seed: int, inputs: dict | None = None):
    inputs = inputs or {}
    if "signal" in inputs:
        f = formats.read_signal(inputs["signal"])
        if f.grid.num_samples != grid.num_samples or not math.isclose(f.grid.dt, grid.dt):
            log.info("using the grid of %s", inputs["signal"])
        return f
    spec = spec or {"kind": "gaussian"}
    kind = spec["kind"]
    if kind == "power_law":
        return modspace.power_law_signal(grid, float(spec.get("kappa", 2.25)))
    if kind == "random":
        rng = np.random.default_rng(seed)
        return checks.random_signal(grid, rng, spec.get("atoms", 6), spec.get("spread", 4.0))
    return build_window(spec, inputs).sample(grid)


def build_atoms(spec: dict | None, grid: GridSpec, seed: int, inputs: dict | None = None):
    inputs = inputs or {}
    spec = spec or {"kind": "lattice"}
    kind = spec["kind"]
    periodic = spec.get("periodic", True)
    if kind == "file" or "atoms" in inputs:
        if "atoms" not in inputs:
            raise ConfigError("atoms kind 'file' needs inputs.atoms")
        return formats.read_atoms(inputs["atoms"], gabor.torus(grid) if periodic else None)
    step = spec.get("step", 1.0)
    if kind == "lattice":
        return gabor.AtomSet.lattice(step, grid if periodic else None, half_x=spec.get("half"))
    if kind == "jittered":
        return gabor.AtomSet.jittered(step, spec.get("amplitude", 0.1), seed,
                                      grid if periodic else None, half_x=spec.get("half"))
    if kind == "random":
        return gabor.AtomSet.random_separated(spec.get("n", 40), spec.get("min_dist", 0.9),
                                              spec.get("half", 4.0), seed)
    raise ConfigError(f"unknown atoms kind {kind!r}")


def _exponent(v):
    return math.inf if v == "inf" else v


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


class Context:
    def __init__(self, out: Path, seed: int, threads: int | None, png: bool):
        self.out = out
        self.seed = seed
        self.threads = threads
        self.png = png
        self.timings = {}

    def path(self, name) -> Path:
        return self.out / name

    def plots(self, data, stem="plot"):
        svgplot.emit_plot(data, self.path(f"{stem}.svg"))
        if self.png:
            from . import figures

            if isinstance(data, deform.SweepResult):
                figures.sweep_png(data, self.path(f"{stem}.png"))
            else:
                figures.tradeoff_png(data, self.path(f"{stem}.png"))


def cmd_stft(cfg, ctx):
    p = cfg.get("params", {})
    grid = build_grid(p.get("grid"))
    ps = build_psgrid(p.get("psgrid"))
    f = build_signal(p.get("signal"), grid, ctx.seed, cfg.get("inputs"))
    g = build_window(p.get("window"), cfg.get("inputs")).sample(f.grid)
    V = tfcore.stft(f, g, ps)
    formats.write_psf(ctx.path("stft.csv"), V)
    formats.write_json(ctx.path("report.json"), {
        "signal_norm": f.norm(), "stft_norm": V.l2_norm(),
        "ratio": V.l2_norm() / f.norm() if f.norm() else None,
        "synthesis_residual": tfcore.synthesis_residual(g, ps)})
    return None


def cmd_wigner(cfg, ctx):
    p = cfg.get("params", {})
    grid = build_grid(p.get("grid"), default=(256, 1 / 16))
    ps = build_psgrid(p.get("psgrid"), default=(128, 128, 4.0, 4.0))
    f = build_signal(p.get("signal"), grid, ctx.seed, cfg.get("inputs"))
    g = build_signal(p.get("window"), f.grid, ctx.seed) if p.get("window") else f
    W = tfcore.wigner(f, g, ps)
    formats.write_psf(ctx.path("wigner.csv"), W)
    formats.write_json(ctx.path("report.json"), {
        "l2_norm": W.l2_norm(), "max_abs_imag": float(np.max(np.abs(W.values.imag))),
        "integral": float(np.sum(W.values).real * ps.cell)})
    return None


def cmd_modnorm(cfg, ctx):
    p = cfg.get("params", {})
    grid = build_grid(p.get("grid"))
    ps = build_psgrid(p.get("psgrid"))
    f = build_signal(p.get("signal"), grid, ctx.seed, cfg.get("inputs"))
    mp = modspace.MixedNormParams(_exponent(p.get("p", 2)), _exponent(p.get("q", 2)),
                                  p.get("s", 0.0), p.get("t", 0.0))
    value = modspace.mixed_norm_signal(f, mp, ps, check=p.get("check", True))
    formats.write_json(ctx.path("report.json"), {
        "norm": value, "p": p.get("p", 2), "q": p.get("q", 2), "s": mp.s, "t": mp.t})
    return None


def cmd_framebounds(cfg, ctx):
    p = cfg.get("params", {})
    grid = build_grid(p.get("grid"))
    win = build_window(p.get("window"), cfg.get("inputs"))
    atoms = build_atoms(p.get("atoms"), grid, ctx.seed, cfg.get("inputs"))
    method = p.get("method", "auto")
    if method in ("zak", "zak-snap"):
        if atoms.lattice_step is None:
            raise ConfigError("the zak method needs a square lattice")
        step = atoms.lattice_step
        fb = gabor.ZakOracle(win, step, step).bounds(p.get("zak_res", 64))
        rep = fb.to_json(rel=gabor.rel_separation(gabor.AtomSet.lattice(step)))
        rep.update({"L": None, "dt": None})
    else:
        fb = gabor.frame_bounds(win.sample(grid), atoms, grid, method)
        rep = fb.to_json(rel=gabor.rel_separation(atoms))
    formats.write_atoms(ctx.path("atoms.csv"), atoms)
    formats.write_json(ctx.path("framebounds.json"), rep)
    return None


def _sweep_config(p, ctx, inputs):
    grid = build_grid(p.get("grid"))
    win = build_window(p.get("window"), inputs)
    atoms = build_atoms(p.get("atoms"), grid, ctx.seed, inputs)
    return deform.SweepConfig(win, atoms, tuple(p["alphas"]), grid, p.get("method", "dense"),
                              p.get("s_class", 2.0), p.get("zak_res", 64), ctx.threads)


def cmd_sweep(cfg, ctx):
    p = cfg.get("params", {})
    sc = _sweep_config(p, ctx, cfg.get("inputs"))
    result = deform.sweep(sc)
    report = deform.sweep_report(result, sc.s_class, sc.window, sc.atoms)
    formats.write_sweep(ctx.path("sweep.csv"), result)
    formats.write_json(ctx.path("report.json"), report)
    ctx.plots(result)
    return report["pass"]


def cmd_tradeoff(cfg, ctx):
    p = cfg.get("params", {})
    grid = build_grid(p.get("grid"), default=(4096, 1 / 128))
    ps = build_psgrid(p.get("psgrid"), default=(64, 1024, 4.0, 64.0))
    g = build_signal(p.get("signal", {"kind": "power_law", "kappa": 2.25}), grid, ctx.seed,
                     cfg.get("inputs"))
    a, b, c = p.get("a", 0.0), p.get("b", 1.0), p.get("c", 2.0)
    table = modspace.tradeoff_table(g, a, b, c, p["eps_list"], ps)
    tol = 0.15
    report = {"a": a, "b": b, "c": c, "tolerance": tol, "regions": {}}
    ok = True
    for region, (se, sg) in table.slopes.items():
        te, tg = table.targets()[region]
        good = se >= te - tol and sg >= tg - tol
        ok &= good
        report["regions"][region] = {"slope_err": se, "slope_growth": sg, "target_err": te,
                                     "target_growth": tg, "pass": good}
    report["pass"] = bool(ok)
    formats.write_tradeoff(ctx.path("tradeoff.csv"), table)
    formats.write_json(ctx.path("report.json"), report)
    ctx.plots(table)
    return ok


def cmd_saturation(cfg, ctx):
    p = cfg.get("params", {})
    alphas = tuple(p.get("alphas", deform.SATURATION_ALPHAS))
    rep = deform.saturation_experiment(tuple(p.get("res_levels", (32, 64))), alphas, ctx.threads)
    finest = rep["levels"][-1]["result"]
    formats.write_sweep(ctx.path("sweep.csv"), finest)
    levels = [{k: v for k, v in lv.items() if k != "result"} for lv in rep["levels"]]
    formats.write_json(ctx.path("report.json"), {
        "exponent_A": rep["exponent_A"], "stability": rep["stability"], "levels": levels,
        "fit_window": list(deform.FIT_WINDOW), "pass": rep["pass"]})
    ctx.plots(finest)
    return rep["pass"]


VERIFY_CHECKS = {
    "stft_isometry": lambda seed: checks.isometry(seed=seed),
    "stft_covariance": lambda seed: checks.covariance(seed=seed),
    "stft_inversion": lambda seed: checks.inversion(seed=seed),
    "spectral_edge_perturbation": lambda seed: checks.edge_perturbation(seed=seed),
    "wigner_identities": lambda seed: checks.wigner_identities(),
    "cross_route_identity": lambda seed: checks.cross_route(seed=seed),
}


def cmd_verify(cfg, ctx):
    p = cfg.get("params", {})
    names = p.get("checks", list(VERIFY_CHECKS))
    results = []
    for name in names:
        t = time.perf_counter()
        results.append(VERIFY_CHECKS[name](ctx.seed))
        ctx.timings[name] = time.perf_counter() - t
        log.info("%s: %s", name, "PASS" if results[-1]["pass"] else "FAIL")
    formats.write_csv(ctx.path("verify.csv"), ("check", "value", "tolerance", "pass"),
                      ((r["check"], r["value"], r["tolerance"], r["pass"]) for r in results))
    ok = all(r["pass"] for r in results)
    formats.write_json(ctx.path("verify.json"), {"checks": results, "pass": ok})
    return ok


HANDLERS = {
    "stft": cmd_stft, "wigner": cmd_wigner, "modnorm": cmd_modnorm,
    "framebounds": cmd_framebounds, "sweep": cmd_sweep, "tradeoff": cmd_tradeoff,
    "saturation": cmd_saturation, "verify": cmd_verify,
}


# --------------------------------------------------------------------------
# orchestration
# --------------------------------------------------------------------------


def _publish(tmp: Path, out: Path):
    if not out.exists():
        os.replace(tmp, out)
        return
    for item in sorted(tmp.iterdir()):
        os.replace(item, out / item.name)
    tmp.rmdir()


def run(cfg: dict, out_dir=None, seed=None, threads=None, command=None) -> int:
    """Validate ``cfg``, run its command and publish the artifacts."""
    try:
        validate_config(cfg)
        if command is not None and cfg["command"] != command:
            raise ConfigError(f"config is for {cfg['command']!r}, not {command!r}")
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_ERROR
    out = Path(out_dir or cfg.get("out_dir") or f"out-{cfg['command']}")
    seed = DEFAULT_SEED if seed is None and "seed" not in cfg else (seed if seed is not None else cfg["seed"])
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".gabor-spectra-", dir=out.parent))
    ctx = Context(tmp, seed, threads, cfg.get("png", True))
    t0 = time.perf_counter()
    try:
        status = HANDLERS[cfg["command"]](cfg, ctx)
        ctx.timings["total"] = time.perf_counter() - t0
        formats.write_json(tmp / "manifest.json", {
            "command": cfg["command"], "config_sha256": config_hash(cfg), "seed": seed,
            "versions": {"gabor_spectra": __version__, "numpy": np.__version__,
                         "scipy": scipy.__version__, "python": platform.python_version()},
            "runtime_seconds": ctx.timings,
            "artifacts": sorted(p.name for p in tmp.iterdir()) + ["manifest.json"]})
        _publish(tmp, out)
    except Exception as exc:  # no partial outputs on any failure
        shutil.rmtree(tmp, ignore_errors=True)
        log.error("%s failed: %s", cfg["command"], exc)
        log.debug("traceback", exc_info=True)
        return EXIT_ERROR
    if status is None or status:
        log.info("%s: %s -> %s", cfg["command"], "PASS" if status else "done", out)
        return EXIT_OK
    log.warning("%s: FAIL -> %s", cfg["command"], out)
    return EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gabor-spectra",
                                 description="Gabor frame bounds and their behaviour under dilation.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=(HANDLERS[name].__doc__ or name).strip().splitlines()[0])
        sp.add_argument("--config", required=True,
                        help="JSON run configuration (file path or bundled name)")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help=f"random seed (default {DEFAULT_SEED})")
        sp.add_argument("--threads", type=int,
                        help="worker threads (fallback: GABOR_SPECTRA_THREADS)")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    threads = args.threads
    if threads is None and os.environ.get("GABOR_SPECTRA_THREADS"):
        threads = int(os.environ["GABOR_SPECTRA_THREADS"])
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_ERROR
    if isinstance(cfg, dict):
        cfg.setdefault("command", args.command)
    return run(cfg, args.out, args.seed, threads, command=args.command)


if __name__ == "__main__":
    sys.exit(main())
