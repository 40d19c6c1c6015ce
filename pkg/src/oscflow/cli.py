"""Configuration-driven command line harness.

Commands:
    oscflow run-nse CONFIG        velocity-pair solver run + analyticity probe
    oscflow run-vorticity CONFIG  vorticity-pair solver run
    oscflow verify ...            inequality regression suite
    oscflow table weights|horizons  CSV tables to stdout

Exit codes: 0 ok, 2 config error, 3 divergence, 4 bound regression.
One JSON config file drives one run; OSC_THREADS caps worker parallelism.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import resource
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .analyticity import DOMAIN_NORM_COLUMNS, estimate_radius, probe_domain_norms
from .core import ComplexPair, SpectralField, dump_field, load_field, make_grid, zero_field
from .iteration import (
    ConfigError,
    DivergenceError,
    ForcingSpec,
    IterationConfig,
    VELOCITY_MONITORS,
    VORTICITY_MONITORS,
    run_iteration,
)
from .operators import curl, leray_project
from .spaces import bmo_norm
from . import verify as verify_mod
from . import weights as wt
from .plotting import plot_monitors, plot_radius, plot_residuals

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_REGRESSION = 0, 2, 3, 4


def fmt(x) -> str:
    return f"{x:.17g}" if isinstance(x, float) else str(x)


def worker_count() -> int:
    env = os.environ.get("OSC_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def write_csv(path: str, columns: list, rows: list) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt(row[c]) for c in columns))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# --- config resolution ---------------------------------------------------------


RUN_DEFAULTS = {
    "d": 2, "N": 64, "L": 2 * math.pi, "T": 0.5,
    "alpha": None, "initial": {"type": "taylor-green", "amplitude": 1e-3},
    "forcing": None, "n_snapshots": 25, "max_iter": 40, "eps_conv": 1e-9,
    "C": 1.0, "quad_nodes": 32, "probe_times": [], "seed": 0,
    "p": 2.0, "radius_times": [0.01, 0.04, 0.16], "probe_radii": None,
    "snapshot_checkpoints": 4,
}


def resolve_config(path: str, overrides=None) -> dict:
    with open(path) as fh:
        user = json.load(fh)
    unknown = set(user) - set(RUN_DEFAULTS) - {"mode"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = dict(RUN_DEFAULTS)
    cfg.update(user)
    cfg.update(overrides or {})
    return cfg


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def _taylor_green(grid, amplitude):
    from .core import transform_forward
    xs = np.meshgrid(*([grid.x_axis] * grid.d), indexing="ij")
    if grid.d == 2:
        vals = np.stack([amplitude * np.cos(xs[0]) * np.sin(xs[1]),
                         -amplitude * np.sin(xs[0]) * np.cos(xs[1])])
    else:
        vals = np.stack([
            amplitude * np.cos(xs[0]) * np.sin(xs[1]) * np.sin(xs[2]),
            -0.5 * amplitude * np.sin(xs[0]) * np.cos(xs[1]) * np.sin(xs[2]),
            -0.5 * amplitude * np.sin(xs[0]) * np.sin(xs[1]) * np.cos(xs[2]),
        ])
    return transform_forward(grid, vals)


def _random_band(grid, kmax, amplitude, seed, decay=0.0):
    rng = np.random.default_rng(seed)
    coeffs = np.zeros((grid.d,) + grid.shape, dtype=np.complex128)
    ranges = [range(-kmax, kmax + 1)] * grid.d
    for n_vec in np.stack(np.meshgrid(*ranges, indexing="ij"), -1).reshape(-1, grid.d):
        if not np.any(n_vec):
            continue
        pos = tuple(int(n) % grid.N for n in n_vec)
        scale = float(np.linalg.norm(n_vec)) ** -decay if decay else 1.0
        for j in range(grid.d):
            coeffs[(j,) + pos] += scale * (rng.standard_normal()
                                           + 1j * rng.standard_normal())
    f = SpectralField(grid, coeffs, real=False).enforce_reality()
    f = leray_project(f)
    top = float(np.max(np.abs(f.values())))
    return f * (amplitude / top if top > 0 else 1.0)


def build_initial(grid, spec: dict, seed: int, vorticity: bool) -> SpectralField:
    kind = spec.get("type", "taylor-green")
    if kind == "taylor-green":
        u = _taylor_green(grid, float(spec.get("amplitude", 1e-3)))
    elif kind == "random-band":
        u = _random_band(grid, int(spec.get("kmax", 4)),
                         float(spec.get("amplitude", 1e-3)), seed,
                         decay=float(spec.get("decay", 0.0)))
    elif kind == "file":
        u = load_field(spec["path"])
        if u.grid != grid:
            raise ConfigError("field file grid does not match config grid")
    elif kind == "zero":
        u = zero_field(grid, grid.d)
    else:
        raise ConfigError(f"unknown initial type {kind!r}")
    if vorticity:
        return curl(u)
    return u


def build_forcing(grid, spec, seed: int) -> ForcingSpec | None:
    if spec is None:
        return None
    f = build_initial(grid, spec.get("f", {"type": "zero"}), seed, vorticity=False)
    g = None
    if spec.get("g") is not None:
        g = build_initial(grid, spec["g"], seed + 1, vorticity=False)
    return ForcingSpec(f=f, g=g, delta_f=float(spec.get("delta_f", math.inf)))


# --- manifest -----------------------------------------------------------------


def write_manifest(outdir: str, command: str, cfg: dict, inputs: list,
                   extra=None) -> dict:
    manifest = {
        "command": command,
        "config_hash": config_hash(cfg),
        "inputs": [os.path.abspath(p) for p in inputs],
        "output_dir": os.path.abspath(outdir),
        "started_unix": time.time(),
        "wall_clock_s": None,
        "peak_rss_kb": None,
        "warnings": [],
    }
    manifest.update(extra or {})
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest


def finish_manifest(outdir: str, manifest: dict, warnings=()) -> None:
    manifest["wall_clock_s"] = time.time() - manifest["started_unix"]
    manifest["peak_rss_kb"] = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    manifest["warnings"] = list(warnings)
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)


# --- run commands ---------------------------------------------------------------


def _run_solver(args, vorticity: bool) -> int:
    command = "run-vorticity" if vorticity else "run-nse"
    try:
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        cfg = resolve_config(args.config, overrides)
        grid = make_grid(cfg["d"], cfg["N"], cfg["L"])
        u0 = build_initial(grid, cfg["initial"], cfg["seed"], vorticity)
        icfg = IterationConfig(
            grid=grid, u0=u0, T=cfg["T"],
            alpha=np.asarray(cfg["alpha"], float) if cfg["alpha"] else None,
            forcing=build_forcing(grid, cfg["forcing"], cfg["seed"]),
            n_snapshots=cfg["n_snapshots"], max_iter=cfg["max_iter"],
            eps_conv=cfg["eps_conv"], C=cfg["C"], quad_nodes=cfg["quad_nodes"],
            probe_times=tuple(cfg["probe_times"]) + tuple(
                t for t in cfg["radius_times"] if t <= cfg["T"]),
            mode="vorticity" if vorticity else "velocity", p=cfg["p"])
    except (ConfigError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    outdir = args.output or f"run-{config_hash(cfg)[:12]}"
    os.makedirs(outdir, exist_ok=True)
    os.makedirs(os.path.join(outdir, "snapshots"), exist_ok=True)
    manifest = write_manifest(outdir, command, cfg, [args.config])
    with open(os.path.join(outdir, "config.json"), "w") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)

    warnings = []
    if icfg.horizon_warning:
        warnings.append("T exceeds the guaranteed existence horizon")
    try:
        state, report = run_iteration(icfg)
    except DivergenceError as exc:
        with open(os.path.join(outdir, "report.json"), "w") as fh:
            json.dump({"verdict": "diverged", "detail": str(exc),
                       "diagnostics": exc.diagnostics}, fh, indent=2, default=str)
        finish_manifest(outdir, manifest, warnings + ["diverged"])
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE

    monitor_names = VORTICITY_MONITORS if vorticity else VELOCITY_MONITORS
    monitor_rows = []
    for n, mon in enumerate(state.monitors):
        row = {"n": n, **{k: mon[k] for k in monitor_names}}
        row["diff"] = state.diff_norms[n - 1] if n >= 1 else 0.0
        monitor_rows.append(row)
    write_csv(os.path.join(outdir, "monitors.csv"),
              ["n"] + monitor_names + ["diff"], monitor_rows)
    write_csv(os.path.join(outdir, "residuals.csv"), ["t", "residual"],
              [{"t": t, "residual": r}
               for t, r in zip(report.residual_times, report.residuals)])

    # snapshots of the limit at evenly spread checkpoint times
    idx = np.linspace(0, len(state.times) - 1, cfg["snapshot_checkpoints"]).astype(int)
    for i in idx:
        dump_field(state.U.fields[i],
                   os.path.join(outdir, "snapshots", f"U_t{state.times[i]:.6f}.oscf"))

    # analyticity probe on the limit
    radius_rows = []
    for t in cfg["radius_times"]:
        if t > cfg["T"]:
            continue
        est = estimate_radius(state.U.at(float(t)), float(t))
        envelope = math.sqrt(t) * wt.Phi2_envelope(float(t))
        radius_rows.append({**est.as_row(), "envelope": envelope})
    c_fit = min((r["delta_hat"] / r["envelope"] for r in radius_rows
                 if r["envelope"] > 0 and not r["indeterminate"]), default=0.0)
    for r in radius_rows:
        r["c_fit"] = c_fit
    write_csv(os.path.join(outdir, "radius.csv"),
              ["t", "delta_hat", "residual", "n_shells", "saturated",
               "indeterminate", "envelope", "c_fit"], radius_rows)

    radii = cfg["probe_radii"]
    if radii is None:
        finite = [r["delta_hat"] for r in radius_rows if not r["indeterminate"]]
        base = min(finite) if finite else 0.1
        radii = [0.0, 0.25 * base, 0.5 * base]
    t_probe = float(radius_rows[-1]["t"]) if radius_rows else cfg["T"]
    pair = ComplexPair(state.U.at(t_probe), state.V.at(t_probe))
    write_csv(os.path.join(outdir, "domain_norms.csv"), DOMAIN_NORM_COLUMNS,
              probe_domain_norms(pair, t_probe, radii, seed=cfg["seed"]))

    data_norm = bmo_norm(u0, local=True)
    gamma = icfg.forcing.gamma() if icfg.forcing else 0.0
    hz_in = wt.HorizonInput(bmo_norm=data_norm, gamma=gamma, C=cfg["C"], p=cfg["p"])
    horizon = (wt.horizon_Tomega(hz_in) if vorticity else wt.horizon_Tstar(hz_in))
    with open(os.path.join(outdir, "report.json"), "w") as fh:
        json.dump({
            "verdict": "converged" if report.converged else "not-converged",
            "n_iterations": report.n_iterations,
            "final_diff": report.final_diff,
            "max_residual": report.max_residual(),
            "monitor_bound": report.monitor_bound,
            "monitor_bound_ok": report.monitor_bound_ok,
            "contraction_ratios": report.contraction_ratios,
            "horizon_T": horizon.T,
            "horizon_saturated": horizon.saturated,
            "data_bmo_norm": data_norm,
            "gamma": gamma,
            "C": cfg["C"],
            "c_fit": c_fit,
            "horizon_warning": icfg.horizon_warning,
        }, fh, indent=2)

    plot_monitors(monitor_rows, state.diff_norms,
                  os.path.join(outdir, "monitors.png"))
    plot_residuals(report.residual_times, report.residuals,
                   os.path.join(outdir, "residuals.png"))
    plot_radius(radius_rows, os.path.join(outdir, "radius.png"))
    finish_manifest(outdir, manifest, warnings)
    print(f"{command}: {'converged' if report.converged else 'NOT converged'} "
          f"in {report.n_iterations} iterations; artifacts in {outdir}")
    return EXIT_OK


# --- verify command --------------------------------------------------------------


def cmd_verify(args) -> int:
    lemma_ids = sorted(verify_mod.LEMMAS) if args.all or not args.lemma else args.lemma
    for lid in lemma_ids:
        if lid not in verify_mod.LEMMAS:
            print(f"config error: unknown lemma {lid!r}", file=sys.stderr)
            return EXIT_CONFIG
    outdir = args.output or "verify-out"
    os.makedirs(outdir, exist_ok=True)
    os.makedirs(os.path.join(outdir, "bounds"), exist_ok=True)
    cfg = {"lemmas": lemma_ids, "seed": args.seed or verify_mod.DEFAULT_SEED,
           "calibrate": args.calibrate}
    manifest = write_manifest(outdir, "verify", cfg, [args.calibration])

    if args.calibrate:
        data = verify_mod.calibrate(args.calibration, lemma_ids, seed=cfg["seed"])
        reports = verify_mod.check(args.calibration, lemma_ids)
    else:
        try:
            data = verify_mod.load_calibration(args.calibration)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            finish_manifest(outdir, manifest, [f"calibration error: {exc}"])
            print(f"config error: calibration file unusable: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        grid = make_grid(data["d"], data["N"])
        from .corpus import build_corpus
        corpus = build_corpus(data["d"], seed=data["seed"],
                              max_k=min(16, data["N"] // 4))
        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            futures = {lid: pool.submit(verify_mod.run_lemma, lid, grid, corpus)
                       for lid in lemma_ids}
            reports = [futures[lid].result().finalize(data["constants"].get(lid))
                       for lid in lemma_ids]

    failed = []
    for rep in reports:
        with open(os.path.join(outdir, "bounds", f"{rep.lemma_id}.csv"), "w") as fh:
            fh.write(rep.to_csv())
        status = "PASS" if rep.passed else "FAIL"
        print(f"{rep.lemma_id}: max ratio {rep.max_ratio:.6g} "
              f"(frozen {rep.frozen_constant:.6g}) {status}")
        if not rep.passed:
            failed.append(rep.lemma_id)
    finish_manifest(outdir, manifest,
                    [f"regression: {lid}" for lid in failed])
    if failed:
        print(f"bound regression in: {', '.join(failed)}", file=sys.stderr)
        return EXIT_REGRESSION
    return EXIT_OK


# --- table command ----------------------------------------------------------------


def cmd_table(args) -> int:
    if args.what == "weights":
        table = wt.WeightTable.build(t_min=args.t_min, t_max=args.t_max,
                                     n_points=args.n_points)
        sys.stdout.write(table.to_csv())
        return EXIT_OK
    if args.what == "horizons":
        norms = [float(x) for x in args.norms.split(",")]
        cols = ["u0_norm", "Tstar", "Tstar_saturated", "Tstar_closed_form",
                "Tomega", "Tomega_saturated"]
        rows = []
        for nrm in norms:
            inp = wt.HorizonInput(bmo_norm=nrm, gamma=args.gamma, C=args.C, p=args.p)
            hs = wt.horizon_Tstar(inp)
            ho = wt.horizon_Tomega(inp)
            rows.append({"u0_norm": nrm, "Tstar": hs.T,
                         "Tstar_saturated": int(hs.saturated),
                         "Tstar_closed_form": hs.closed_form_T,
                         "Tomega": ho.T, "Tomega_saturated": int(ho.saturated)})
        sys.stdout.write(",".join(cols) + "\n")
        for row in rows:
            sys.stdout.write(",".join(fmt(row[c]) for c in cols) + "\n")
        return EXIT_OK
    print(f"config error: unknown table {args.what!r}", file=sys.stderr)
    return EXIT_CONFIG


# --- entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscflow",
        description="Pseudo-spectral complexified Navier-Stokes toolbox")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("run-nse", "run-vorticity"):
        p = sub.add_parser(name, help=f"{name} from a JSON config file")
        p.add_argument("config", help="path to JSON run config")
        p.add_argument("--output", help="run directory (default derived from config hash)")
        p.add_argument("--seed", type=int, default=None, help="override config seed")

    pv = sub.add_parser("verify", help="inequality regression suite")
    pv.add_argument("--all", action="store_true", help="run every lemma")
    pv.add_argument("--lemma", action="append", default=[],
                    help="lemma id (repeatable); see --list for names")
    pv.add_argument("--calibrate", action="store_true",
                    help="freeze current max ratios as the calibration")
    pv.add_argument("--calibration", default="calibration.json")
    pv.add_argument("--output", help="output directory (default verify-out)")
    pv.add_argument("--seed", type=int, default=None)

    pt = sub.add_parser("table", help="emit weight or horizon tables as CSV")
    pt.add_argument("what", choices=["weights", "horizons"])
    pt.add_argument("--t-min", type=float, default=1e-6)
    pt.add_argument("--t-max", type=float, default=10.0)
    pt.add_argument("--n-points", type=int, default=200)
    pt.add_argument("--norms", default="0.5,1,2,4")
    pt.add_argument("--gamma", type=float, default=0.0)
    pt.add_argument("--C", type=float, default=1.0)
    pt.add_argument("--p", type=float, default=2.0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run-nse":
            return _run_solver(args, vorticity=False)
        if args.command == "run-vorticity":
            return _run_solver(args, vorticity=True)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "table":
            return cmd_table(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
