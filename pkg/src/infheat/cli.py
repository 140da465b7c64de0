"""Command-line front end: exact | evolve | asymptotics | verify.

Exit codes: 0 success, 1 failed checks, 2 invalid configuration or
arguments, 3 numerical abort during marching.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, checks, config as cfgmod, exact, io as iomod
from .asymptotics import (TimeSeries, benilan_crandall_violation, extract_giant,
                          eigen_residual_radial, fit_barenblatt,
                          fit_decay_exponent, scaled_monotonicity_defect,
                          support_radius)
from .grid import (NumericalAbort, SchemeParams, ball_grid, box_grid,
                   field_from, grid_cfl_dt, grid_evolve, smooth_cutoff)
from .operator import Homogeneity
from .radial import RadialProfile, cfl_dt, radial_evolve

EXIT_OK = 0
EXIT_CHECKS = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _family_from_args(args) -> tuple:
    h = Homogeneity(args.h)
    if args.family == "barenblatt":
        return exact.Barenblatt(args.R, h), max(0.0, args.t)
    if args.family == "giant":
        prof = exact.build_giant_profile(h)
        r0 = args.r0 if args.r0 is not None else prof.rbar / 2.0
        return exact.FriendlyGiant(prof, r0=r0, t0=args.t_origin), args.t
    if args.family == "blowup":
        return exact.BlowUp(args.r0 if args.r0 is not None else 0.0,
                            args.blowup_t0, h), args.t
    if args.family == "wave":
        nu = np.array([float(x) for x in args.nu.split(",")])
        return exact.TravelingWave(nu, args.c, h), args.t
    raise ValueError(f"unknown family {args.family!r}")


def cmd_exact(args) -> int:
    try:
        sol, t = _family_from_args(args)
    except (ValueError, TypeError) as exc:
        print(f"error: invalid exact-solution parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    h = sol.h
    if args.dump_profile:
        if not isinstance(sol, exact.FriendlyGiant):
            print("error: --dump-profile applies to the giant family only",
                  file=sys.stderr)
            return EXIT_CONFIG
        out = args.out or "giant_profile.csv"
        exact.dump_profile_csv(sol.profile, out)
        print(f"profile table written to {out} (rbar = {sol.profile.rbar:.9f})")
        return EXIT_OK

    if args.axis_max is not None:
        ax_max = args.axis_max
    elif isinstance(sol, exact.Barenblatt):
        ax_max = 1.5 * sol.support_radius(t)
    elif isinstance(sol, exact.FriendlyGiant):
        ax_max = sol.r0
    elif isinstance(sol, exact.BlowUp):
        ax_max = sol.r0 + 2.0
    else:
        ax_max = abs(sol.c) * abs(t) + 2.0
    xs = np.linspace(-ax_max, ax_max, args.axis_samples)
    pts = np.zeros((xs.size, 2))
    pts[:, 0] = xs
    vals = np.asarray(sol.value(pts, t), dtype=float)
    out = args.out or f"{args.family}_axis.csv"
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "u"])
        for x, u in zip(xs, vals):
            w.writerow([iomod.FMT % x, iomod.FMT % u])
    print(f"{xs.size} axis samples written to {out} "
          f"(u(0) = {sol.value(np.zeros(2), t):.9g})")

    if args.residual_checks > 0:
        rng = np.random.default_rng(args.seed)
        pts = checks.sample_smooth_points(sol, t, rng, args.residual_checks, h)
        res = exact.residual_at(sol, pts, t, args.stencil_width)
        worst = float(np.max(res))
        print(f"pointwise residual at {args.residual_checks} smooth points: "
              f"max {worst:.3e} (tolerance {args.residual_tol:.0e})")
        if worst > args.residual_tol:
            return EXIT_CHECKS
    return EXIT_OK


# ---------------------------------------------------------------------------
# evolve
# ---------------------------------------------------------------------------

def _run_radial(cfg: dict, run_dir: str) -> dict:
    h = cfgmod.homogeneity_of(cfg)
    geo = cfg["geometry"]
    n = int(cfg["grid"]["n"])
    t0 = float(cfg["time"]["t0"])
    template = RadialProfile(r_max=float(geo["r_max"]), v=np.zeros(n), t=t0,
                             boundary=geo["boundary"],
                             boundary_value=float(geo["boundary_value"]))
    v0 = cfgmod.initial_radial(cfg, template.r)
    state = RadialProfile(r_max=template.r_max, v=v0, t=t0,
                          boundary=template.boundary,
                          boundary_value=template.boundary_value)
    times = cfgmod.snapshot_times(cfg)
    snaps = [state]
    final = radial_evolve(state, h, float(cfg["time"]["t_end"]),
                          observer=snaps.append, observe_times=times,
                          theta=float(cfg["scheme"]["cfl_theta"]))
    iomod.write_radial_snapshots_csv(os.path.join(run_dir, "snapshots.csv"), snaps)
    rows = [(s.t, float(s.v.max()), support_radius(s, 1e-12), s.mass())
            for s in snaps]
    iomod.write_radial_diagnostics_csv(os.path.join(run_dir, "diagnostics.csv"), rows)
    return {"solver": "radial", "n_snapshots": len(snaps), "t_final": final.t}


def _run_grid(cfg: dict, run_dir: str) -> dict:
    h = cfgmod.homogeneity_of(cfg)
    geo = cfg["geometry"]
    sch = cfg["scheme"]
    params = SchemeParams(h=h, eps=float(cfg["equation"]["eps"]),
                          delta=float(cfg["equation"]["delta"]),
                          source=cfgmod.source_of(cfg),
                          cfl_theta=float(sch["cfl_theta"]), mode=sch["mode"],
                          grad_threshold=float(sch["grad_threshold"]),
                          rho_cells=float(sch["rho_cells"]))
    margin = int(math.ceil(params.rho_cells))
    shape = tuple(int(k) for k in cfg["grid"]["n"])
    boundary = cfgmod.wave_boundary(cfg)
    kwargs = {} if boundary is None else {"boundary": boundary}
    if "radius" in geo:
        g = ball_grid(float(geo["radius"]), shape, margin=margin, **kwargs)
    else:
        center = geo.get("center", [0.0] * len(shape))
        g = box_grid(center, geo["half_extent"], shape, margin=margin, **kwargs)
    init = cfgmod.initial_grid_fn(cfg)
    if cfg["problem"]["kind"] == "cauchy" and "radius" in geo:
        R = float(geo["radius"])
        raw = init
        init = lambda pts: smooth_cutoff(np.linalg.norm(pts, axis=1) / R) * raw(pts)
    t0 = float(cfg["time"]["t0"])
    fld = field_from(g, init, t=t0)
    times = cfgmod.snapshot_times(cfg)
    snaps = [fld]
    final = grid_evolve(fld, params, float(cfg["time"]["t_end"]),
                        observer=snaps.append, observe_times=times)
    cell_vol = g.cell_volume()
    rows = []
    for s in snaps:
        iomod.write_field_bin(os.path.join(run_dir, f"field_{s.t:017.9f}.bin"), s)
        if cfg["output"].get("write_csv_fields"):
            iomod.write_field_csv(os.path.join(run_dir, f"field_{s.t:017.9f}.csv"), s)
        rows.append((s.t, float(np.abs(s.values).max()), float(s.values.min()),
                     float((s.values > 1e-10).sum()) * cell_vol,
                     grid_cfl_dt(s, params)))
    iomod.write_grid_diagnostics_csv(os.path.join(run_dir, "diagnostics.csv"), rows)
    return {"solver": "grid", "n_snapshots": len(snaps), "t_final": final.t}


def cmd_evolve(args) -> int:
    try:
        cfg = cfgmod.load_config(args.config)
    except (cfgmod.ConfigError, OSError, Exception) as exc:
        if isinstance(exc, (cfgmod.ConfigError, OSError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        raise
    run_dir = args.out_dir or cfg["output"]["dir"]
    if not run_dir:
        print("error: output.dir: required (or pass --out-dir)", file=sys.stderr)
        return EXIT_CONFIG
    iomod.ensure_dir(run_dir)
    with open(os.path.join(run_dir, "config.yaml"), "w") as fh:
        fh.write(cfgmod.canonical_yaml(cfg))
    manifest = {
        "config_hash": cfgmod.config_hash(cfg),
        "package_version": __version__,
        "numpy_version": np.__version__,
        "python_version": sys.version.split()[0],
        "status": "ok",
    }
    t_wall = time.perf_counter()
    try:
        if cfg["problem"]["solver"] == "radial":
            info = _run_radial(cfg, run_dir)
        else:
            info = _run_grid(cfg, run_dir)
        manifest.update(info)
    except NumericalAbort as exc:
        manifest["status"] = f"aborted: {exc}"
        manifest["diagnostics"] = exc.diagnostics
        manifest["wall_time_s"] = time.perf_counter() - t_wall
        with open(os.path.join(run_dir, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
        print(f"error: numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    manifest["wall_time_s"] = time.perf_counter() - t_wall
    with open(os.path.join(run_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    print(f"run complete: {run_dir} ({manifest['n_snapshots']} snapshots, "
          f"{manifest['wall_time_s']:.1f}s)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# asymptotics
# ---------------------------------------------------------------------------

DEFAULT_TOLS = {"exponent": 0.05, "giant_gap": 5e-3, "eigen_extracted": 1e-2,
                "eigen_exact": 1e-3, "bc": 1e-6, "bc_monotone": 1e-8}


def _load_radial_run(run_dir: str):
    cfg_path = os.path.join(run_dir, "config.yaml")
    snap_path = os.path.join(run_dir, "snapshots.csv")
    for path in (cfg_path, snap_path):
        if not os.path.exists(path):
            raise FileNotFoundError(f"missing run file: {path}")
    cfg = cfgmod.load_config(cfg_path)
    if cfg["problem"]["solver"] != "radial":
        raise ValueError("asymptotics targets need a radial run directory")
    geo = cfg["geometry"]
    snaps = iomod.read_radial_snapshots_csv(
        snap_path, r_max=float(geo["r_max"]), boundary=geo["boundary"],
        boundary_value=float(geo["boundary_value"]))
    return cfg, snaps


def _target_rows(cfg, snaps, targets, window) -> list:
    h = cfgmod.homogeneity_of(cfg)
    hh = h.h
    rows = []
    tsel = [s for s in snaps if s.t > 0]
    times = np.array([s.t for s in tsel])
    lo, hi = window
    hi = min(hi, float(times.max()))

    def series(name, fn):
        return TimeSeries(name, times, np.array([fn(s) for s in tsel]))

    for target in targets:
        if target == "cauchy-decay":
            fit = fit_decay_exponent(series("max_v", lambda s: float(s.v.max())), (lo, hi))
            want = -1.0 / (2.0 * hh)
            rows.append(("cauchy-decay", f"[{lo:g},{hi:g}]", fit.exponent, want,
                         DEFAULT_TOLS["exponent"],
                         abs(fit.exponent - want) <= DEFAULT_TOLS["exponent"]))
        elif target == "support-rate":
            fit = fit_decay_exponent(series("support", lambda s: support_radius(s, 1e-12)),
                                     (lo, hi))
            want = 1.0 / (2.0 * hh)
            rows.append(("support-rate", f"[{lo:g},{hi:g}]", fit.exponent, want,
                         DEFAULT_TOLS["exponent"],
                         abs(fit.exponent - want) <= DEFAULT_TOLS["exponent"]))
        elif target == "dirichlet-decay":
            fit = fit_decay_exponent(series("max_v", lambda s: float(s.v.max())), (lo, hi))
            want = -1.0 / (hh - 1.0)
            rows.append(("dirichlet-decay", f"[{lo:g},{hi:g}]", fit.exponent, want,
                         DEFAULT_TOLS["exponent"],
                         abs(fit.exponent - want) <= DEFAULT_TOLS["exponent"]))
        elif target == "barenblatt-gap":
            decades = [t for t in (10.0, 100.0, 1000.0) if lo <= t <= hi]
            gaps = []
            for td in decades:
                snap = min(tsel, key=lambda s: abs(s.t - td))
                gaps.append(fit_barenblatt(snap.r, snap.v, snap.t, h).normalized_gap)
            worst_rise = max(np.diff(gaps)) if len(gaps) > 1 else math.inf
            rows.append(("barenblatt-gap", f"t={decades}",
                         worst_rise, "strictly decreasing", 0.0, worst_rise < 0.0))
        elif target == "giant":
            ext = extract_giant(snaps, h)
            prof = exact.build_giant_profile(h)
            r0 = float(cfg["geometry"]["r_max"])
            sol = exact.FriendlyGiant(prof, r0=r0)
            target_G = (hh - 1.0) ** (1.0 / (hh - 1.0)) * sol.scaled_profile(snaps[-1].r)
            gap = float(np.abs(ext.G - target_G).max())
            rows.append(("giant-profile", f"s={ext.s_last:.2f}", gap, 0.0,
                         DEFAULT_TOLS["giant_gap"],
                         gap <= DEFAULT_TOLS["giant_gap"] and ext.converged))
        elif target == "eigen-residual":
            ext = extract_giant(snaps, h)
            r0 = float(cfg["geometry"]["r_max"])
            res, adm = eigen_residual_radial(snaps[-1].r, ext.G, h, r0)
            worst = float(np.abs(res[adm]).max())
            rows.append(("eigen-residual-extracted", "", worst, 0.0,
                         DEFAULT_TOLS["eigen_extracted"],
                         worst <= DEFAULT_TOLS["eigen_extracted"]))
            prof = exact.build_giant_profile(h)
            sol = exact.FriendlyGiant(prof, r0=r0)
            n2 = 513
            r2 = (np.arange(n2) + 0.5) * (r0 / n2)
            Gex = (hh - 1.0) ** (1.0 / (hh - 1.0)) * sol.scaled_profile(r2)
            res2, adm2 = eigen_residual_radial(r2, Gex, h, r0)
            worst2 = float(np.abs(res2[adm2]).max())
            rows.append(("eigen-residual-exact-513", "", worst2, 0.0,
                         DEFAULT_TOLS["eigen_exact"],
                         worst2 <= DEFAULT_TOLS["eigen_exact"]))
        elif target == "benilan-crandall":
            viol = benilan_crandall_violation([s for s in tsel if s.t >= lo], h)
            rows.append(("benilan-crandall", f"t>={lo:g}", viol, 0.0,
                         DEFAULT_TOLS["bc"], viol <= DEFAULT_TOLS["bc"]))
        elif target == "bc-monotonicity":
            defect = scaled_monotonicity_defect([s for s in tsel if s.t >= lo], h)
            rows.append(("bc-monotonicity", f"t>={lo:g}", defect, 0.0,
                         DEFAULT_TOLS["bc_monotone"],
                         defect >= -DEFAULT_TOLS["bc_monotone"]))
        else:
            raise ValueError(f"unknown asymptotics target {target!r}")
    return rows


CAUCHY_TARGETS = ["cauchy-decay", "support-rate", "benilan-crandall"]
DIRICHLET_TARGETS = ["dirichlet-decay", "giant", "eigen-residual",
                     "benilan-crandall", "bc-monotonicity"]


def cmd_asymptotics(args) -> int:
    try:
        cfg, snaps = _load_radial_run(args.run)
    except (FileNotFoundError, ValueError, cfgmod.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.targets:
        targets = [t.strip() for t in args.targets.split(",") if t.strip()]
    else:
        targets = CAUCHY_TARGETS if cfg["problem"]["kind"] == "cauchy" \
            else DIRICHLET_TARGETS
    window = tuple(float(x) for x in args.window.split(","))
    try:
        rows = _target_rows(cfg, snaps, targets, window)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = args.report or os.path.join(args.run, "report.csv")
    with open(report, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["quantity", "window", "measured", "expected", "tolerance", "status"])
        for name, win, measured, expected, tol, ok in rows:
            w.writerow([name, win, measured, expected, tol,
                        "PASS" if ok else "FAIL"])
    all_ok = True
    for name, win, measured, expected, tol, ok in rows:
        status = "PASS" if ok else "FAIL"
        all_ok &= ok
        print(f"{status}  {name} {win}: measured {measured} vs {expected} "
              f"(tol {tol})")
    print(f"report written to {report}")
    return EXIT_OK if all_ok else EXIT_CHECKS


def cmd_verify(args) -> int:
    suites = checks.SUITES if args.suite in (None, "all") else (args.suite,)
    results = checks.run_suite(suites, mutate=args.mutate)
    for r in results:
        print(r.line())
    summary = {
        "suites": list(suites),
        "mutation": args.mutate,
        "n_checks": len(results),
        "n_failed": sum(not r.passed for r in results),
        "results": [{"name": r.name, "passed": r.passed, "measured": r.measured,
                     "threshold": r.threshold, "detail": r.detail}
                    for r in results],
    }
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
    print(f"{summary['n_checks'] - summary['n_failed']}/{summary['n_checks']} checks passed")
    return EXIT_OK if summary["n_failed"] == 0 else EXIT_CHECKS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="infheat",
        description="Numerical laboratory for the h-homogeneous "
                    "infinity-Laplacian evolution")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("exact", help="sample exact solutions and spot-check residuals")
    pe.add_argument("--family", required=True,
                    choices=["barenblatt", "giant", "blowup", "wave"])
    pe.add_argument("--h", type=float, required=True, dest="h")
    pe.add_argument("--R", type=float, default=1.0)
    pe.add_argument("--r0", type=float, default=None)
    pe.add_argument("--t-origin", type=float, default=0.0, dest="t_origin")
    pe.add_argument("--blowup-t0", type=float, default=1.0, dest="blowup_t0")
    pe.add_argument("--nu", type=str, default="1,0")
    pe.add_argument("--c", type=float, default=1.0)
    pe.add_argument("--t", type=float, default=1.0)
    pe.add_argument("--axis-samples", type=int, default=1001)
    pe.add_argument("--axis-max", type=float, default=None)
    pe.add_argument("--out", type=str, default=None)
    pe.add_argument("--dump-profile", action="store_true")
    pe.add_argument("--residual-checks", type=int, default=0)
    pe.add_argument("--residual-tol", type=float, default=1e-6)
    pe.add_argument("--stencil-width", type=float, default=1e-3)
    pe.add_argument("--seed", type=int, default=0)
    pe.set_defaults(func=cmd_exact)

    pv = sub.add_parser("evolve", help="run a configured experiment")
    pv.add_argument("--config", required=True)
    pv.add_argument("--out-dir", default=None)
    pv.set_defaults(func=cmd_evolve)

    pa = sub.add_parser("asymptotics", help="measure decay/attractor targets on a run")
    pa.add_argument("--run", required=True)
    pa.add_argument("--targets", default=None,
                    help="comma list: cauchy-decay,support-rate,barenblatt-gap,"
                         "dirichlet-decay,giant,eigen-residual,benilan-crandall,"
                         "bc-monotonicity")
    pa.add_argument("--window", default="10,1000")
    pa.add_argument("--report", default=None)
    pa.set_defaults(func=cmd_asymptotics)

    pf = sub.add_parser("verify", help="run the invariant/property suite")
    pf.add_argument("--suite", default="all",
                    choices=["all", "operator", "exact", "radial", "grid"])
    pf.add_argument("--mutate", default=None, choices=list(checks.MUTATIONS))
    pf.add_argument("--json", default=None)
    pf.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
