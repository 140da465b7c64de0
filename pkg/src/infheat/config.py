"""Declarative experiment configuration (YAML).

A config is a flat, sectioned mapping; every cross-field precondition is
checked at load time and violations name the offending rule.  Parsing is
canonicalizing: serialize(parse(text)) is stable, and the sha256 of the
canonical form identifies the run in its manifest.

Sections and keys (defaults in parentheses):

equation:   h (required), eps (0), delta (1e-3),
            source: kind (zero) | linear | bounded_slope, coeff, bound
problem:    solver: radial | grid;  kind: cauchy | dirichlet
geometry:   radial: r_max, boundary (dirichlet) | zero_flux, boundary_value (0)
            grid:   dimension (2), and either radius (ball / truncated
                    Cauchy) or center + half_extent (box)
initial:    family: barenblatt | giant | blowup | wave | bump | two_bump | zero
            plus family parameters (R, r0, amplitude, width, center, nu, c, ...)
time:       t0 (0), t_end (required), snapshots_per_decade (8) and/or
            snapshot_times (explicit list)
grid:       n: cell count (radial) or node counts per axis (grid)
scheme:     mode (gradient-aligned) | central, cfl_theta (0.4),
            rho_cells (2), grad_threshold (1e-12)
output:     dir (required for evolve), write_csv_fields (false)
"""

from __future__ import annotations

import copy
import hashlib
import math

import numpy as np
import yaml

from .operator import Homogeneity, Source


class ConfigError(ValueError):
    """Invalid configuration; the message names the violated rule."""


_DEFAULTS = {
    "equation": {"eps": 0.0, "delta": 1e-3,
                 "source": {"kind": "zero", "coeff": 0.0, "bound": 0.0}},
    "problem": {"kind": "cauchy"},
    "geometry": {"boundary": "dirichlet", "boundary_value": 0.0,
                 "dimension": 2},
    "time": {"t0": 0.0, "snapshots_per_decade": 8, "snapshot_times": []},
    "scheme": {"mode": "gradient-aligned", "cfl_theta": 0.4,
               "rho_cells": 2.0, "grad_threshold": 1e-12},
    "output": {"dir": "", "write_csv_fields": False},
}

_FAMILIES = ("barenblatt", "giant", "blowup", "wave", "bump", "two_bump", "zero")


def _require(cond: bool, rule: str):
    if not cond:
        raise ConfigError(rule)


def parse_config(data: dict) -> dict:
    """Validate a raw mapping and return the canonical config dict."""
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a mapping")
    cfg = copy.deepcopy(_DEFAULTS)
    for section, content in data.items():
        if section not in ("equation", "problem", "geometry", "initial",
                           "time", "grid", "scheme", "output"):
            raise ConfigError(f"config: unknown section {section!r}")
        if not isinstance(content, dict):
            raise ConfigError(f"{section}: must be a mapping")
        base = cfg.setdefault(section, {})
        for key, val in content.items():
            if key == "source" and isinstance(val, dict):
                base["source"].update(val)
            else:
                base[key] = val

    eq = cfg["equation"]
    _require("h" in eq, "equation.h: required")
    _require(isinstance(eq["h"], (int, float)) and eq["h"] > 1.0,
             "equation.h: h > 1 required")
    _require(eq["eps"] >= 0.0, "equation.eps: eps >= 0 required")
    _require(eq["delta"] >= 0.0, "equation.delta: delta >= 0 required")
    _require(not (eq["delta"] == 0.0 and eq["h"] < 3.0),
             "equation.delta: delta > 0 required for h < 3")
    src = eq["source"]
    _require(src["kind"] in ("zero", "linear", "bounded_slope"),
             "equation.source.kind: one of zero | linear | bounded_slope")
    _require(src["kind"] == "zero" or abs(src["coeff"]) <= src["bound"],
             "equation.source: |coeff| <= bound (linear growth) required")

    pb = cfg["problem"]
    _require(pb.get("solver") in ("radial", "grid"),
             "problem.solver: one of radial | grid required")
    _require(pb["kind"] in ("cauchy", "dirichlet"),
             "problem.kind: one of cauchy | dirichlet")

    geo = cfg["geometry"]
    if pb["solver"] == "radial":
        _require("r_max" in geo and geo["r_max"] > 0,
                 "geometry.r_max: positive radius required for radial solver")
        _require(geo["boundary"] in ("dirichlet", "zero_flux"),
                 "geometry.boundary: one of dirichlet | zero_flux")
    else:
        _require(geo["dimension"] in (1, 2, 3),
                 "geometry.dimension: one of 1 | 2 | 3")
        has_ball = "radius" in geo and geo.get("radius", 0) > 0
        has_box = "half_extent" in geo
        _require(has_ball or has_box,
                 "geometry: grid solver needs radius (ball) or half_extent (box)")

    ini = cfg.get("initial")
    _require(isinstance(ini, dict) and "family" in ini,
             "initial.family: required")
    _require(ini["family"] in _FAMILIES,
             f"initial.family: one of {' | '.join(_FAMILIES)}")

    tm = cfg["time"]
    _require("t_end" in tm, "time.t_end: required")
    _require(tm["t_end"] > tm["t0"], "time: t_end > t0 required")
    if ini["family"] in ("barenblatt", "giant"):
        _require(tm["t0"] > 0.0,
                 "time.t0: must be positive for decaying exact initial data")

    gr = cfg.get("grid")
    _require(isinstance(gr, dict) and "n" in gr, "grid.n: required")
    if pb["solver"] == "radial":
        _require(isinstance(gr["n"], int) and gr["n"] >= 16,
                 "grid.n: radial cell count must be an integer >= 16")
    else:
        n = gr["n"]
        if isinstance(n, int):
            gr["n"] = [n] * geo["dimension"]
        _require(len(gr["n"]) == geo["dimension"],
                 "grid.n: one node count per axis required")
        _require(all(isinstance(k, int) and k >= 8 for k in gr["n"]),
                 "grid.n: node counts must be integers >= 8")

    sch = cfg["scheme"]
    _require(sch["mode"] in ("gradient-aligned", "central"),
             "scheme.mode: one of gradient-aligned | central")
    _require(0.0 < sch["cfl_theta"] < 1.0, "scheme.cfl_theta: in (0,1) required")
    _require(sch["rho_cells"] >= 1.0, "scheme.rho_cells: >= 1 required")
    return cfg


def load_config(path) -> dict:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return parse_config(data or {})


def canonical_yaml(cfg: dict) -> str:
    """Stable serialization: sorted keys, default flow off."""
    return yaml.safe_dump(cfg, sort_keys=True, default_flow_style=False)


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_yaml(cfg).encode()).hexdigest()


def homogeneity_of(cfg: dict) -> Homogeneity:
    return Homogeneity(float(cfg["equation"]["h"]))


def source_of(cfg: dict) -> Source:
    src = cfg["equation"]["source"]
    if src["kind"] == "zero":
        return Source.zero()
    return Source(src["kind"], float(src["coeff"]), float(src["bound"]))


def snapshot_times(cfg: dict) -> list:
    """Geometric schedule t_k = 10^(k/per_decade) clipped to (t0, t_end],
    merged with any explicit snapshot_times, always including t_end."""
    tm = cfg["time"]
    t0, t_end = float(tm["t0"]), float(tm["t_end"])
    times = set(float(t) for t in tm.get("snapshot_times", [])
                if t0 < t <= t_end)
    per = int(tm.get("snapshots_per_decade", 8))
    if per > 0:
        start = t0 if t0 > 0 else min(1.0, t_end)
        k0 = math.ceil(math.log10(max(start, 1e-300)) * per)
        k1 = math.floor(math.log10(t_end) * per)
        for k in range(int(k0), int(k1) + 1):
            t = 10.0 ** (k / per)
            if t0 < t <= t_end:
                times.add(t)
    times.add(t_end)
    return sorted(times)


def initial_radial(cfg: dict, r: np.ndarray) -> np.ndarray:
    """Sample the configured initial data on radial cell centers."""
    from . import exact

    ini = cfg["initial"]
    fam = ini["family"]
    h = homogeneity_of(cfg)
    t0 = float(cfg["time"]["t0"])
    if fam == "zero":
        return np.zeros_like(r)
    if fam == "barenblatt":
        sol = exact.Barenblatt(float(ini.get("R", 1.0)), h)
        return np.asarray(sol.radial_value(r, t0), dtype=float)
    if fam == "giant":
        prof = exact.build_giant_profile(h)
        sol = exact.FriendlyGiant(prof, r0=float(ini.get("r0", prof.rbar / 2)),
                                  t0=float(ini.get("t_origin", 0.0)))
        return np.asarray(sol.radial_value(r, t0), dtype=float)
    if fam == "bump":
        amp = float(ini.get("amplitude", 1.0))
        width = float(ini.get("width", 1.0))
        center = float(ini.get("center", 0.0))
        power = float(ini.get("power", 2.0))
        return amp * np.maximum(1.0 - ((r - center) / width) ** 2, 0.0) ** power
    if fam == "two_bump":
        a1 = float(ini.get("amplitude", 1.0))
        a2 = float(ini.get("amplitude2", 0.6))
        c1 = float(ini.get("center", 0.4))
        c2 = float(ini.get("center2", 1.3))
        w1 = float(ini.get("width", 0.35))
        w2 = float(ini.get("width2", 0.3))
        return (a1 * np.maximum(1.0 - ((r - c1) / w1) ** 2, 0.0) ** 2
                + a2 * np.maximum(1.0 - ((r - c2) / w2) ** 2, 0.0) ** 2)
    raise ConfigError(f"initial.family: {fam!r} is not radial-compatible")


def initial_grid_fn(cfg: dict):
    """Pointwise initial-data callable for grid problems."""
    from . import exact

    ini = cfg["initial"]
    fam = ini["family"]
    h = homogeneity_of(cfg)
    t0 = float(cfg["time"]["t0"])
    if fam == "zero":
        return lambda pts: np.zeros(pts.shape[0])
    if fam == "barenblatt":
        sol = exact.Barenblatt(float(ini.get("R", 1.0)), h)
        return lambda pts: np.asarray(sol.value(pts, t0), dtype=float)
    if fam == "wave":
        d = int(cfg["geometry"]["dimension"])
        nu = np.asarray(ini.get("nu", [1.0] + [0.0] * (d - 1)), dtype=float)
        sol = exact.TravelingWave(nu, float(ini.get("c", 1.0)), h)
        return lambda pts: np.asarray(sol.value(pts, t0), dtype=float)
    if fam == "giant":
        prof = exact.build_giant_profile(h)
        sol = exact.FriendlyGiant(prof, r0=float(ini.get("r0", prof.rbar / 2)),
                                  t0=float(ini.get("t_origin", 0.0)))
        return lambda pts: np.asarray(sol.value(pts, t0), dtype=float)
    if fam == "bump":
        amp = float(ini.get("amplitude", 1.0))
        width = float(ini.get("width", 1.0))
        power = float(ini.get("power", 2.0))

        def bump(pts):
            rr = np.linalg.norm(pts, axis=1)
            return amp * np.maximum(1.0 - (rr / width) ** 2, 0.0) ** power

        return bump
    raise ConfigError(f"initial.family: {fam!r} is not grid-compatible")


def wave_boundary(cfg: dict):
    """Time-dependent exact Dirichlet data for wave runs (None otherwise)."""
    from . import exact

    ini = cfg["initial"]
    if ini["family"] != "wave":
        return None
    d = int(cfg["geometry"]["dimension"])
    h = homogeneity_of(cfg)
    nu = np.asarray(ini.get("nu", [1.0] + [0.0] * (d - 1)), dtype=float)
    sol = exact.TravelingWave(nu, float(ini.get("c", 1.0)), h)
    return lambda pts, t: np.asarray(sol.value(pts, t), dtype=float)
