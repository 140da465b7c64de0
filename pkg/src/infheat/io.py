"""Snapshot and diagnostics files.

Radial runs write a single snapshots CSV (rows t, r, v) plus a diagnostics
CSV (t, max_v, support_radius, mass).  Grid runs write one binary dump per
snapshot (a JSON header line with dims/spacing/origin/time followed by the
raw row-major float64 block), optionally a CSV with node coordinates, and a
diagnostics CSV (t, max_abs_u, min_u, support_measure, dt).

All floats are written with repr-faithful %.17g, so identical runs produce
bitwise-identical files.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

from .grid import Field, Grid
from .radial import RadialProfile

FMT = "%.17g"


def write_radial_snapshots_csv(path, snapshots) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "r", "v"])
        for snap in snapshots:
            tstr = FMT % snap.t
            for r, v in zip(snap.r, snap.v):
                w.writerow([tstr, FMT % r, FMT % v])


def read_radial_snapshots_csv(path, r_max: float, boundary: str = "dirichlet",
                              boundary_value: float = 0.0):
    """Rebuild the snapshot list written by write_radial_snapshots_csv."""
    groups: dict[str, list] = {}
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if header[:3] != ["t", "r", "v"]:
            raise ValueError(f"unexpected radial snapshot header {header!r}")
        for row in rd:
            groups.setdefault(row[0], []).append(float(row[2]))
    return [RadialProfile(r_max=r_max, v=np.array(vals), t=float(key),
                          boundary=boundary, boundary_value=boundary_value)
            for key, vals in groups.items()]


def write_radial_diagnostics_csv(path, rows) -> None:
    """rows: iterable of (t, max_v, support_radius, mass)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "max_v", "support_radius", "mass"])
        for row in rows:
            w.writerow([FMT % x for x in row])


def write_grid_diagnostics_csv(path, rows) -> None:
    """rows: iterable of (t, max_abs_u, min_u, support_measure, dt)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "max_abs_u", "min_u", "support_measure", "dt"])
        for row in rows:
            w.writerow([FMT % x for x in row])


def write_field_bin(path, fld: Field) -> None:
    header = {
        "dims": list(fld.grid.shape),
        "spacing": [float(s) for s in fld.grid.spacing],
        "origin": [float(o) for o in fld.grid.origin],
        "time": float(fld.t),
        "dtype": "<f8",
        "order": "C",
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
        fh.write(np.ascontiguousarray(fld.values, dtype="<f8").tobytes())


def read_field_bin(path, mask=None, boundary=None):
    """Read a binary field dump; returns (Field, header).

    The mask defaults to all-interior-except-edge; pass the original mask to
    reconstruct the exact run geometry.
    """
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        raw = fh.read()
    shape = tuple(header["dims"])
    values = np.frombuffer(raw, dtype=header["dtype"]).reshape(shape).copy()
    if mask is None:
        mask = np.zeros(shape, dtype=bool)
        mask[tuple(slice(1, -1) for _ in shape)] = True
    kwargs = {} if boundary is None else {"boundary": boundary}
    grid = Grid(origin=np.array(header["origin"]), spacing=np.array(header["spacing"]),
                shape=shape, mask=mask, **kwargs)
    return Field(grid=grid, values=values, t=header["time"]), header


def write_field_csv(path, fld: Field) -> None:
    grid = fld.grid
    d = grid.dim
    idx = np.indices(grid.shape).reshape(d, -1).T
    coords = grid.node_coords(idx)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{k}" for k in range(d)] + ["u"])
        flat = fld.values.ravel()
        for row, u in zip(coords, flat):
            w.writerow([FMT % x for x in row] + [FMT % u])


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path
