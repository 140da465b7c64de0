"""Explicit d-dimensional solver for the regularized evolution
u_t = A(Du) : D^2u + H(u), with A(p) = eps*I + (|p|^2 + delta^2)^((h-3)/2) p(x)p
and Dirichlet data on the parabolic boundary.

Nodes live on a uniform Cartesian box; a boolean interior mask selects the
evolved nodes (general bounded domains are node-resolved, so the boundary
is honored to O(dx)).  Every non-interior node holds the boundary data
g(x, t) at all times.

Stencil modes
-------------
central           assemble D^2u from standard second and cross differences
                  and contract with A(Du).  Literal, but the cross-derivative
                  contraction is not monotone.
gradient-aligned  eps * (axis Laplacian) + (|Du|^2 + delta^2)^((h-3)/2) |Du|^2
                  times the second difference along q = Du/|Du| with step
                  rho = rho_cells * dx (multilinear interpolation off-grid;
                  zero contribution where the slope estimate is below
                  grad_threshold).  Default mode; the aligned second
                  difference is a convex-combination stencil, so ordering is
                  preserved in practice.

Two refinements in the aligned mode, both forced by measurement against the
exact compactly supported solutions:

* the degenerate coefficient uses max(central slope, Rouy-Tourin upwind
  slope)^2 per node.  The pure central estimate vanishes at symmetric peaks
  and underestimates across the peak cusp, which freezes the discrete
  maximum (resolution-independent sup error).  Where the central gradient
  is dead but the upwind slope is not, the second difference falls back to
  the steepest axis.
* rho_cells defaults to 2: with samples at distance dx the multilinear
  interpolation error dx^2/8 * D^2u divided by rho^2 = dx^2 acts as an O(1)
  spurious transverse diffusion; sampling at 2*dx cuts it by 4, which is
  what the 129^2 self-similar benchmark needs.

All kernel reductions are arranged as commutative pair sums, which makes a
90-degree grid rotation commute with the update bitwise in 2-D.  Updates are
pure gathers from the previous time level into a fresh array, so results do
not depend on how interior nodes would be partitioned across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .operator import Homogeneity, Source

CFL_FLOOR = 1e-12


class NumericalAbort(RuntimeError):
    """Explicit marching left the comparison-principle envelope."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


def _zero_boundary(pts, t):
    return np.zeros(pts.shape[0])


@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian box with an interior mask and Dirichlet data map.

    mask is True on evolved nodes; every masked node must have its full
    stencil neighborhood inside the array (so the mask may not touch the
    array edge), and must form a single connected component.
    boundary(points, t) supplies g on all non-interior nodes.
    """

    origin: np.ndarray
    spacing: np.ndarray
    shape: tuple
    mask: np.ndarray
    boundary: object = _zero_boundary

    def __post_init__(self):
        origin = np.atleast_1d(np.asarray(self.origin, dtype=float))
        spacing = np.atleast_1d(np.asarray(self.spacing, dtype=float))
        shape = tuple(int(n) for n in self.shape)
        mask = np.asarray(self.mask, dtype=bool)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "mask", mask)
        d = len(shape)
        if d not in (1, 2, 3):
            raise ValueError("grid dimension must be 1, 2 or 3")
        if origin.shape != (d,) or spacing.shape != (d,):
            raise ValueError("origin/spacing must match the grid dimension")
        if (spacing <= 0).any():
            raise ValueError("spacing must be positive")
        if mask.shape != shape:
            raise ValueError("mask shape must match the grid shape")
        if not mask.any():
            raise ValueError("interior mask is empty")
        for k in range(d):
            edge = [slice(None)] * d
            for j in (0, -1):
                edge[k] = j
                if mask[tuple(edge)].any():
                    raise ValueError("interior mask touches the box edge on "
                                     f"axis {k}; stencil neighbors would leave the box")
        _, ncomp = ndimage.label(mask)
        if ncomp != 1:
            raise ValueError(f"interior mask has {ncomp} connected components; expected 1")

    @property
    def dim(self) -> int:
        return len(self.shape)

    def axes(self) -> list:
        return [self.origin[k] + self.spacing[k] * np.arange(self.shape[k])
                for k in range(self.dim)]

    def node_coords(self, multi_idx: np.ndarray) -> np.ndarray:
        """Coordinates of nodes given integer multi-indices of shape (m, d)."""
        return self.origin + np.asarray(multi_idx, dtype=float) * self.spacing

    def interior_coords(self) -> np.ndarray:
        return self.node_coords(np.argwhere(self.mask))

    def boundary_coords(self) -> np.ndarray:
        return self.node_coords(np.argwhere(~self.mask))

    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))


@dataclass(frozen=True)
class Field:
    """Node-indexed values at a single time; boundary nodes hold g(., t)."""

    grid: Grid
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError("field values must match the grid shape")
        if not np.isfinite(values).all():
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", values)

    def interior_values(self) -> np.ndarray:
        return self.values[self.grid.mask]


@dataclass(frozen=True)
class SchemeParams:
    """Regularization, source and stencil choices for the explicit scheme."""

    h: Homogeneity
    eps: float = 0.0
    delta: float = 1e-3
    source: Source = field(default_factory=Source.zero)
    cfl_theta: float = 0.4
    mode: str = "gradient-aligned"
    grad_threshold: float = 1e-12
    rho_cells: float = 2.0

    def __post_init__(self):
        if self.eps < 0.0:
            raise ValueError("eps must be >= 0")
        if self.delta < 0.0:
            raise ValueError("delta must be >= 0")
        if self.delta == 0.0 and self.h.h < 3.0:
            raise ValueError("delta = 0 requires h >= 3")
        if not 0.0 < self.cfl_theta < 1.0:
            raise ValueError("cfl_theta must lie in (0, 1)")
        if self.mode not in ("gradient-aligned", "central"):
            raise ValueError(f"unknown stencil mode {self.mode!r}")
        if self.rho_cells < 1.0:
            raise ValueError("rho_cells must be >= 1")


def box_grid(center, half_extent, shape, boundary=_zero_boundary,
             mask=None, margin: int = 2) -> Grid:
    """Box grid centered at `center`; default mask evolves all nodes at
    least `margin` nodes away from the array edge (margin 2 leaves room for
    the default aligned-mode sampling reach)."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    half = np.atleast_1d(np.asarray(half_extent, dtype=float))
    shape = tuple(int(n) for n in shape)
    d = len(shape)
    n = np.array(shape, dtype=float)
    spacing = 2.0 * half / (n - 1.0)
    origin = center - half
    if mask is None:
        mask = _edge_free(shape, margin)
    return Grid(origin=origin, spacing=spacing, shape=shape, mask=mask,
                boundary=boundary)


def ball_grid(radius, shape, boundary=_zero_boundary, center=None,
              margin: int = 2) -> Grid:
    """Ball domain |x - center| < radius; the box adds `margin` node rings
    beyond the sphere so every stencil sample stays inside the array."""
    shape = tuple(int(n) for n in shape)
    d = len(shape)
    if center is None:
        center = np.zeros(d)
    n_min = min(shape)
    if n_min - 1 - 2 * margin <= 0:
        raise ValueError("ball grid too small for the requested margin")
    dx = 2.0 * radius / (n_min - 1 - 2 * margin)
    half = np.array([0.5 * dx * (nk - 1) for nk in shape])
    g = box_grid(center, half, shape, boundary=boundary, margin=margin)
    idx = np.indices(shape).reshape(d, -1).T
    coords = g.node_coords(idx)
    rr = np.linalg.norm(coords - np.asarray(center, dtype=float), axis=1)
    mask = (rr < radius).reshape(shape) & _edge_free(shape, margin)
    return Grid(origin=g.origin, spacing=g.spacing, shape=shape, mask=mask,
                boundary=boundary)


def _edge_free(shape, margin: int = 1) -> np.ndarray:
    out = np.zeros(shape, dtype=bool)
    out[tuple(slice(margin, -margin) for _ in shape)] = True
    return out


def field_from(grid: Grid, fn, t: float = 0.0) -> Field:
    """Sample fn(points) on interior nodes and g(., t) on boundary nodes."""
    d = grid.dim
    idx = np.indices(grid.shape).reshape(d, -1).T
    coords = grid.node_coords(idx)
    values = np.asarray(fn(coords), dtype=float).reshape(grid.shape)
    flat = values.ravel()
    bidx = np.flatnonzero(~grid.mask.ravel())
    flat[bidx] = grid.boundary(coords[bidx], t)
    return Field(grid=grid, values=values, t=t)


# ---------------------------------------------------------------------------
# stencil kernels
# ---------------------------------------------------------------------------

class _Stencil:
    """Precomputed flat-index gather tables for one grid."""

    def __init__(self, grid: Grid):
        self.grid = grid
        d = grid.dim
        shape = grid.shape
        strides = np.empty(d, dtype=np.intp)
        strides[-1] = 1
        for k in range(d - 2, -1, -1):
            strides[k] = strides[k + 1] * shape[k + 1]
        self.strides = strides
        self.center = np.flatnonzero(grid.mask.ravel())
        self.multi = np.argwhere(grid.mask)
        self.plus = [self.center + strides[k] for k in range(d)]
        self.minus = [self.center - strides[k] for k in range(d)]
        self.bidx = np.flatnonzero(~grid.mask.ravel())
        self.bcoords = grid.node_coords(np.argwhere(~grid.mask))
        self.inv_2dx = 0.5 / grid.spacing
        self.inv_dx2 = 1.0 / grid.spacing ** 2
        # node distance to the array edge limits the interpolation reach
        lo = self.multi.min(axis=0)
        hi = np.array(shape) - 1 - self.multi.max(axis=0)
        self.edge_margin = int(min(lo.min(), hi.min()))
        # corner offsets for multilinear interpolation, paired with antipodes
        corners = np.indices((2,) * d).reshape(d, -1).T
        order = []
        seen = set()
        for c in map(tuple, corners):
            if c in seen:
                continue
            anti = tuple(1 - v for v in c)
            order.append((c, anti))
            seen.add(c)
            seen.add(anti)
        self.corner_pairs = order

    def gradient(self, flat: np.ndarray):
        d = self.grid.dim
        return [(flat[self.plus[k]] - flat[self.minus[k]]) * self.inv_2dx[k]
                for k in range(d)]

    def interpolate(self, flat: np.ndarray, offsets: list, reach: int) -> np.ndarray:
        """Multilinear sample at node + offset (physical units, per-axis
        |offset| <= reach * spacing, reach <= edge_margin).

        The cell split uses floor(), whose fractional remainders are exact
        for these small ranges, and corner contributions are accumulated in
        antipodal pairs: mirrored offsets therefore produce bitwise-mirrored
        samples, which is what makes 2-D grid rotations commute exactly.
        """
        g = self.grid
        d = g.dim
        lo = []
        w_lo = []
        w_hi = []
        for k in range(d):
            f = offsets[k] / g.spacing[k]
            cell = np.minimum(np.floor(f), float(reach - 1)) if reach > 0 else np.floor(f)
            lo.append(cell.astype(np.intp))
            # each weight is one subtraction: sub(f, c) and sub(c+1, f) round
            # identically for mirrored offsets, keeping reflections bitwise
            w_lo.append((cell + 1.0) - f)
            w_hi.append(f - cell)
        base = self.center.copy()
        for k in range(d):
            base += lo[k] * self.strides[k]
        total = None
        for c, anti in self.corner_pairs:
            pair = None
            for corner in (c, anti):
                off = int(np.dot(corner, self.strides))
                w = None
                for k in range(d):
                    wk = w_hi[k] if corner[k] == 1 else w_lo[k]
                    w = wk if w is None else w * wk
                term = w * flat[base + off]
                pair = term if pair is None else pair + term
            total = pair if total is None else total + pair
        return total


def _pair_sum(terms: list):
    if len(terms) == 1:
        return terms[0]
    if len(terms) == 2:
        return terms[0] + terms[1]
    return (terms[0] + terms[1]) + terms[2]


def _stencil_for(grid: Grid) -> _Stencil:
    st = getattr(grid, "_stencil_cache", None)
    if st is None:
        st = _Stencil(grid)
        object.__setattr__(grid, "_stencil_cache", st)
    return st


def grid_gradient(fld: Field, node=None):
    """Central-difference gradient on interior nodes.

    Returns an (m, d) array in interior (argwhere) order, or the single
    gradient vector when a node multi-index is given.
    """
    st = _stencil_for(fld.grid)
    comps = st.gradient(fld.values.ravel())
    out = np.stack(comps, axis=-1)
    if node is None:
        return out
    node = tuple(node)
    pos = np.flatnonzero((st.multi == np.asarray(node)).all(axis=1))
    if pos.size == 0:
        raise ValueError(f"node {node} is not an interior node")
    return out[pos[0]]


def _rhs(flat: np.ndarray, st: _Stencil, params: SchemeParams):
    """Scheme right-hand side on interior nodes; also returns the max
    effective |Du|^2 feeding the CFL bound."""
    d = st.grid.dim
    h = params.h.h
    uc = flat[st.center]
    up = [flat[st.plus[k]] for k in range(d)]
    um = [flat[st.minus[k]] for k in range(d)]
    grad = [(up[k] - um[k]) * st.inv_2dx[k] for k in range(d)]
    p2 = _pair_sum([g * g for g in grad])

    if params.mode == "central":
        p2max = float(p2.max()) if p2.size else 0.0
        diag = [((up[k] + um[k]) - 2.0 * uc) * st.inv_dx2[k] for k in range(d)]
        quad_terms = [diag[k] * (grad[k] * grad[k]) for k in range(d)]
        quad = _pair_sum(quad_terms)
        cross_terms = []
        for a in range(d):
            for b in range(a + 1, d):
                ne = flat[st.center + st.strides[a] + st.strides[b]]
                sw = flat[st.center - st.strides[a] - st.strides[b]]
                nw = flat[st.center - st.strides[a] + st.strides[b]]
                se = flat[st.center + st.strides[a] - st.strides[b]]
                mab = ((ne + sw) - (nw + se)) * (st.inv_2dx[a] * st.inv_2dx[b])
                cross_terms.append(2.0 * mab * (grad[a] * grad[b]))
        if cross_terms:
            quad = quad + _pair_sum(cross_terms)
        coeff = _degenerate_power(p2, params.delta, h)
        rhs = coeff * quad
        if params.eps != 0.0:
            trace = _pair_sum(diag)
            rhs = params.eps * trace + rhs
    else:
        # upwind (Rouy-Tourin) slope per axis: max(backward, -forward, 0);
        # invariant under the axis flip that swaps backward and -forward
        slope = []
        for k in range(d):
            back = (uc - um[k]) * (2.0 * st.inv_2dx[k])
            fwd = (up[k] - uc) * (2.0 * st.inv_2dx[k])
            slope.append(np.maximum(np.maximum(back, -fwd), 0.0))
        p2_up = _pair_sum([s * s for s in slope])
        p2_eff = np.maximum(p2, p2_up)
        p2max = float(p2_eff.max()) if p2_eff.size else 0.0
        thr2 = params.grad_threshold ** 2
        active = p2_eff > thr2
        has_dir = p2 > thr2
        norm = np.sqrt(np.where(has_dir, p2, 1.0))
        reach = int(math.ceil(params.rho_cells))
        if reach > st.edge_margin:
            raise ValueError(
                f"sampling reach {reach} cells exceeds the interior margin "
                f"{st.edge_margin}; build the grid with margin >= {reach}")
        rho = params.rho_cells * float(st.grid.spacing[0])
        offs_p = [rho * grad[k] / norm for k in range(d)]
        offs_m = [-o for o in offs_p]
        s_plus = st.interpolate(flat, offs_p, reach)
        s_minus = st.interpolate(flat, offs_m, reach)
        dir2 = ((s_plus + s_minus) - 2.0 * uc) / (rho * rho)
        sec = [((up[k] + um[k]) - 2.0 * uc) * st.inv_dx2[k] for k in range(d)]
        steepest = sec[0]
        if d > 1:
            best = slope[0]
            for k in range(1, d):
                pick = slope[k] > best
                steepest = np.where(pick, sec[k], steepest)
                best = np.maximum(best, slope[k])
        dir2 = np.where(has_dir, dir2, steepest)
        coeff = np.where(active, _degenerate_power(p2_eff, params.delta, h) * p2_eff, 0.0)
        rhs = coeff * dir2
        if params.eps != 0.0:
            lap = _pair_sum(sec)
            rhs = params.eps * lap + rhs
    if not params.source.is_zero:
        rhs = rhs + params.source(uc)
    return rhs, p2max


def _degenerate_power(p2, delta: float, h: float):
    expo = 0.5 * (h - 3.0)
    s = p2 + delta * delta
    if expo == 0.0:
        return np.ones_like(s)
    return s ** expo


def grid_operator(fld: Field, params: SchemeParams, node=None):
    """Discrete A(Du):D^2u + H(u) on interior nodes (argwhere order)."""
    if params.mode == "gradient-aligned" and fld.grid.dim > 1:
        sp = fld.grid.spacing
        if not np.allclose(sp, sp[0], rtol=1e-12):
            raise ValueError("gradient-aligned mode requires isotropic spacing")
    st = _stencil_for(fld.grid)
    rhs, _ = _rhs(fld.values.ravel(), st, params)
    if node is None:
        return rhs
    pos = np.flatnonzero((st.multi == np.asarray(tuple(node))).all(axis=1))
    if pos.size == 0:
        raise ValueError(f"node {tuple(node)} is not an interior node")
    return float(rhs[pos[0]])


def grid_cfl_dt(fld: Field, params: SchemeParams) -> float:
    """min of the diffusion step bound theta*dx^2 / (2d*eps + 2d*(G^2+delta^2)^((h-1)/2))
    with G the max interior slope estimate, and the source slack 1/(2*bound)."""
    st = _stencil_for(fld.grid)
    _, p2max = _rhs(fld.values.ravel(), st, params)
    return _cfl_from_p2max(p2max, fld.grid, params)


def _cfl_from_p2max(p2max: float, grid: Grid, params: SchemeParams) -> float:
    h = params.h.h
    d = grid.dim
    dx2 = float(grid.spacing.min()) ** 2
    dmax = (p2max + params.delta ** 2) ** (0.5 * (h - 1.0))
    denom = 2.0 * d * params.eps + 2.0 * d * dmax
    dt = params.cfl_theta * dx2 / max(denom, CFL_FLOOR)
    if not params.source.is_zero and params.source.bound > 0.0:
        dt = min(dt, 0.5 / params.source.bound)
    return dt


def grid_step(fld: Field, params: SchemeParams, dt: float) -> Field:
    """One forward-Euler update; boundary refreshed at the post-step time."""
    limit = grid_cfl_dt(fld, params)
    if dt > limit * (1.0 + 1e-12):
        raise ValueError(f"dt = {dt:.3e} exceeds the stability bound {limit:.3e}")
    st = _stencil_for(fld.grid)
    flat = fld.values.ravel()
    rhs, _ = _rhs(flat, st, params)
    new = flat.copy()
    new[st.center] = flat[st.center] + dt * rhs
    t_new = fld.t + dt
    new[st.bidx] = fld.grid.boundary(st.bcoords, t_new)
    return Field(grid=fld.grid, values=new.reshape(fld.grid.shape), t=t_new)


def grid_evolve(fld: Field, params: SchemeParams, t_end: float,
                observer=None, observe_times=None, fixed_dt=None) -> Field:
    """March to t_end; dt = min(CFL bound, time to next event) or fixed_dt.

    With a zero source the discrete solution must stay inside the
    comparison envelope max|u| <= max over the parabolic boundary of |g|;
    growth beyond 10x that bound aborts with diagnostics.
    """
    if t_end < fld.t:
        raise ValueError("t_end must be >= current time")
    if params.mode == "gradient-aligned" and fld.grid.dim > 1:
        sp = fld.grid.spacing
        if not np.allclose(sp, sp[0], rtol=1e-12):
            raise ValueError("gradient-aligned mode requires isotropic spacing")
    st = _stencil_for(fld.grid)
    events = []
    if observe_times is not None:
        events = sorted(float(tt) for tt in observe_times if fld.t < tt <= t_end)
    flat = fld.values.ravel().copy()
    t = fld.t
    envelope = float(np.abs(flat).max()) if flat.size else 0.0
    next_event = events.pop(0) if events else None
    step_index = 0
    while t < t_end:
        rhs, p2max = _rhs(flat, st, params)
        if fixed_dt is None:
            dt = _cfl_from_p2max(p2max, fld.grid, params)
        else:
            dt = float(fixed_dt)
            limit = _cfl_from_p2max(p2max, fld.grid, params)
            if dt > limit * (1.0 + 1e-12):
                raise ValueError(f"fixed dt = {dt:.3e} exceeds the stability "
                                 f"bound {limit:.3e} at t = {t:.6g}")
        target = t_end if next_event is None else next_event
        if t + dt > target:
            dt = target - t
        flat[st.center] += dt * rhs
        t += dt
        step_index += 1
        gvals = fld.grid.boundary(st.bcoords, t)
        flat[st.bidx] = gvals
        if params.source.is_zero:
            if gvals.size:
                envelope = max(envelope, float(np.abs(gvals).max()))
            umax = float(np.abs(flat).max())
            if not math.isfinite(umax) or umax > 10.0 * envelope + 1e-12:
                raise NumericalAbort(
                    "max-norm left the comparison envelope",
                    {"t": t, "step": step_index, "max_abs_u": umax,
                     "boundary_bound": envelope})
        if next_event is not None and t >= next_event:
            if observer is not None:
                observer(Field(grid=fld.grid, values=flat.copy().reshape(fld.grid.shape), t=t))
            next_event = events.pop(0) if events else None
    return Field(grid=fld.grid, values=flat.reshape(fld.grid.shape), t=t)


# ---------------------------------------------------------------------------
# whole-space truncation
# ---------------------------------------------------------------------------

def smooth_cutoff(s):
    """C^inf transition: 1 for s <= 1/2, 0 for s >= 1, monotone between."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    out[s <= 0.5] = 1.0
    mid = (s > 0.5) & (s < 1.0)
    if mid.any():
        a = np.exp(-1.0 / (1.0 - s[mid]))       # vanishes at s = 1
        b = np.exp(-1.0 / (s[mid] - 0.5))       # vanishes at s = 1/2
        out[mid] = a / (a + b)
    return out


def truncate_unbounded(u0, R: float, shape, d: int | None = None) -> Field:
    """Truncated Cauchy problem on the ball B_R: data chi(|x|/R) * u0(x) on
    the initial slice and 0 on the lateral boundary.

    Doubling R (and the node count, to keep spacing) is the convergence
    knob; before the support reaches B_{R/2} the truncation is invisible.
    """
    if np.isscalar(shape):
        if d is None:
            raise ValueError("pass d when shape is scalar")
        shape = (int(shape),) * d
    grid = ball_grid(R, shape)
    def data(pts):
        r = np.linalg.norm(pts, axis=1)
        return smooth_cutoff(r / R) * np.asarray(u0(pts), dtype=float)
    return field_from(grid, data, t=0.0)
