"""Measurement harness for large-time behaviour: decay-rate fits, support
tracking, self-similar and Dirichlet rescalings, attractor extraction, the
eigenvalue residual and the homogeneity (concavity-in-time) estimates.

Quantities measured here against their predicted values:

* Cauchy decay      max|u| ~ t^(-1/(2h)), support radius ~ t^(+1/(2h))
* Barenblatt gap    t^(1/(2h)) * sup|u - B_{R*,h}| -> 0
* Dirichlet decay   max|u| ~ t^(-1/(h-1))
* attractor         v(x,s) = (h-1)^(1/(h-1)) e^s u(x, e^((h-1)s)) -> G(x),
                    with -|DG|^(h-3) <D^2G DG, DG> = G on the domain
* homogeneity       u(x,t+tau) >= (t/(t+tau))^(1/(h-1)) u(x,t), i.e.
                    t^(1/(h-1)) u(x,t) nondecreasing in t

The Barenblatt gap is reported in the relative normalization
t^(+1/(2h)) * sup-gap (the solution itself decays at t^(-1/(2h)), so this is
the gap measured against the solution scale); the raw sup-gap is returned
alongside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .operator import Homogeneity, eval_operator
from .grid import Field
from .radial import RadialProfile

SUPPORT_THRESHOLD = 1e-10


@dataclass(frozen=True)
class TimeSeries:
    """Strictly increasing samples (t_k, value_k) of one scalar quantity."""

    name: str
    t: np.ndarray
    values: np.ndarray
    run_id: str = ""

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("t and values must be matching 1-D arrays")
        if not (np.diff(t) > 0).all():
            raise ValueError("sample times must be strictly increasing")
        if not np.isfinite(v).all():
            raise ValueError("series values must be finite")


@dataclass(frozen=True)
class RateFit:
    """Log-log least-squares slope over a window of >= 8 samples, >= 1 decade."""

    exponent: float
    intercept: float
    window: tuple
    residual_norm: float
    n_samples: int


def fit_decay_exponent(series: TimeSeries, window: tuple,
                       min_samples: int = 8, min_decades: float = 1.0) -> RateFit:
    """Least-squares slope of log(value) against log(t) inside the window."""
    lo, hi = float(window[0]), float(window[1])
    sel = (series.t >= lo) & (series.t <= hi)
    t = series.t[sel]
    v = series.values[sel]
    if t.size < min_samples:
        raise ValueError(f"window holds {t.size} samples, need >= {min_samples}")
    span = math.log10(t[-1] / t[0])
    if span < min_decades * (1.0 - 1e-9):
        raise ValueError(f"window spans {span:.2f} decades, need >= {min_decades}")
    if (v <= 0).any():
        raise ValueError("decay fit requires positive values")
    lt = np.log(t)
    lv = np.log(v)
    slope, intercept = np.polyfit(lt, lv, 1)
    resid = lv - (slope * lt + intercept)
    return RateFit(exponent=float(slope), intercept=float(intercept),
                   window=(lo, hi), residual_norm=float(np.sqrt(np.mean(resid ** 2))),
                   n_samples=int(t.size))


# ---------------------------------------------------------------------------
# support and rescalings
# ---------------------------------------------------------------------------

def support_radius(state, threshold: float = SUPPORT_THRESHOLD, center=None) -> float:
    """Largest |x| at which the sampled solution exceeds threshold (0 if none)."""
    if isinstance(state, RadialProfile):
        above = np.flatnonzero(state.v > threshold)
        return float(state.r[above[-1]]) if above.size else 0.0
    if isinstance(state, Field):
        grid = state.grid
        d = grid.dim
        if center is None:
            center = np.zeros(d)
        idx = np.argwhere(state.values > threshold)
        if idx.size == 0:
            return 0.0
        coords = grid.node_coords(idx)
        return float(np.linalg.norm(coords - np.asarray(center, dtype=float),
                                    axis=1).max())
    raise TypeError("expected a RadialProfile or Field")


def rescale_cauchy(u, lam: float, h: Homogeneity):
    """Whole-space rescaling wrapper u^lam(x,t) = lam^(1/(2h)) u(lam^(1/(2h)) x, lam t)."""
    if lam <= 0:
        raise ValueError("rescaling factor must be positive")
    a = lam ** (1.0 / (2.0 * h.h))

    def w(x, t):
        return a * u(a * np.asarray(x, dtype=float), lam * np.asarray(t, dtype=float))

    return w


@dataclass(frozen=True)
class BarenblattFit:
    """Best sup-norm fit of the self-similar profile at one time."""

    R_star: float
    sup_gap: float
    normalized_gap: float
    t: float


def fit_barenblatt(radii, values, t: float, h: Homogeneity,
                   threshold: float = SUPPORT_THRESHOLD, iters: int = 90) -> BarenblattFit:
    """Golden-section scan of R minimizing sup_r |u - B_{R,h}(., t)|.

    The scan bracket is [R_est/2, 2*R_est] with R_est = (sampled support
    radius) * t^(-1/(2h)), the similarity pullback of the support to t = 1.
    """
    from .exact import Barenblatt

    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    if radii.shape != values.shape or radii.ndim != 1:
        raise ValueError("radii and values must be matching 1-D arrays")
    above = np.flatnonzero(values > threshold)
    if above.size == 0:
        raise ValueError("cannot fit an empty field")
    supp = radii[above[-1]]
    r_est = supp * t ** (-1.0 / (2.0 * h.h))
    lo, hi = 0.5 * r_est, 2.0 * r_est

    def gap(R: float) -> float:
        return float(np.abs(values - Barenblatt(R, h).radial_value(radii, t)).max())

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = gap(c), gap(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = gap(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = gap(d)
    R_star = 0.5 * (a + b)
    g = gap(R_star)
    return BarenblattFit(R_star=float(R_star), sup_gap=g,
                         normalized_gap=float(t ** (1.0 / (2.0 * h.h)) * g), t=float(t))


# ---------------------------------------------------------------------------
# shell diagnostics
# ---------------------------------------------------------------------------

def interp_at(fld: Field, pts: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of a field at arbitrary points in the box."""
    grid = fld.grid
    d = grid.dim
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    f = (pts - grid.origin) / grid.spacing
    if (f < 0).any() or (f > np.array(grid.shape) - 1).any():
        raise ValueError("interpolation point outside the grid box")
    lo = np.minimum(np.floor(f), np.array(grid.shape, dtype=float) - 2).astype(int)
    frac = f - lo
    flat = fld.values.ravel()
    strides = np.empty(d, dtype=np.intp)
    strides[-1] = 1
    for k in range(d - 2, -1, -1):
        strides[k] = strides[k + 1] * grid.shape[k + 1]
    base = (lo * strides).sum(axis=1)
    out = np.zeros(pts.shape[0])
    for corner in np.indices((2,) * d).reshape(d, -1).T:
        w = np.ones(pts.shape[0])
        for k in range(d):
            w = w * (frac[:, k] if corner[k] == 1 else 1.0 - frac[:, k])
        out += w * flat[base + int(np.dot(corner, strides))]
    return out


def _shell_points(r: float, n_dirs: int, d: int) -> np.ndarray:
    if d == 2:
        th = 2.0 * math.pi * np.arange(n_dirs) / n_dirs
        return r * np.stack([np.cos(th), np.sin(th)], axis=1)
    if d == 3:
        # Fibonacci sphere
        i = np.arange(n_dirs) + 0.5
        phi = math.pi * (3.0 - math.sqrt(5.0)) * i
        z = 1.0 - 2.0 * i / n_dirs
        rho = np.sqrt(1.0 - z * z)
        return r * np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    return np.array([[r], [-r]], dtype=float)


def aleksandrov_gap(fld: Field, r: float, r_data: float, n_dirs: int = 64) -> float:
    """Reflection diagnostic max_{|x|=r+2*r_data} u - inf_{|x|=r} u.

    Nonpositive (up to interpolation error) for radially nonincreasing
    fields; reported as a symmetry-gap measure for evolved data whose
    initial support radius was r_data.  Requires r > r_data.
    """
    if r <= r_data:
        raise ValueError("inner shell must lie outside the data support radius")
    d = fld.grid.dim
    inner = interp_at(fld, _shell_points(r, n_dirs, d))
    outer = interp_at(fld, _shell_points(r + 2.0 * r_data, n_dirs, d))
    return float(outer.max() - inner.min())


# ---------------------------------------------------------------------------
# Dirichlet rescaling and attractor extraction
# ---------------------------------------------------------------------------

def _as_value_table(snapshots) -> tuple:
    times = np.array([s.t for s in snapshots], dtype=float)
    values = np.stack([s.v if isinstance(s, RadialProfile) else np.asarray(s.values)
                       for s in snapshots])
    if not (np.diff(times) > 0).all():
        raise ValueError("snapshots must be strictly increasing in time")
    return times, values


def dirichlet_rescale(snapshots, h: Homogeneity, s_values=None):
    """Rescaled profiles v(., s) = (h-1)^(1/(h-1)) e^s u(., e^((h-1)s)).

    With s_values omitted, uses exactly the snapshot times (s = ln t/(h-1)).
    Otherwise the stabilized quantity t^(1/(h-1)) u is interpolated linearly
    in ln t between snapshots; requested times outside the run are rejected.
    """
    times, values = _as_value_table(snapshots)
    if (times <= 0).any():
        raise ValueError("Dirichlet rescaling needs positive times")
    hm1 = h.h - 1.0
    amp = hm1 ** (1.0 / hm1)
    w = times[:, None] ** (1.0 / hm1) * values.reshape(times.size, -1)
    if s_values is None:
        s = np.log(times) / hm1
        v = amp * w
    else:
        s = np.asarray(s_values, dtype=float)
        t_req = np.exp(hm1 * s)
        if (t_req < times[0] * (1 - 1e-12)).any() or (t_req > times[-1] * (1 + 1e-12)).any():
            raise ValueError("requested rescaled times extrapolate beyond the run")
        lt = np.log(times)
        v = np.empty((s.size, w.shape[1]))
        for j, tr in enumerate(np.log(np.clip(t_req, times[0], times[-1]))):
            v[j] = amp * _interp_rows(lt, w, tr)
    return s, v.reshape((s.size,) + values.shape[1:])


def _interp_rows(xs: np.ndarray, rows: np.ndarray, x: float) -> np.ndarray:
    i = int(np.clip(np.searchsorted(xs, x) - 1, 0, xs.size - 2))
    th = (x - xs[i]) / (xs[i + 1] - xs[i])
    return (1.0 - th) * rows[i] + th * rows[i + 1]


@dataclass(frozen=True)
class GiantExtract:
    """Stabilized rescaled profile G, its decay-normalized form F, and the
    stabilization residual sup|v(s_last) - v(s_last - ds)|."""

    G: np.ndarray
    F: np.ndarray
    s_last: float
    residual: float
    converged: bool


def extract_giant(snapshots, h: Homogeneity, ds: float = 1.0,
                  tol: float = 1e-6) -> GiantExtract:
    """Take the last rescaled profile as the attractor estimate.

    The run must cover at least ds in rescaled time; if the successive
    sup-difference over ds still exceeds tol the estimate is returned
    flagged as non-converged.
    """
    times, _ = _as_value_table(snapshots)
    hm1 = h.h - 1.0
    s_last = math.log(times[-1]) / hm1
    s_prev = s_last - ds
    if math.exp(hm1 * s_prev) < times[0] * (1 - 1e-12):
        raise ValueError("run too short to measure stabilization over ds")
    s, v = dirichlet_rescale(snapshots, h, s_values=[s_prev, s_last])
    residual = float(np.abs(v[1] - v[0]).max())
    G = v[1]
    return GiantExtract(G=G, F=hm1 ** (-1.0 / hm1) * G, s_last=float(s_last),
                        residual=residual, converged=bool(residual <= tol))


# ---------------------------------------------------------------------------
# eigenvalue residual of the extracted attractor
# ---------------------------------------------------------------------------

def eigen_residual_radial(radii, G, h: Homogeneity, r_max: float,
                          grad_threshold: float | None = None,
                          boundary_margin: int = 2,
                          origin_margin: int = 8):
    """Residual of the attractor equation on a radial ball profile.

    Uses the same conservative discrete operator as the radial solver
    (face flux (1/h)|q|^(h-1) q, mirror at r = 0, zero trace at r_max):
    res = d/dr[flux] + G.  The pointwise Hessian form is not uniformly
    consistent near the gradient-degenerate origin, the conservative form
    is.  Nodes failing the gradient threshold (default 1e-6 * sup G / diam),
    within boundary_margin cells of r_max, or within origin_margin cells of
    the symmetry axis are flagged inadmissible: the gradient degenerates at
    the axis and the profile is only C^1 there (its second derivative blows
    up like r^(-2*alpha/(1+alpha))), so the first cells' truncation does not
    vanish with resolution.  Returns (residuals, admissible mask).
    """
    radii = np.asarray(radii, dtype=float)
    G = np.asarray(G, dtype=float)
    n = G.size
    dr = r_max / n
    q = np.empty(n + 1)
    q[0] = 0.0
    q[1:-1] = np.diff(G) / dr
    q[-1] = (0.0 - G[-1]) / (0.5 * dr)
    flux = np.abs(q) ** (h.h - 1.0) * q / h.h
    res = np.diff(flux) / dr + G
    if grad_threshold is None:
        grad_threshold = 1e-6 * float(np.abs(G).max()) / (2.0 * r_max)
    grad_c = np.gradient(G, radii)
    admissible = (np.abs(grad_c) > grad_threshold) \
        & (radii <= r_max - boundary_margin * dr) \
        & (radii >= origin_margin * dr)
    return res, admissible


def eigen_residual_grid(fld: Field, h: Homogeneity,
                        grad_threshold: float | None = None,
                        boundary_margin: int = 2):
    """Residual |Du|^(h-3)<D^2u Du, Du> + G at admissible interior nodes of a
    masked grid profile (zero on the mask boundary).

    Central second differences; admissible nodes have |DG| above the
    threshold and lie at least boundary_margin nodes inside the mask.
    Returns (residual array over interior nodes in argwhere order,
    admissible mask of the same length).
    """
    grid = fld.grid
    d = grid.dim
    vals = fld.values
    G = vals[grid.mask]
    inner = ndimage.binary_erosion(grid.mask, iterations=boundary_margin)
    sl_p = [np.roll(vals, -1, axis=k) for k in range(d)]
    sl_m = [np.roll(vals, +1, axis=k) for k in range(d)]
    grad = np.stack([(sl_p[k] - sl_m[k])[grid.mask] * (0.5 / grid.spacing[k])
                     for k in range(d)], axis=-1)
    hess = np.zeros((G.size, d, d))
    for k in range(d):
        hess[:, k, k] = ((sl_p[k] + sl_m[k]) - 2.0 * vals)[grid.mask] / grid.spacing[k] ** 2
    for a in range(d):
        for b in range(a + 1, d):
            pp = np.roll(np.roll(vals, -1, axis=a), -1, axis=b)
            mm = np.roll(np.roll(vals, +1, axis=a), +1, axis=b)
            pm = np.roll(np.roll(vals, -1, axis=a), +1, axis=b)
            mp = np.roll(np.roll(vals, +1, axis=a), -1, axis=b)
            cross = ((pp + mm) - (pm + mp))[grid.mask] / (4.0 * grid.spacing[a] * grid.spacing[b])
            hess[:, a, b] = hess[:, b, a] = cross
    res = eval_operator(hess, grad, h) + G
    if grad_threshold is None:
        diam = 2.0 * np.max(np.array(grid.shape) * grid.spacing) / 2.0
        grad_threshold = 1e-6 * float(np.abs(G).max()) / diam
    gnorm = np.sqrt((grad ** 2).sum(axis=-1))
    admissible = (gnorm > grad_threshold) & inner[grid.mask]
    return res, admissible


# ---------------------------------------------------------------------------
# homogeneity (Benilan-Crandall) checks
# ---------------------------------------------------------------------------

def benilan_crandall_violation(snapshots, h: Homogeneity) -> float:
    """Worst violation of u(t+tau) >= (t/(t+tau))^(1/(h-1)) u(t) over all
    snapshot pairs and sample sites.  Nonpositive means the homogeneity
    estimate holds on the sampled run."""
    times, values = _as_value_table(snapshots)
    flat = values.reshape(times.size, -1)
    hm1 = h.h - 1.0
    worst = -math.inf
    for i in range(times.size - 1):
        if times[i] <= 0:
            continue
        ratio = (times[i] / times[i + 1:]) ** (1.0 / hm1)
        viol = ratio[:, None] * flat[i][None, :] - flat[i + 1:]
        worst = max(worst, float(viol.max()))
    return worst


def scaled_monotonicity_defect(snapshots, h: Homogeneity) -> float:
    """Most negative increment of t^(1/(h-1)) u(x, t) between consecutive
    snapshots; >= -tolerance is the pointwise monotone-limit property."""
    times, values = _as_value_table(snapshots)
    w = times.reshape(-1, *([1] * (values.ndim - 1))) ** (1.0 / (h.h - 1.0)) * values
    return float(np.diff(w, axis=0).min())
