"""Closed-form and semi-analytic solution families of the evolution
u_t = |Du|^(h-3) <D^2u Du, Du>, used as oracles and initial data.

Families
--------
Barenblatt      compactly supported self-similar source solution,
                amplitude ~ t^(-1/(2h)), support radius R * t^(1/(2h)).
FriendlyGiant   separable solution X_r0(x) / (t - t0)^(1/(h-1)) built on the
                periodic radial profile X; the large-time Dirichlet attractor.
BlowUp          separable solution with time factor (t0 - t)^(-1/(h-1)),
                singular as t -> t0.
TravelingWave   planar front (d_h/|c|) [c^2 t - c x.nu]_+^(h/(h-1)).

The radial profile X comes from the change of variable
r(s) = kappa * int_0^s sin(sigma)^alpha d sigma on [0, pi], X(r(s)) = cos(s),
extended to r >= 0 by reflection with period 2*rbar.  On the nodes the
derivative is analytic, X'(r) = -sin(s(r))^(1-alpha)/kappa.

Note on the profile scaling X_r: the amplitude prefactor is
(2r/rbar)^(+(h+1)/(h-1)).  Both exponent signs were implemented and checked
against the pointwise PDE residual; only the positive exponent gives a
vanishing residual (the negative one is off by O(1)), and it is also the one
produced by the amplitude scaling symmetry
w(x,t) = lam * u(s x, lam^(h-1) s^(h+1) t) applied to the unit profile.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .operator import Homogeneity, eval_operator

# Default finite-difference step: 4th-order truncation ~ rounding noise.
FD_STEP_DEFAULT = float(np.finfo(float).eps ** (1.0 / 6.0))


class QuadratureError(RuntimeError):
    """Profile quadrature failed to reach the requested accuracy."""


class SingularRegionError(ValueError):
    """Residual evaluation requested too close to a non-smooth set."""


def giant_half_period(h: Homogeneity, tol: float = 1e-12) -> float:
    """rbar = kappa * int_0^pi sin(sigma)^alpha d sigma by adaptive quadrature."""
    val, err = integrate.quad(lambda s: math.sin(s) ** h.alpha, 0.0, math.pi,
                              epsabs=tol, epsrel=tol, limit=200)
    if err > 100 * tol * max(1.0, val):
        raise QuadratureError(f"half-period quadrature error estimate {err:.2e}")
    return h.kappa * val


# ---------------------------------------------------------------------------
# periodic radial profile
# ---------------------------------------------------------------------------

_PROFILE_CACHE: dict[tuple[float, int], "GiantProfile"] = {}


@dataclass(frozen=True)
class GiantProfile:
    """Tabulated monotone map s -> r and profile values X = cos(s).

    Nodes are graded toward both endpoints (where sin^alpha is merely
    algebraic) and the table stores the analytic derivative dr/ds, so the
    inverse map r -> s is evaluated with a local cubic Hermite model plus
    Newton refinement.  interp_order records that choice.
    """

    h: Homogeneity
    s_nodes: np.ndarray
    r_nodes: np.ndarray
    x_nodes: np.ndarray
    xprime_nodes: np.ndarray
    rbar: float
    quadrature_error: float
    interp_order: int = 3

    def invert_radius(self, r):
        """s(r) for r in [0, rbar], vectorized; |ds| error ~ table^(-4)."""
        r = np.asarray(r, dtype=float)
        idx = np.clip(np.searchsorted(self.r_nodes, r) - 1, 0, len(self.r_nodes) - 2)
        s0 = self.s_nodes[idx]
        ds = self.s_nodes[idx + 1] - s0
        r0 = self.r_nodes[idx]
        r1 = self.r_nodes[idx + 1]
        m0 = self.h.kappa * np.sin(s0) ** self.h.alpha * ds
        m1 = self.h.kappa * np.sin(self.s_nodes[idx + 1]) ** self.h.alpha * ds
        width = r1 - r0
        tau = np.clip((r - r0) / np.where(width > 0, width, 1.0), 0.0, 1.0)
        for _ in range(6):
            t2 = tau * tau
            t3 = t2 * tau
            val = (r0 * (2 * t3 - 3 * t2 + 1) + m0 * (t3 - 2 * t2 + tau)
                   + r1 * (-2 * t3 + 3 * t2) + m1 * (t3 - t2))
            der = (6 * (t2 - tau) * (r0 - r1) + m0 * (3 * t2 - 4 * tau + 1)
                   + m1 * (3 * t2 - 2 * tau))
            der = np.where(np.abs(der) > 1e-300, der, 1.0)
            tau = np.clip(tau - (val - r) / der, 0.0, 1.0)
        return s0 + tau * ds

    def _reduce(self, r):
        """Fold r >= 0 into [0, rbar] using the 2*rbar reflection; returns
        (folded radius, derivative parity)."""
        r = np.abs(np.asarray(r, dtype=float))
        rm = np.mod(r, 2.0 * self.rbar)
        reflect = rm > self.rbar
        rm = np.where(reflect, 2.0 * self.rbar - rm, rm)
        parity = np.where(reflect, -1.0, 1.0)
        return rm, parity

    def X(self, r):
        """Periodic C^1 profile value at radius r >= 0 (vectorized)."""
        rm, _ = self._reduce(r)
        out = np.cos(self.invert_radius(rm))
        return float(out) if out.ndim == 0 else out

    def X_prime(self, r):
        """dX/dr with the reflection parity; vanishes at r = 0 and r = rbar."""
        rm, parity = self._reduce(r)
        s = self.invert_radius(rm)
        out = -parity * np.sin(s) ** (1.0 - self.h.alpha) / self.h.kappa
        return float(out) if out.ndim == 0 else out

    def flux_identity_residual(self, interior_margin: int = 2) -> np.ndarray:
        """Residual of the profile ODE in conservative form at interior nodes.

        The face flux of the radial evolution is (1/h)|q|^(h-1) q, and the
        profile satisfies d/dr[(1/h)|X'|^(h-1) X'] = -X/(h-1) (equivalently
        |X'|^(h-1) X'' = -X/(h-1) where X'' exists).  Uses the analytic X'
        at the nodes and a second-order nonuniform first difference.  The
        default margin skips the nodes adjacent to r = 0 and r = rbar: X''
        is unbounded there and a difference formula straddling the endpoint
        cannot see the C^1 flux at full order.
        """
        from .radial import slope_flux

        h = self.h.h
        flux = slope_flux(self.xprime_nodes, self.h)
        r = self.r_nodes
        i = np.arange(max(interior_margin, 1), len(r) - max(interior_margin, 1))
        dp = r[i + 1] - r[i]
        dm = r[i] - r[i - 1]
        dflux = (dm ** 2 * flux[i + 1] - dp ** 2 * flux[i - 1]
                 - (dm ** 2 - dp ** 2) * flux[i]) / (dp * dm * (dp + dm))
        return dflux + self.x_nodes[i] / (h - 1.0)


def build_giant_profile(h: Homogeneity, n_nodes: int = 4097,
                        target_abs: float = 1e-12) -> GiantProfile:
    """Tabulate r(s) = kappa int_0^s sin^alpha on endpoint-graded nodes.

    Panel-by-panel adaptive quadrature; the summed error estimate is checked
    against target_abs (scaled by the panel count) and reported on failure.
    """
    if n_nodes < 64:
        raise ValueError("profile table needs at least 64 nodes")
    key = (h.h, n_nodes)
    cached = _PROFILE_CACHE.get(key)
    if cached is not None:
        return cached
    # Chebyshev grading clusters nodes at s = 0 and s = pi
    i = np.arange(n_nodes)
    s = 0.5 * math.pi * (1.0 - np.cos(math.pi * i / (n_nodes - 1)))
    s[0], s[-1] = 0.0, math.pi
    alpha = h.alpha
    integrand = lambda sig: math.sin(sig) ** alpha
    panels = np.empty(n_nodes - 1)
    err_total = 0.0
    for k in range(n_nodes - 1):
        val, err = integrate.quad(integrand, s[k], s[k + 1],
                                  epsabs=target_abs, epsrel=1e-12, limit=100)
        panels[k] = val
        err_total += err
    if err_total > 1e4 * target_abs:
        raise QuadratureError(
            f"profile quadrature achieved error estimate {err_total:.2e} "
            f"(target {target_abs:.0e} per panel)")
    r = h.kappa * np.concatenate(([0.0], np.cumsum(panels)))
    if not (np.diff(r) > 0).all():
        raise QuadratureError("tabulated r(s) is not strictly increasing")
    prof = GiantProfile(
        h=h,
        s_nodes=s,
        r_nodes=r,
        x_nodes=np.cos(s),
        xprime_nodes=-np.sin(s) ** (1.0 - alpha) / h.kappa,
        rbar=float(r[-1]),
        quadrature_error=float(err_total),
    )
    object.__setattr__(h, "_rbar", prof.rbar)
    _PROFILE_CACHE[key] = prof
    return prof


def dump_profile_csv(profile: GiantProfile, path) -> None:
    """Write the node table (s, r, X, Xprime) for inspection."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "r", "X", "Xprime"])
        for row in zip(profile.s_nodes, profile.r_nodes,
                       profile.x_nodes, profile.xprime_nodes):
            w.writerow([f"{v:.17g}" for v in row])


# ---------------------------------------------------------------------------
# solution families
# ---------------------------------------------------------------------------

def _radius(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return np.abs(x)
    return np.sqrt(np.einsum("...i,...i->...", x, x))


@dataclass(frozen=True)
class Barenblatt:
    """Self-similar source solution; R is the positivity radius at t = 1."""

    R: float
    h: Homogeneity

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("positivity radius R must be positive")

    def _check_time(self, t):
        if np.any(np.asarray(t) <= 0.0):
            raise ValueError("Barenblatt family is defined for t > 0")

    def radial_value(self, r, t):
        self._check_time(t)
        h = self.h.h
        r = np.asarray(r, dtype=float)
        t = np.asarray(t, dtype=float)
        ee = (h + 1.0) / h
        bracket = self.R ** ee - t ** (-ee / (2.0 * h)) * np.abs(r) ** ee
        out = (self.h.c_h * t ** (-1.0 / (2.0 * h))
               * np.maximum(bracket, 0.0) ** (h / (h - 1.0)))
        return float(out) if out.ndim == 0 else out

    def value(self, x, t):
        return self.radial_value(_radius(x), t)

    __call__ = value

    def support_radius(self, t):
        self._check_time(t)
        t = np.asarray(t, dtype=float)
        out = self.R * t ** (1.0 / (2.0 * self.h.h))
        return float(out) if out.ndim == 0 else out

    def singular_distance(self, x, t):
        """Distance to the non-C^2 locus: the origin and the free boundary."""
        r = _radius(x)
        return np.minimum(r, np.abs(self.support_radius(t) - r))

    def time_window(self):
        return (0.0, math.inf)

    def rescaled(self, lam: float, s: float) -> "Barenblatt":
        """Family member matching lam * u(s x, lam^(h-1) s^(h+1) t)."""
        h = self.h.h
        scale = (lam ** (h - 1.0) * s ** (h + 1.0)) ** (1.0 / (2.0 * h))
        return Barenblatt(R=self.R * scale / s, h=self.h)


@dataclass(frozen=True)
class FriendlyGiant:
    """Separable solution X_r0(x) / (t - t0)^(1/(h-1)).

    X_r0(x) = (2 r0/rbar)^((h+1)/(h-1)) X(rbar |x| / (2 r0)); positive on the
    ball |x| < r0 and zero on its boundary, so its restriction solves the
    homogeneous Dirichlet problem there.  prefactor_exponent_sign = -1
    reproduces the rejected scaling candidate (kept for the resolution test).
    """

    profile: GiantProfile
    r0: float
    t0: float = 0.0
    prefactor_exponent_sign: int = +1

    def __post_init__(self):
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")

    @property
    def h(self) -> Homogeneity:
        return self.profile.h

    def _prefactor(self) -> float:
        h = self.h.h
        expo = self.prefactor_exponent_sign * (h + 1.0) / (h - 1.0)
        return (2.0 * self.r0 / self.profile.rbar) ** expo

    def scaled_profile(self, r):
        """X_r0 at radius r (no time factor)."""
        arg = self.profile.rbar * np.asarray(r, dtype=float) / (2.0 * self.r0)
        return self._prefactor() * self.profile.X(arg)

    def radial_value(self, r, t):
        self._check_time(t)
        h = self.h.h
        t = np.asarray(t, dtype=float)
        out = self.scaled_profile(r) * (t - self.t0) ** (-1.0 / (h - 1.0))
        return float(out) if np.ndim(out) == 0 else out

    def _check_time(self, t):
        if np.any(np.asarray(t) <= self.t0):
            raise ValueError("friendly giant is defined for t > t0")

    def value(self, x, t):
        self._check_time(t)
        h = self.h.h
        t = np.asarray(t, dtype=float)
        out = self.scaled_profile(_radius(x)) * (t - self.t0) ** (-1.0 / (h - 1.0))
        return float(out) if np.ndim(out) == 0 else out

    __call__ = value

    def singular_distance(self, x, t):
        """Distance to the node spheres |x| = 2 k r0, k = 0, 1, ..."""
        r = _radius(x)
        rm = np.mod(r, 2.0 * self.r0)
        return np.minimum(rm, 2.0 * self.r0 - rm)

    def time_window(self):
        return (self.t0, math.inf)

    def rescaled(self, lam: float, s: float) -> "FriendlyGiant":
        """Family member matching lam * u(s x, lam^(h-1) s^(h+1) t)."""
        h = self.h.h
        scale = lam ** (h - 1.0) * s ** (h + 1.0)
        return FriendlyGiant(profile=self.profile, r0=self.r0 / s,
                             t0=self.t0 / scale,
                             prefactor_exponent_sign=self.prefactor_exponent_sign)


@dataclass(frozen=True)
class BlowUp:
    """Separable solution c_h [|x| - r0]_+^((h+1)/(h-1)) / (t0 - t)^(1/(h-1))."""

    r0: float
    t0: float
    h: Homogeneity

    def __post_init__(self):
        if self.r0 < 0:
            raise ValueError("r0 must be >= 0")

    def _check_time(self, t):
        if np.any(np.asarray(t) >= self.t0):
            raise ValueError("blow-up solution is defined for t < t0")

    def radial_value(self, r, t):
        self._check_time(t)
        h = self.h.h
        t = np.asarray(t, dtype=float)
        grow = np.maximum(np.abs(np.asarray(r, dtype=float)) - self.r0, 0.0) ** ((h + 1.0) / (h - 1.0))
        out = self.h.c_h * grow * (self.t0 - t) ** (-1.0 / (h - 1.0))
        return float(out) if np.ndim(out) == 0 else out

    def value(self, x, t):
        return self.radial_value(_radius(x), t)

    __call__ = value

    def singular_distance(self, x, t):
        r = _radius(x)
        return np.minimum(np.abs(r - self.r0), r) if self.r0 > 0 else r

    def time_window(self):
        return (-math.inf, self.t0)


@dataclass(frozen=True)
class TravelingWave:
    """Planar wave (d_h/|c|) [c^2 t - c x.nu]_+^(h/(h-1)); front at x.nu = c t."""

    nu: np.ndarray
    c: float
    h: Homogeneity

    def __post_init__(self):
        nu = np.atleast_1d(np.asarray(self.nu, dtype=float))
        if abs(np.linalg.norm(nu) - 1.0) > 1e-14:
            raise ValueError("direction nu must be a unit vector (within 1e-14)")
        if self.c == 0.0:
            raise ValueError("wave speed c must be nonzero")
        object.__setattr__(self, "nu", nu)

    def value(self, x, t):
        h = self.h.h
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        proj = x * self.nu[0] if x.ndim == 0 else np.einsum("...i,i->...", x, self.nu)
        bracket = np.maximum(self.c ** 2 * t - self.c * proj, 0.0)
        out = self.h.d_h / abs(self.c) * bracket ** (h / (h - 1.0))
        return float(out) if np.ndim(out) == 0 else out

    __call__ = value

    def singular_distance(self, x, t):
        x = np.asarray(x, dtype=float)
        proj = x * self.nu[0] if x.ndim == 0 else np.einsum("...i,i->...", x, self.nu)
        return np.abs(proj - self.c * np.asarray(t, dtype=float))

    def time_window(self):
        return (-math.inf, math.inf)


def rescaled_solution(u, lam: float, s: float, h: Homogeneity):
    """Amplitude/space/time symmetry wrapper w(x,t) = lam u(s x, lam^(h-1) s^(h+1) t)."""
    if lam <= 0 or s <= 0:
        raise ValueError("symmetry parameters lam and s must be positive")
    scale = lam ** (h.h - 1.0) * s ** (h.h + 1.0)

    def w(x, t):
        return lam * u(np.asarray(x, dtype=float) * s, scale * np.asarray(t, dtype=float))

    return w


# ---------------------------------------------------------------------------
# pointwise PDE residual by high-order differences
# ---------------------------------------------------------------------------

# 5-point 4th-order coefficients at offsets (-2, -1, 0, 1, 2)
_C1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_C2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFFSETS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])


def residual_at(solution, x, t, stencil_width: float | None = None):
    """|u_t - |Du|^(h-3) <D^2u Du, Du>| at (x, t), 4th-order differences.

    x may be a single point (d,) or a batch (m, d).  Rejects points within
    3 * stencil_width of the family's reported singular set (checked at t
    and at the extreme time-stencil offsets), and time stencils that leave
    the family's validity window.
    """
    w = FD_STEP_DEFAULT if stencil_width is None else float(stencil_width)
    if w <= 0:
        raise ValueError("stencil width must be positive")
    x_in = np.asarray(x, dtype=float)
    single = x_in.ndim == 1
    x = np.atleast_2d(x_in)
    m, d = x.shape
    t = float(t)
    t_lo, t_hi = solution.time_window()
    if not (t_lo < t - 2 * w and t + 2 * w < t_hi):
        raise SingularRegionError(
            f"time stencil [{t - 2 * w}, {t + 2 * w}] leaves the validity "
            f"window ({t_lo}, {t_hi})")
    for tt in (t - 2 * w, t, t + 2 * w):
        dist = np.atleast_1d(solution.singular_distance(x, tt))
        if (dist < 3.0 * w).any():
            bad = np.argmin(dist)
            raise SingularRegionError(
                f"point {x[bad]} is {dist[bad]:.3g} from the singular set of "
                f"{type(solution).__name__} at t = {tt} (need >= {3 * w:.3g})")

    h = solution.h

    # time derivative
    ut = np.zeros(m)
    for k, off in enumerate(_OFFSETS):
        if _C1[k] == 0.0:
            continue
        ut += _C1[k] * np.atleast_1d(solution.value(x, t + off * w))
    ut /= w

    center = np.atleast_1d(solution.value(x, t))
    grad = np.zeros((m, d))
    hess = np.zeros((m, d, d))
    for a in range(d):
        vals = np.empty((5, m))
        for k, off in enumerate(_OFFSETS):
            if off == 0.0:
                vals[k] = center
            else:
                xa = x.copy()
                xa[:, a] += off * w
                vals[k] = np.atleast_1d(solution.value(xa, t))
        grad[:, a] = _C1 @ vals / w
        hess[:, a, a] = _C2 @ vals / (w * w)
    for a in range(d):
        for b in range(a + 1, d):
            acc = np.zeros(m)
            for ka, offa in enumerate(_OFFSETS):
                if _C1[ka] == 0.0:
                    continue
                for kb, offb in enumerate(_OFFSETS):
                    if _C1[kb] == 0.0:
                        continue
                    xa = x.copy()
                    xa[:, a] += offa * w
                    xa[:, b] += offb * w
                    acc += _C1[ka] * _C1[kb] * np.atleast_1d(solution.value(xa, t))
            hess[:, a, b] = hess[:, b, a] = acc / (w * w)

    res = np.abs(ut - eval_operator(hess, grad, h))
    return float(res[0]) if single else res
