"""Named invariant/property checks wired into the command-line verifier.

Each check returns a CheckResult with the measured number and its threshold;
run_suite collects them per suite.  A small mutation harness can flip the
sign of the similarity amplitude constants or break the oddness of the
radial flux, to confirm that the checks actually guard those values: a
correct build passes every check, any mutation must fail at least one.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass

import numpy as np

from . import exact, grid, radial
from .operator import Homogeneity, eval_operator, eval_regularized, regularized_matrix

SUITES = ("operator", "exact", "radial", "grid")
MUTATIONS = ("c_h_sign", "d_h_sign", "flux_odd")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{status}  {self.name}: measured {self.measured:.3e} vs {self.threshold:.3e}{extra}"


@contextlib.contextmanager
def apply_mutation(name: str | None):
    """Temporarily corrupt one piece of the build (testing the tests)."""
    if name is None:
        yield
        return
    if name not in MUTATIONS:
        raise ValueError(f"unknown mutation {name!r}; choose from {MUTATIONS}")
    if name in ("c_h_sign", "d_h_sign"):
        attr = name[:3]
        original = Homogeneity.__post_init__

        def mutated(self):
            original(self)
            object.__setattr__(self, attr, -getattr(self, attr))

        Homogeneity.__post_init__ = mutated
        try:
            yield
        finally:
            Homogeneity.__post_init__ = original
    else:  # flux_odd: drop the sign of the face slope
        original_flux = radial.slope_flux

        def even_flux(q, h):
            return np.abs(q) ** h.h / h.h

        radial.slope_flux = even_flux
        try:
            yield
        finally:
            radial.slope_flux = original_flux


def _random_symmetric(rng, n, d):
    A = rng.standard_normal((n, d, d))
    return A + np.swapaxes(A, -1, -2)


# ---------------------------------------------------------------------------
# operator suite
# ---------------------------------------------------------------------------

def check_op_examples() -> CheckResult:
    h3, h2 = Homogeneity(3.0), Homogeneity(2.0)
    errs = [
        abs(eval_operator(np.eye(2), [1.0, 0.0], h3) - 1.0),
        abs(eval_operator(np.eye(3), [0.0, 0.0, 0.0], h2)),
        abs(eval_operator(np.diag([1.0, 2.0]), [3.0, 4.0], h2) - 8.2),
        abs(eval_regularized(np.eye(2), [0.0, 0.0], 0.5, 1.0, h2) - 1.0),
        abs(eval_regularized(np.diag([2.0, -2.0]), [1.0, 1.0], 0.0, 0.0, h3)),
        np.abs(regularized_matrix([0.0, 0.0], 0.1, 1.0, h3) - 0.1 * np.eye(2)).max(),
    ]
    m = float(max(errs))
    return CheckResult("operator.worked_examples", m <= 1e-13, m, 1e-13)


def check_op_homogeneity(n: int = 10000, seed: int = 11) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for hval in (1.5, 2.0, 3.0, 4.0):
        h = Homogeneity(hval)
        m = n // 4
        M = _random_symmetric(rng, m, 3)
        p = rng.standard_normal((m, 3))
        s = rng.uniform(0.2, 5.0, m)
        base = eval_operator(M, p, h)
        scaled = eval_operator(M, s[:, None] * p, h)
        rel = np.abs(scaled - s ** (hval - 1.0) * base) / np.maximum(np.abs(scaled), 1e-30)
        worst = max(worst, float(rel.max()))
    return CheckResult("operator.homogeneity_in_p", worst <= 1e-12, worst, 1e-12)


def check_op_linearity(n: int = 10000, seed: int = 12) -> CheckResult:
    rng = np.random.default_rng(seed)
    h = Homogeneity(2.5)
    M1 = _random_symmetric(rng, n, 2)
    M2 = _random_symmetric(rng, n, 2)
    p = rng.standard_normal((n, 2))
    a, b = rng.standard_normal(2)
    lhs = eval_operator(a * M1 + b * M2, p, h)
    rhs = a * eval_operator(M1, p, h) + b * eval_operator(M2, p, h)
    scale = np.maximum(np.abs(lhs), np.abs(rhs)) + 1e-30
    worst = float((np.abs(lhs - rhs) / scale).max())
    return CheckResult("operator.linearity_in_M", worst <= 1e-12, worst, 1e-12)


def check_op_rotation(n: int = 2000, seed: int = 13) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for hval in (1.5, 3.0, 4.0):
        h = Homogeneity(hval)
        m = n // 2
        M = _random_symmetric(rng, m, 3)
        p = rng.standard_normal((m, 3))
        Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        Mr = np.einsum("ij,njk,lk->nil", Q, M, Q)
        Mr = 0.5 * (Mr + np.swapaxes(Mr, -1, -2))
        pr = p @ Q.T
        base = eval_operator(M, p, h)
        rot = eval_operator(Mr, pr, h)
        # relative to the operator scale ||M|| |p|^(h-1); the raw value can
        # vanish by cancellation, which says nothing about the symmetry
        scale = np.linalg.norm(M, axis=(1, 2)) * np.linalg.norm(p, axis=1) ** (hval - 1.0)
        rel = np.abs(rot - base) / scale
        worst = max(worst, float(rel.max()))
    return CheckResult("operator.rotation_invariance", worst <= 1e-12, worst, 1e-12)


def check_op_odd_symmetry(n: int = 4000, seed: int = 14) -> CheckResult:
    rng = np.random.default_rng(seed)
    h = Homogeneity(1.7)
    M = _random_symmetric(rng, n, 2)
    p = rng.standard_normal((n, 2))
    diff = np.abs(eval_operator(-M, -p, h) + eval_operator(M, p, h))
    worst = float(diff.max())
    return CheckResult("operator.odd_symmetry", worst == 0.0, worst, 0.0)


def check_op_continuity() -> CheckResult:
    worst = 0.0
    M = np.array([[2.0, 1.0], [1.0, -3.0]])
    norm = np.linalg.norm(M, 2)
    for hval in (1.5, 2.0, 2.5):
        h = Homogeneity(hval)
        for k in range(1, 13):
            p = np.array([10.0 ** (-k), 0.5 * 10.0 ** (-k)])
            val = abs(eval_operator(M, p, h))
            bound = norm * np.linalg.norm(p) ** (hval - 1.0)
            worst = max(worst, val - bound * (1 + 1e-12))
    return CheckResult("operator.continuity_at_zero", worst <= 0.0, worst, 0.0)


def check_op_regularization_limit() -> CheckResult:
    h = Homogeneity(2.0)
    M = np.array([[1.0, 0.5], [0.5, 2.0]])
    p = np.array([0.8, -0.6])
    target = eval_operator(M, p, h)
    errs = [abs(eval_regularized(M, p, eps, delta, h) - target)
            for eps, delta in [(1e-2, 1e-2), (1e-4, 1e-4), (1e-7, 1e-7)]]
    ok = errs[0] > errs[1] > errs[2] and errs[2] <= 1e-6
    return CheckResult("operator.regularization_limit", ok, errs[2], 1e-6,
                       detail=f"errors {errs[0]:.1e} > {errs[1]:.1e} > {errs[2]:.1e}")


# ---------------------------------------------------------------------------
# exact-solutions suite
# ---------------------------------------------------------------------------

def check_exact_examples() -> CheckResult:
    h3, h2 = Homogeneity(3.0), Homogeneity(2.0)
    prof = exact.build_giant_profile(h3)
    giant = exact.FriendlyGiant(prof, r0=prof.rbar / 2.0)
    errs = [
        abs(exact.Barenblatt(1.0, h3).value(np.zeros(2), 1.0) - 0.25),
        abs(exact.Barenblatt(1.0, h3).value(np.array([2.0, 0.0]), 1.0)),
        abs(exact.Barenblatt(1.0, h2).value(np.zeros(2), 1.0) - 1.0 / 18.0),
        abs(exact.Barenblatt(1.0, h3).support_radius(16.0) - 16.0 ** (1.0 / 6.0)),
        abs(giant.value(np.zeros(2), 1.0) - 1.0),
        abs(giant.value(np.zeros(2), 2.0) - 2.0 ** -0.5),
        abs(exact.BlowUp(0.0, 1.0, h3).value(np.array([1.0, 0.0]), 0.0) - 0.25),
        abs(exact.BlowUp(0.0, 1.0, h3).value(np.array([1.0, 0.0]), 0.75) - 0.5),
        abs(exact.TravelingWave(np.array([1.0, 0.0]), 1.0, h2).value(np.zeros(2), 1.0) - 0.5),
    ]
    m = float(max(errs))
    return CheckResult("exact.worked_examples", m <= 1e-12, m, 1e-12)


def sample_smooth_points(solution, t: float, rng, n: int, h: Homogeneity):
    """Random evaluation points with a healthy margin from the singular set."""
    if isinstance(solution, exact.Barenblatt):
        supp = solution.support_radius(t)
        rr = rng.uniform(0.15 * supp, 0.85 * supp, n)
    elif isinstance(solution, exact.FriendlyGiant):
        rr = rng.uniform(0.15 * solution.r0, 0.9 * solution.r0, n)
    elif isinstance(solution, exact.BlowUp):
        rr = solution.r0 + rng.uniform(0.2, 0.8, n)
    else:
        rr = rng.uniform(0.2, 0.8, n)  # unused for waves (planar)
    th = rng.uniform(0.0, 2.0 * np.pi, n)
    pts = np.stack([rr * np.cos(th), rr * np.sin(th)], axis=1)
    if isinstance(solution, exact.TravelingWave):
        if abs(solution.nu[0] - 1.0) > 1e-12 or solution.c <= 0:
            raise ValueError("wave sampling assumes nu = e1 and c > 0")
        # strictly behind the front along nu, arbitrary transverse part
        back = solution.c * t - rng.uniform(0.2, 1.2, n)
        pts = np.stack([back, rng.uniform(-1.0, 1.0, n)], axis=1)
    return pts


def check_exact_residuals(n_points: int = 25, seed: int = 21,
                          tol: float = 1e-6) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for hval in (1.5, 2.0, 3.0, 4.0):
        h = Homogeneity(hval)
        prof = exact.build_giant_profile(h)
        families = [
            (exact.Barenblatt(1.0, h), 1.0),
            (exact.FriendlyGiant(prof, r0=prof.rbar / 2.0), 1.0),
            (exact.BlowUp(0.5, 2.0, h), 0.5),
            (exact.TravelingWave(np.array([1.0, 0.0]), 1.0, h), 1.0),
        ]
        for sol, t in families:
            pts = sample_smooth_points(sol, t, rng, n_points, h)
            res = exact.residual_at(sol, pts, t, 1e-3)
            worst = max(worst, float(np.max(res)))
    return CheckResult("exact.pde_residuals", worst <= tol, worst, tol)


def check_giant_flux_identity(tol: float = 1e-6) -> CheckResult:
    worst = 0.0
    for hval in (1.5, 2.0, 3.0, 4.0):
        prof = exact.build_giant_profile(Homogeneity(hval))
        worst = max(worst, float(np.abs(prof.flux_identity_residual()).max()))
    return CheckResult("exact.giant_flux_identity", worst <= tol, worst, tol)


def check_rbar_oracle() -> CheckResult:
    from scipy import special

    worst = 0.0
    for hval in (1.5, 2.0, 3.0, 4.0):
        h = Homogeneity(hval)
        prof = exact.build_giant_profile(h)
        a = h.alpha
        oracle = h.kappa * float(special.beta(0.5 * (a + 1.0), 0.5))
        worst = max(worst, abs(prof.rbar - oracle) / oracle)
    return CheckResult("exact.rbar_quadrature_vs_beta", worst <= 1e-10, worst, 1e-10)


def check_scaling_symmetry(seed: int = 22) -> CheckResult:
    rng = np.random.default_rng(seed)
    h = Homogeneity(3.0)
    worst = 0.0
    B = exact.Barenblatt(1.3, h)
    prof = exact.build_giant_profile(h)
    G = exact.FriendlyGiant(prof, r0=0.8)
    for lam, s in [(0.5, 2.0), (2.0, 0.7), (10.0, 1.0)]:
        for sol in (B, G):
            w = exact.rescaled_solution(sol.value, lam, s, h)
            member = sol.rescaled(lam, s)
            pts = rng.uniform(-0.5, 0.5, (40, 2))
            tt = rng.uniform(0.5, 2.0)
            diff = np.abs(w(pts, tt) - member.value(pts, tt))
            worst = max(worst, float(diff.max()))
    lam = 2.0
    for t in (0.5, 1.0):
        pts = rng.uniform(-1.0, 1.0, (50, 2))
        a = lam ** (1.0 / 6.0)
        diff = np.abs(a * B.value(a * pts, lam * t) - B.value(pts, t))
        worst = max(worst, float(diff.max()))
    return CheckResult("exact.scaling_symmetry", worst <= 1e-10, worst, 1e-10)


def check_prefactor_sign_resolution() -> CheckResult:
    """The kept profile scaling must solve the equation; the rejected
    exponent sign must visibly fail."""
    h = Homogeneity(3.0)
    prof = exact.build_giant_profile(h)
    good = exact.FriendlyGiant(prof, r0=0.9)
    bad = exact.FriendlyGiant(prof, r0=0.9, prefactor_exponent_sign=-1)
    pts = np.array([[0.5, 0.2], [0.3, 0.4], [0.6, 0.1]])
    res_good = float(np.max(exact.residual_at(good, pts, 1.2, 1e-3)))
    res_bad = float(np.min(exact.residual_at(bad, pts, 1.2, 1e-3)))
    ok = res_good <= 1e-6 and res_bad >= 1e-2
    return CheckResult("exact.profile_prefactor_sign", ok, res_good, 1e-6,
                       detail=f"rejected-sign residual {res_bad:.2e}")


# ---------------------------------------------------------------------------
# radial suite
# ---------------------------------------------------------------------------

def check_radial_barenblatt(n: int = 800, tol: float = 5e-3) -> CheckResult:
    h = Homogeneity(3.0)
    B = exact.Barenblatt(1.0, h)
    tpl = radial.RadialProfile(r_max=1.3, v=np.zeros(n), t=1.0)
    st = radial.sample_radial(B, tpl, 1.0)
    out = radial.radial_evolve(st, h, 2.0)
    err = float(np.abs(out.v - B.radial_value(out.r, 2.0)).max())
    return CheckResult("radial.barenblatt_oracle", err <= tol, err, tol)


def check_radial_conservation() -> CheckResult:
    h = Homogeneity(2.5)
    n = 256
    tpl = radial.RadialProfile(r_max=2.0, v=np.zeros(n), boundary="zero_flux")
    v0 = np.exp(-((tpl.r - 0.7) / 0.3) ** 2)
    st = radial.RadialProfile(r_max=2.0, v=v0, boundary="zero_flux")
    out = radial.radial_evolve(st, h, 1.0)
    drift = abs(out.mass() - st.mass())
    return CheckResult("radial.mass_conservation", drift <= 1e-10, drift, 1e-10)


def check_radial_comparison(seed: int = 31) -> CheckResult:
    rng = np.random.default_rng(seed)
    h = Homogeneity(3.0)
    n = 64
    tpl = radial.RadialProfile(r_max=1.0, v=np.zeros(n))
    lower = np.abs(rng.standard_normal(n))
    upper = lower + rng.uniform(0.0, 1.0, n)
    a = radial.RadialProfile(r_max=1.0, v=lower)
    b = radial.RadialProfile(r_max=1.0, v=upper)
    dt = 0.5 * min(radial.cfl_dt(a, h), radial.cfl_dt(b, h))
    worst = 0.0
    for _ in range(50):
        a = radial.radial_step(a, h, dt)
        b = radial.radial_step(b, h, dt)
        worst = max(worst, float((a.v - b.v).max()))
    return CheckResult("radial.discrete_comparison", worst <= 1e-12, worst, 1e-12)


def check_radial_monotone(seed: int = 32) -> CheckResult:
    rng = np.random.default_rng(seed)
    h = Homogeneity(2.0)
    worst = 0.0
    for _ in range(20):
        v = np.sort(rng.uniform(0.0, 1.0, 32))[::-1].copy()
        st = radial.RadialProfile(r_max=1.0, v=v, boundary="zero_flux")
        out = radial.radial_step(st, h, 0.9 * radial.cfl_dt(st, h))
        worst = max(worst, float(np.diff(out.v).max()))
    return CheckResult("radial.monotone_preserved", worst <= 1e-12, worst, 1e-12)


def check_radial_cfl() -> CheckResult:
    h3, h2 = Homogeneity(3.0), Homogeneity(2.0)
    n = 64
    zero = radial.RadialProfile(r_max=1.0, v=np.zeros(n), boundary="zero_flux")
    dr = zero.dr
    errs = [abs(radial.cfl_dt(zero, h3) - 0.4 * dr ** 2 / 1e-12) / (0.4 * dr ** 2 / 1e-12)]
    ramp = radial.RadialProfile(r_max=1.0, v=0.5 * zero.r, boundary="zero_flux")
    errs.append(0.0 if radial.cfl_dt(ramp, h3) >= 0.4 * dr ** 2 else 1.0)
    v = np.exp(-zero.r)
    s1 = radial.RadialProfile(r_max=1.0, v=v, boundary="zero_flux")
    s2 = radial.RadialProfile(r_max=1.0, v=2.0 * v, boundary="zero_flux")
    ratio = radial.cfl_dt(s1, h2) / radial.cfl_dt(s2, h2)
    errs.append(abs(ratio - 2.0))
    m = float(max(errs))
    return CheckResult("radial.cfl_examples", m <= 1e-12, m, 1e-12)


# ---------------------------------------------------------------------------
# grid suite
# ---------------------------------------------------------------------------

def check_grid_operator_exact() -> CheckResult:
    h3 = Homogeneity(3.0)
    g = grid.box_grid([1.0, 0.0], [0.5, 0.5], (17, 17))
    fld = grid.field_from(g, lambda p: 0.5 * np.einsum("ij,ij->i", p, p))
    errs = []
    for mode in ("central", "gradient-aligned"):
        params = grid.SchemeParams(h=h3, eps=0.0, delta=0.0, mode=mode)
        errs.append(abs(grid.grid_operator(fld, params, node=(8, 8)) - 1.0))
    glin = grid.box_grid([0.0, 0.0], [1.0, 1.0], (9, 9))
    flin = grid.field_from(glin, lambda p: 2.0 * p[:, 0] - 3.0 * p[:, 1])
    errs.append(float(np.abs(grid.grid_gradient(flin, node=(4, 4)) - [2.0, -3.0]).max()))
    m = float(max(errs))
    return CheckResult("grid.operator_exactness", m <= 1e-12, m, 1e-12)


def check_grid_cfl_example() -> CheckResult:
    h3 = Homogeneity(3.0)
    g = grid.box_grid([0.0, 0.0], [0.45, 0.45], (10, 10))
    fld = grid.field_from(g, lambda p: np.zeros(p.shape[0]))
    params = grid.SchemeParams(h=h3, eps=0.1, delta=1.0, cfl_theta=0.4)
    got = grid.grid_cfl_dt(fld, params)
    want = 0.4 * g.spacing[0] ** 2 / (2 * 2 * 0.1 + 2 * 2 * 1.0)
    err = abs(got - want) / want
    return CheckResult("grid.cfl_worked_example", err <= 1e-12, err, 1e-12)


def check_grid_max_bound(seed: int = 41) -> CheckResult:
    rng = np.random.default_rng(seed)
    h3 = Homogeneity(3.0)
    g = grid.box_grid([0.0, 0.0], [1.0, 1.0], (25, 25))
    vals = np.where(g.mask, rng.uniform(-1.0, 1.0, (25, 25)), 0.0)
    fld = grid.Field(grid=g, values=vals, t=0.0)
    bound = float(np.abs(vals).max())
    params = grid.SchemeParams(h=h3, eps=0.05, delta=1e-3)
    out = grid.grid_evolve(fld, params, 0.02)
    excess = float(np.abs(out.values).max()) - bound
    return CheckResult("grid.discrete_max_bound", excess <= 1e-10, excess, 1e-10)


def check_grid_ordering(seed: int = 42) -> CheckResult:
    rng = np.random.default_rng(seed)
    h3 = Homogeneity(3.0)
    g = grid.box_grid([0.0, 0.0], [1.0, 1.0], (21, 21))
    base = np.where(g.mask, rng.uniform(0.0, 1.0, (21, 21)), 0.0)
    bump = np.where(g.mask, rng.uniform(0.0, 0.5, (21, 21)), 0.0)
    a = grid.Field(grid=g, values=base, t=0.0)
    b = grid.Field(grid=g, values=base + bump, t=0.0)
    params = grid.SchemeParams(h=h3, eps=0.0, delta=1e-3)
    dt = 0.5 * min(grid.grid_cfl_dt(a, params), grid.grid_cfl_dt(b, params))
    ua = grid.grid_evolve(a, params, 30 * dt, fixed_dt=dt)
    ub = grid.grid_evolve(b, params, 30 * dt, fixed_dt=dt)
    worst = float((ua.values - ub.values).max())
    return CheckResult("grid.ordering_preserved", worst <= 1e-10, worst, 1e-10)


def check_grid_rotation(seed: int = 43) -> CheckResult:
    rng = np.random.default_rng(seed)
    h3 = Homogeneity(3.0)
    g = grid.box_grid([0.0, 0.0], [1.0, 1.0], (21, 21))
    vals = np.where(g.mask, rng.random((21, 21)), 0.0)
    worst = 0.0
    for mode in ("gradient-aligned", "central"):
        params = grid.SchemeParams(h=h3, eps=0.1 if mode == "central" else 0.0,
                                   delta=1e-3, mode=mode)
        f0 = grid.Field(grid=g, values=vals, t=0.0)
        f0r = grid.Field(grid=g, values=np.rot90(vals).copy(), t=0.0)
        dt = 0.5 * min(grid.grid_cfl_dt(f0, params), grid.grid_cfl_dt(f0r, params))
        a = grid.grid_evolve(f0, params, 10 * dt, fixed_dt=dt)
        b = grid.grid_evolve(f0r, params, 10 * dt, fixed_dt=dt)
        worst = max(worst, float(np.abs(np.rot90(a.values) - b.values).max()))
    return CheckResult("grid.rotation_commutes", worst == 0.0, worst, 0.0)


def check_grid_sign_preservation(seed: int = 44) -> CheckResult:
    rng = np.random.default_rng(seed)
    h2 = Homogeneity(2.0)
    g = grid.box_grid([0.0, 0.0], [1.0, 1.0], (21, 21))
    vals = np.where(g.mask, rng.uniform(0.0, 1.0, (21, 21)), 0.0)
    fld = grid.Field(grid=g, values=vals, t=0.0)
    params = grid.SchemeParams(h=h2, eps=0.0, delta=1e-3)
    out = grid.grid_evolve(fld, params, 0.02)
    worst = -float(out.values.min())
    return CheckResult("grid.sign_preservation", worst <= 1e-10, worst, 1e-10)


def check_grid_zero_data() -> CheckResult:
    h3 = Homogeneity(3.0)
    g = grid.box_grid([0.0, 0.0], [1.0, 1.0], (15, 15))
    fld = grid.field_from(g, lambda p: np.zeros(p.shape[0]))
    params = grid.SchemeParams(h=h3, eps=0.1, delta=1e-3)
    out = grid.grid_evolve(fld, params, 0.1)
    m = float(np.abs(out.values).max())
    return CheckResult("grid.zero_data_stays_zero", m == 0.0, m, 0.0)


_SUITE_CHECKS = {
    "operator": [check_op_examples, check_op_homogeneity, check_op_linearity,
                 check_op_rotation, check_op_odd_symmetry, check_op_continuity,
                 check_op_regularization_limit],
    "exact": [check_exact_examples, check_exact_residuals,
              check_giant_flux_identity, check_rbar_oracle,
              check_scaling_symmetry, check_prefactor_sign_resolution],
    "radial": [check_radial_barenblatt, check_radial_conservation,
               check_radial_comparison, check_radial_monotone, check_radial_cfl],
    "grid": [check_grid_operator_exact, check_grid_cfl_example,
             check_grid_max_bound, check_grid_ordering, check_grid_rotation,
             check_grid_sign_preservation, check_grid_zero_data],
}


def run_suite(suites=SUITES, mutate: str | None = None) -> list:
    """Run the requested suites; with a mutation active, failures (including
    raised exceptions) are the expected outcome."""
    results = []
    err_ctx = np.errstate(all="ignore") if mutate else contextlib.nullcontext()
    with apply_mutation(mutate), err_ctx:
        exact._PROFILE_CACHE.clear()
        for suite in suites:
            if suite not in _SUITE_CHECKS:
                raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
            for fn in _SUITE_CHECKS[suite]:
                try:
                    results.append(fn())
                except Exception as exc:  # mutated builds may blow up outright
                    results.append(CheckResult(
                        name=f"{suite}.{fn.__name__}", passed=False,
                        measured=float("nan"), threshold=float("nan"),
                        detail=f"{type(exc).__name__}: {exc}"))
    exact._PROFILE_CACHE.clear()
    return results
