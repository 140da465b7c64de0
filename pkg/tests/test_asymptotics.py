import numpy as np
import pytest

from infheat.asymptotics import (TimeSeries, aleksandrov_gap,
                                 benilan_crandall_violation, dirichlet_rescale,
                                 eigen_residual_grid, eigen_residual_radial,
                                 extract_giant, fit_barenblatt,
                                 fit_decay_exponent, interp_at, rescale_cauchy,
                                 scaled_monotonicity_defect, support_radius)
from infheat.exact import Barenblatt, FriendlyGiant, build_giant_profile
from infheat.grid import Field, ball_grid, box_grid, field_from
from infheat.operator import Homogeneity
from infheat.radial import RadialProfile, sample_radial

H3 = Homogeneity(3.0)
H2 = Homogeneity(2.0)


def test_timeseries_validation():
    with pytest.raises(ValueError):
        TimeSeries("x", [1.0, 1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        TimeSeries("x", [1.0, 2.0], [1.0, np.nan])


def test_fit_recovers_exact_power_law():
    t = 10.0 ** np.linspace(0.0, 3.0, 25)
    series = TimeSeries("v", t, t ** (-1.0 / 6.0))
    fit = fit_decay_exponent(series, (1.0, 1000.0))
    assert abs(fit.exponent + 1.0 / 6.0) <= 1e-12
    assert fit.residual_norm <= 1e-12
    assert fit.n_samples == 25


def test_fit_window_rules():
    t = np.linspace(1.0, 5.0, 30)
    series = TimeSeries("v", t, t ** -0.5)
    with pytest.raises(ValueError, match="decade"):
        fit_decay_exponent(series, (1.0, 5.0))
    t2 = 10.0 ** np.linspace(0.0, 2.0, 5)
    with pytest.raises(ValueError, match="samples"):
        fit_decay_exponent(TimeSeries("v", t2, t2 ** -0.5), (1.0, 100.0))
    t3 = 10.0 ** np.linspace(0.0, 2.0, 20)
    vals = t3 ** -0.5
    vals[3] = -1.0
    with pytest.raises(ValueError, match="positive"):
        fit_decay_exponent(TimeSeries("v", t3, vals), (1.0, 100.0))


def test_support_radius_radial_and_field():
    B = Barenblatt(1.0, H3)
    n = 1500
    tpl = RadialProfile(r_max=1.5, v=np.zeros(n), t=1.0)
    st = sample_radial(B, tpl, 1.0)
    assert abs(support_radius(st, 1e-10) - 1.0) <= 2 * st.dr
    zero = RadialProfile(r_max=1.0, v=np.zeros(64))
    assert support_radius(zero) == 0.0
    g = box_grid([0.0, 0.0], [2.0, 2.0], (65, 65))
    fld = field_from(g, lambda p: B.value(p, 1.0))
    assert abs(support_radius(fld, 1e-10) - 1.0) <= 2.5 * g.spacing[0]


def test_rescale_cauchy_group_law():
    B = Barenblatt(1.0, H3)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1.0, 1.0, (50, 2))
    ident = rescale_cauchy(B.value, 1.0, H3)
    assert np.abs(ident(pts, 1.0) - B.value(pts, 1.0)).max() == 0.0
    # Barenblatt is a fixed point of the rescaling
    for lam in (0.5, 2.0, 10.0):
        w = rescale_cauchy(B.value, lam, H3)
        assert np.abs(w(pts, 1.3) - B.value(pts, 1.3)).max() <= 1e-10
    # composition = product
    f = lambda x, t: np.exp(-np.linalg.norm(x, axis=-1) ** 2) / (1.0 + t)
    w1 = rescale_cauchy(rescale_cauchy(f, 2.0, H3), 3.0, H3)
    w2 = rescale_cauchy(f, 6.0, H3)
    assert np.abs(w1(pts, 0.7) - w2(pts, 0.7)).max() <= 1e-12
    with pytest.raises(ValueError):
        rescale_cauchy(f, -1.0, H3)


def test_fit_barenblatt_self_fit():
    B = Barenblatt(1.0, H3)
    t = 100.0
    r = np.linspace(0.0, 1.5 * B.support_radius(t), 4000)[1:]
    fit = fit_barenblatt(r, np.asarray(B.radial_value(r, t)), t, H3)
    assert abs(fit.R_star - 1.0) <= 1e-3
    assert fit.sup_gap <= 1e-8
    with pytest.raises(ValueError):
        fit_barenblatt(r, np.zeros_like(r), t, H3)


def test_aleksandrov_gap_radial_field():
    B = Barenblatt(1.0, H3)
    g = box_grid([0.0, 0.0], [3.0, 3.0], (129, 129))
    fld = field_from(g, lambda p: B.value(p, 1.0))
    gap = aleksandrov_gap(fld, r=0.6, r_data=0.15)
    assert gap <= 1e-10
    with pytest.raises(ValueError):
        aleksandrov_gap(fld, r=0.1, r_data=0.15)
    with pytest.raises(ValueError):
        aleksandrov_gap(fld, r=2.0, r_data=1.0)  # outer shell leaves the box


def test_interp_at_exact_on_nodes_and_bilinear():
    fn = lambda p: 1.0 + 2.0 * p[:, 0] - p[:, 1]
    g = box_grid([0.0, 0.0], [1.0, 1.0], (11, 11),
                 boundary=lambda pts, t: fn(pts))
    fld = field_from(g, fn, t=0.0)
    # bilinear interpolation reproduces affine data everywhere inside
    rng = np.random.default_rng(1)
    pts = rng.uniform(-0.99, 0.99, (100, 2))
    vals = interp_at(fld, pts)
    np.testing.assert_allclose(vals, fn(pts), rtol=1e-12)
    with pytest.raises(ValueError):
        interp_at(fld, np.array([[1.5, 0.0]]))


def _giant_snapshots(h, n=192, s_values=(1.0, 1.5, 2.0, 2.5, 3.0)):
    prof = build_giant_profile(h)
    r0 = prof.rbar / 2.0
    G = FriendlyGiant(prof, r0=r0)
    tpl = RadialProfile(r_max=r0, v=np.zeros(n), t=1.0)
    return [sample_radial(G, tpl, float(np.exp((h.h - 1.0) * s))) for s in s_values], G


def test_dirichlet_rescale_exact_giant_is_fixed_point():
    snaps, G = _giant_snapshots(H3)
    s, v = dirichlet_rescale(snaps, H3)
    assert np.abs(v - v[0]).max() <= 1e-12  # constant in s
    np.testing.assert_allclose(
        v[0], (H3.h - 1.0) ** 0.5 * G.scaled_profile(snaps[0].r), rtol=1e-10)
    # s = 0 means t = 1: v = (h-1)^(1/(h-1)) u(., 1)
    s0, v0 = dirichlet_rescale(snaps, H3, s_values=[1.0])
    np.testing.assert_allclose(v0[0], v[0], rtol=1e-12)
    with pytest.raises(ValueError, match="extrapolate"):
        dirichlet_rescale(snaps, H3, s_values=[10.0])


def test_extract_giant_exact_snapshots():
    snaps, G = _giant_snapshots(H3, s_values=np.linspace(1.0, 4.0, 13))
    ext = extract_giant(snaps, H3, ds=1.0, tol=1e-6)
    assert ext.converged
    assert ext.residual <= 1e-12
    np.testing.assert_allclose(
        ext.G, (H3.h - 1.0) ** 0.5 * G.scaled_profile(snaps[0].r), rtol=1e-10)
    np.testing.assert_allclose(ext.F, G.scaled_profile(snaps[0].r), rtol=1e-10)
    with pytest.raises(ValueError, match="too short"):
        extract_giant(snaps[:2], H3, ds=5.0)


def test_eigen_residual_exact_profiles():
    for h in (H2, H3):
        prof = build_giant_profile(h)
        r0 = prof.rbar / 2.0
        G = FriendlyGiant(prof, r0=r0)
        n = 513
        r = (np.arange(n) + 0.5) * (r0 / n)
        Gvals = (h.h - 1.0) ** (1.0 / (h.h - 1.0)) * G.scaled_profile(r)
        res, adm = eigen_residual_radial(r, Gvals, h, r0)
        assert adm.any()
        assert np.abs(res[adm]).max() <= 1e-3
        zero_res, zero_adm = eigen_residual_radial(r, np.zeros(n), h, r0)
        assert np.abs(zero_res).max() == 0.0
        assert not zero_adm.any()  # all below the gradient threshold


def test_eigen_residual_grid_2d():
    prof = build_giant_profile(H3)
    r0 = prof.rbar / 2.0
    G = FriendlyGiant(prof, r0=r0)
    g = ball_grid(r0, (129, 129))
    fld = field_from(g, lambda p: (H3.h - 1.0) ** 0.5 * G.scaled_profile(
        np.linalg.norm(p, axis=1)))
    res, adm = eigen_residual_grid(fld, H3)
    assert adm.any()
    # central-difference residual away from the degenerate origin ring
    idx = np.argwhere(g.mask)
    rr = np.linalg.norm(g.node_coords(idx), axis=1)
    sel = adm & (rr > 10 * g.spacing[0])
    assert np.abs(res[sel]).max() <= 1e-2


def test_benilan_crandall_on_exact_families():
    # Barenblatt: u_t at the center = -u/(2ht) >= -u/((h-1)t) for h > 1
    B = Barenblatt(1.0, H3)
    n = 256
    tpl = RadialProfile(r_max=2.0, v=np.zeros(n), t=1.0)
    snaps = [sample_radial(B, tpl, t) for t in (1.0, 2.0, 4.0, 8.0)]
    assert benilan_crandall_violation(snaps, H3) <= 1e-12
    # giant saturates the bound: violation ~ 0 but not positive
    gs, _ = _giant_snapshots(H3, s_values=np.linspace(0.5, 2.0, 7))
    assert abs(benilan_crandall_violation(gs, H3)) <= 1e-12
    assert scaled_monotonicity_defect(gs, H3) >= -1e-12
