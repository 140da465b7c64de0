import numpy as np
import pytest

from infheat.operator import (Homogeneity, Source, eval_operator,
                              eval_regularized, regularized_matrix, source_term)


def test_homogeneity_constants():
    h3 = Homogeneity(3.0)
    assert h3.alpha == pytest.approx(0.5, abs=1e-15)
    assert h3.kappa == pytest.approx(1.0, abs=1e-15)
    assert h3.c_h == pytest.approx(0.25, rel=1e-14)
    assert h3.d_h == pytest.approx(2.0 ** 1.5 / 3.0, rel=1e-14)
    h2 = Homogeneity(2.0)
    assert h2.c_h == pytest.approx(1.0 / 18.0, rel=1e-14)
    assert h2.d_h == pytest.approx(0.5, rel=1e-14)
    # kappa^(h+1) = 2*alpha to near machine accuracy
    for hval in (1.5, 2.0, 3.0, 4.0, 7.3):
        h = Homogeneity(hval)
        assert h.kappa ** (hval + 1.0) == pytest.approx(2.0 * h.alpha, rel=1e-14)


@pytest.mark.parametrize("bad", [1.0, 0.5, -2.0, float("nan"), float("inf")])
def test_homogeneity_rejects_bad_h(bad):
    with pytest.raises(ValueError):
        Homogeneity(bad)


def test_eval_operator_examples():
    h3, h2 = Homogeneity(3.0), Homogeneity(2.0)
    assert eval_operator(np.eye(2), [1.0, 0.0], h3) == pytest.approx(1.0, rel=1e-14)
    assert eval_operator(np.diag([1.0, 2.0]), [3.0, 4.0], h2) == pytest.approx(8.2, rel=1e-14)
    assert eval_operator(np.random.default_rng(0).standard_normal((2, 2)) * 0
                         + np.eye(2), [0.0, 0.0], h2) == 0.0


def test_eval_operator_tiny_gradient_no_overflow():
    # h < 3 with very small |p|: the unguarded |p|^(h-3) factor overflows
    h = Homogeneity(1.5)
    M = np.eye(2)
    val = eval_operator(M, [1e-200, 0.0], h)
    assert val == pytest.approx((1e-200) ** 0.5, rel=1e-12)
    assert eval_operator(M, [1e-320, 0.0], h) == 0.0


def test_eval_operator_validates_inputs():
    h = Homogeneity(2.0)
    with pytest.raises(ValueError):
        eval_operator(np.array([[1.0, 2.0], [0.0, 1.0]]), [1.0, 0.0], h)
    with pytest.raises(ValueError):
        eval_operator(np.full((2, 2), np.nan), [1.0, 0.0], h)
    with pytest.raises(ValueError):
        eval_operator(np.eye(2), [np.inf, 0.0], h)


def test_regularized_matrix_examples():
    h3, h2 = Homogeneity(3.0), Homogeneity(2.0)
    np.testing.assert_allclose(regularized_matrix([0.0, 0.0], 0.1, 1.0, h3),
                               0.1 * np.eye(2), atol=1e-15)
    np.testing.assert_allclose(regularized_matrix([1.0, 0.0], 0.0, 0.0, h3),
                               np.array([[1.0, 0.0], [0.0, 0.0]]), atol=1e-15)
    expected = np.eye(2) + 5.0 ** -0.5 * np.array([[0.0, 0.0], [0.0, 4.0]])
    np.testing.assert_allclose(regularized_matrix([0.0, 2.0], 1.0, 1.0, h2),
                               expected, rtol=1e-14)


def test_regularized_matrix_psd():
    rng = np.random.default_rng(3)
    h = Homogeneity(1.8)
    for _ in range(20):
        p = rng.standard_normal(3)
        A = regularized_matrix(p, 0.0, 0.5, h)
        eig = np.linalg.eigvalsh(A)
        assert eig.min() >= -1e-14
        A2 = regularized_matrix(p, 0.3, 0.5, h)
        assert np.linalg.eigvalsh(A2).min() >= 0.3 - 1e-14


def test_delta_zero_rejected_for_small_h():
    with pytest.raises(ValueError):
        regularized_matrix([1.0, 0.0], 0.0, 0.0, Homogeneity(2.0))
    with pytest.raises(ValueError):
        eval_regularized(np.eye(2), [1.0, 0.0], 0.0, 0.0, Homogeneity(2.9))
    # allowed at h >= 3
    regularized_matrix([1.0, 0.0], 0.0, 0.0, Homogeneity(3.0))


def test_eval_regularized_examples():
    h3, h2 = Homogeneity(3.0), Homogeneity(2.0)
    assert eval_regularized(np.eye(2), [1.0, 0.0], 0.0, 0.0, h3) == pytest.approx(1.0)
    assert eval_regularized(np.eye(2), [0.0, 0.0], 0.5, 1.0, h2) == pytest.approx(1.0)
    assert eval_regularized(np.diag([2.0, -2.0]), [1.0, 1.0], 0.0, 0.0, h3) == 0.0


def test_regularized_consistency_limit():
    h = Homogeneity(2.3)
    M = np.array([[1.0, -0.3], [-0.3, 0.7]])
    p = np.array([0.4, 0.9])
    target = eval_operator(M, p, h)
    prev = np.inf
    for scale in (1e-1, 1e-3, 1e-5, 1e-8):
        err = abs(eval_regularized(M, p, scale, scale, h) - target)
        assert err < prev
        prev = err
    assert prev <= 1e-7


def test_operator_properties_random():
    rng = np.random.default_rng(42)
    n = 10000
    for hval in (1.5, 2.0, 3.0, 4.0):
        h = Homogeneity(hval)
        M = rng.standard_normal((n, 3, 3))
        M = M + np.swapaxes(M, -1, -2)
        p = rng.standard_normal((n, 3))
        s = rng.uniform(0.1, 10.0, n)
        base = eval_operator(M, p, h)
        scaled = eval_operator(M, s[:, None] * p, h)
        rel = np.abs(scaled - s ** (hval - 1.0) * base) / np.maximum(np.abs(scaled), 1e-300)
        assert rel.max() <= 1e-12
        # odd symmetry is exact
        assert np.array_equal(eval_operator(-M, -p, h), -base)


def test_source_kinds():
    assert source_term(2.0, Source.linear(0.5)) == pytest.approx(1.0)
    assert source_term(np.pi, Source.bounded_slope(1.0)) == pytest.approx(0.0, abs=1e-15)
    assert source_term(0.0, Source.zero()) == 0.0
    assert source_term(0.0, Source.linear(2.0, bound=2.0)) == 0.0
    src = Source.bounded_slope(0.7)
    u = np.linspace(-10, 10, 101)
    assert (np.abs(src(u)) <= 0.7 * np.abs(u) + 1e-15).all()


def test_source_growth_bound_enforced():
    with pytest.raises(ValueError):
        Source("linear", 2.0, 1.0)
    with pytest.raises(ValueError):
        Source("bounded_slope", -3.0, 2.5)
    with pytest.raises(ValueError):
        Source("cubic", 1.0, 1.0)
