import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dualspls.errors import RankExhausted, SingularMatrix
from dualspls.linalg import SPDFactor, as_matrix, center_xy, deflate, gram, mean_center, norm_l1, norm_l2, solve_spd

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_mean_center_small_example():
    Xc, stats = mean_center([[1, 3], [3, 5]])
    np.testing.assert_array_equal(Xc, [[-1, -1], [1, 1]])
    np.testing.assert_array_equal(stats.col_means, [2, 4])


def test_mean_center_idempotent(rng):
    X = rng.standard_normal((30, 4))
    Xc, _ = mean_center(X)
    Xcc, stats = mean_center(Xc)
    np.testing.assert_allclose(Xcc, Xc, atol=1e-14)
    assert np.all(np.abs(stats.col_means) < 1e-14)


@given(arrays(np.float64, st.tuples(st.integers(2, 12), st.integers(1, 6)), elements=finite))
def test_mean_center_zero_means_and_reconstruction(X):
    Xc, stats = mean_center(X)
    assert np.all(np.abs(Xc.mean(axis=0)) <= 1e-12 * (1 + np.abs(stats.col_means)) + 1e-12)
    np.testing.assert_allclose(Xc + stats.col_means, X, atol=1e-12 * (1 + np.abs(X).max()))


def test_center_xy_stores_response_mean():
    Xc, yc, stats = center_xy([[1.0], [2.0], [6.0]], [1.0, 2.0, 6.0])
    assert stats.y_mean == 3.0
    np.testing.assert_array_equal(yc, [-2, -1, 3])


def test_rejects_non_finite_and_short_input():
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(ValueError):
        mean_center([[1.0, 2.0]])


def test_norms_small_examples():
    assert norm_l1([3, -4]) == 7
    assert norm_l2([3, -4]) == 5
    assert norm_l1(np.zeros(3)) == 0 and norm_l2(np.zeros(3)) == 0


@given(arrays(np.float64, st.integers(1, 20), elements=finite))
def test_norm_equivalence(v):
    l1, l2 = norm_l1(v), norm_l2(v)
    assert l2 <= l1 * (1 + 1e-12) + 1e-12
    assert l1 <= np.sqrt(v.size) * l2 * (1 + 1e-12) + 1e-12


def test_gram_examples(rng):
    np.testing.assert_array_equal(gram(np.eye(2)), np.eye(2))
    np.testing.assert_array_equal(gram([[1.0], [2.0]]), [[5.0]])
    G = gram(rng.standard_normal((10, 6)))
    np.testing.assert_array_equal(G, G.T)
    assert np.linalg.eigvalsh(G).min() >= -1e-10


def test_solve_spd_examples():
    b = np.array([1.5, -2.0, 0.25])
    np.testing.assert_array_equal(solve_spd(np.eye(3), b), b)
    np.testing.assert_allclose(solve_spd([[2.0, 0.0], [0.0, 4.0]], [2.0, 4.0]), [1.0, 1.0])
    with pytest.raises(SingularMatrix):
        solve_spd([[1.0, 1.0], [1.0, 1.0]], [1.0, 2.0])


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_solve_spd_residual(p, seed):
    r = np.random.default_rng(seed)
    M = r.standard_normal((p + 3, p))
    A = M.T @ M + 1e-3 * np.eye(p)
    b = r.standard_normal(p)
    x = solve_spd(A, b)
    assert np.linalg.norm(A @ x - b) <= 1e-8 * (1 + np.linalg.norm(b))


def test_factor_reusable(rng):
    M = rng.standard_normal((8, 4))
    f = SPDFactor(M.T @ M)
    for _ in range(3):
        b = rng.standard_normal(4)
        np.testing.assert_allclose(M.T @ M @ f.solve(b), b, atol=1e-9)


def test_deflate_examples(rng):
    t = np.array([1.0, 0.0, 0.0, 0.0])
    X = np.array([[0.0, 0.0], [1.0, 2.0], [3.0, 1.0], [2.0, 5.0]])
    np.testing.assert_array_equal(deflate(X, t), X)
    u = rng.standard_normal(6)
    np.testing.assert_allclose(deflate(u[:, None], u), 0.0, atol=1e-14)
    with pytest.raises(RankExhausted):
        deflate(X, np.zeros(4))


@given(st.integers(0, 2**32 - 1))
def test_deflate_orthogonal_and_idempotent(seed):
    r = np.random.default_rng(seed)
    X = r.standard_normal((12, 5))
    t = r.standard_normal(12)
    D = deflate(X, t)
    assert np.abs(D.T @ t).max() <= 1e-9 * np.linalg.norm(X)
    np.testing.assert_allclose(deflate(D, t), D, atol=1e-9)
