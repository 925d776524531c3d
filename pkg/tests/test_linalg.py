import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import grid_argmin, singular_values_via_jacobi
from streamdecomp.errors import InvalidInputError
from streamdecomp.linalg import SvdFactors, full_svd, inc_svd, soft_threshold, svt

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_full_svd_identity():
    f = full_svd(np.eye(3))
    np.testing.assert_allclose(f.s, [1, 1, 1])


def test_full_svd_diagonal_is_permutation_free():
    f = full_svd(np.diag([3.0, 2.0, 1.0]))
    np.testing.assert_allclose(f.s, [3, 2, 1])
    np.testing.assert_allclose(np.abs(f.U), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(np.abs(f.V), np.eye(3), atol=1e-15)


def test_full_svd_matches_jacobi_oracle(rng):
    for _ in range(20):
        A = rng.standard_normal((6, 4))
        f = full_svd(A)
        assert np.linalg.norm(f.matrix() - A) <= 1e-10 * np.linalg.norm(A)
        np.testing.assert_allclose(f.s, singular_values_via_jacobi(A), rtol=1e-10, atol=1e-12)


def test_full_svd_rejects_non_finite():
    with pytest.raises(InvalidInputError):
        full_svd(np.array([[1.0, np.nan]]))


@given(arrays(np.float64, st.tuples(st.integers(1, 7), st.integers(1, 7)), elements=finite))
def test_full_svd_properties(A):
    f = full_svd(A)
    k = min(A.shape)
    assert f.U.shape == (A.shape[0], k) and f.V.shape == (A.shape[1], k)
    assert np.all(f.s >= 0) and np.all(np.diff(f.s) <= 0)
    np.testing.assert_allclose(f.U.T @ f.U, np.eye(k), atol=1e-10)
    assert np.linalg.norm(f.matrix() - A) <= 1e-10 * max(1.0, np.linalg.norm(A))


def _padded(s, size):
    return np.pad(s, (0, size - s.size))


def test_inc_svd_zero_column_adds_zero_singular_value():
    f = inc_svd(full_svd(np.eye(2)), np.zeros(2))
    np.testing.assert_allclose(_padded(f.s, 3), [1, 1, 0])


def test_inc_svd_unit_column():
    c = np.array([1.0, 0.0])
    f = inc_svd(full_svd(np.eye(2)), c)
    oracle = full_svd(np.column_stack([np.eye(2), c])).s
    np.testing.assert_allclose(_padded(f.s, 3), [np.sqrt(2), 1, 0], atol=1e-14)
    np.testing.assert_allclose(f.s, oracle, atol=1e-14)


def test_inc_svd_random_matches_full(rng):
    B = rng.standard_normal((20, 5))
    c = rng.standard_normal(20)
    f = inc_svd(full_svd(B), c)
    ref = full_svd(np.column_stack([B, c])).s
    np.testing.assert_allclose(f.s, ref, rtol=1e-8)


def test_inc_svd_column_in_span_skips_extension(rng):
    B = rng.standard_normal((10, 3))
    c = B @ rng.standard_normal(3)
    f = inc_svd(full_svd(B), c)
    assert f.U.shape == (10, 3)
    M = np.column_stack([B, c])
    assert np.linalg.norm(f.matrix() - M) <= 1e-10 * np.linalg.norm(M)


def test_inc_svd_length_mismatch():
    with pytest.raises(InvalidInputError):
        inc_svd(full_svd(np.eye(3)), np.zeros(2))


@given(st.integers(2, 12), st.integers(1, 6), st.integers(0, 2**32 - 1), st.booleans())
def test_inc_svd_reconstruction_and_orthonormality(n, d, seed, in_span):
    r = np.random.default_rng(seed)
    B = r.standard_normal((n, d)) * r.uniform(0.1, 10)
    c = B @ r.standard_normal(d) if in_span else r.standard_normal(n)
    f = inc_svd(full_svd(B), c)
    M = np.column_stack([B, c])
    assert np.linalg.norm(f.matrix() - M) <= 1e-8 * max(1.0, np.linalg.norm(M))
    k = f.U.shape[1]
    np.testing.assert_allclose(f.U.T @ f.U, np.eye(k), atol=1e-8)


def test_inc_svd_chain_stays_accurate(rng):
    # repeated appends, each refactorized only through the small core
    n, d = 30, 4
    M = rng.standard_normal((n, d))
    f = full_svd(M)
    for _ in range(25):
        c = rng.standard_normal(n)
        f = inc_svd(f, c)
        M = np.column_stack([M, c])
        # keep factors thin: compare singular values only
        np.testing.assert_allclose(f.s, full_svd(M).s, rtol=1e-8, atol=1e-10)


def test_svt_examples(rng):
    f = SvdFactors(np.eye(3), np.array([3.0, 1.0, 0.2]), np.eye(3))
    np.testing.assert_allclose(np.diag(svt(f, 0.5)), [2.5, 0.5, 0.0])
    A = rng.standard_normal((8, 4))
    fa = full_svd(A)
    np.testing.assert_allclose(svt(fa, 0.0), A, atol=1e-12)
    np.testing.assert_allclose(svt(fa, fa.s[0]), 0.0, atol=1e-15)


def test_svt_negative_tau():
    with pytest.raises(InvalidInputError):
        svt(full_svd(np.eye(2)), -1.0)


@given(st.integers(0, 2**32 - 1), st.floats(0, 5))
def test_svt_does_not_increase_nuclear_norm(seed, tau):
    A = np.random.default_rng(seed).standard_normal((5, 4))
    before = full_svd(A).s.sum()
    after = np.linalg.svd(svt(full_svd(A), tau), compute_uv=False).sum()
    assert after <= before + 1e-12


def test_soft_threshold_examples():
    np.testing.assert_allclose(soft_threshold([2, -2], [0.5, 0.5]), [1.5, -1.5])
    np.testing.assert_allclose(soft_threshold([2, -2], [0, 0]), [2, -2])
    np.testing.assert_allclose(soft_threshold([0.3], [0.4]), [0])


def test_soft_threshold_length_mismatch():
    with pytest.raises(InvalidInputError):
        soft_threshold([1.0, 2.0], [0.1, 0.2, 0.3])


def test_soft_threshold_matches_grid_search(rng):
    worst = 0.0
    for _ in range(100):
        u = rng.uniform(-3, 3)
        tau = rng.uniform(0, 2)
        got = soft_threshold([u], [tau])[0]
        ref = grid_argmin(u, np.array([0.0]), np.array([1.0]), tau, step=1e-4)
        worst = max(worst, abs(got - ref))
    assert worst <= 1e-3
