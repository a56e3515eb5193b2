import numpy as np
import pytest

from palgp.exceptions import DimensionMismatchError, NotPositiveDefiniteError
from palgp.linalg import chol_append, cholesky, solve_chol, solve_lower


def random_spd(rng, n):
    A = rng.standard_normal((n, n))
    return A @ A.T + n * np.eye(n)


def test_cholesky_scalar():
    L = cholesky(np.array([[4.0]]))
    assert np.allclose(L, [[2.0]])


def test_cholesky_identity():
    assert np.array_equal(cholesky(np.eye(3)), np.eye(3))


def test_cholesky_reconstructs_random_spd():
    rng = np.random.default_rng(0)
    K = random_spd(rng, 20)
    L = cholesky(K)
    err = np.linalg.norm(L @ L.T - K) / np.linalg.norm(K)
    assert err < 1e-10
    assert np.array_equal(L, np.tril(L))  # strictly upper triangle is zero
    assert np.all(np.diag(L) > 0)


def test_cholesky_rejects_asymmetric():
    K = np.array([[1.0, 0.5], [0.2, 1.0]])
    with pytest.raises(ValueError):
        cholesky(K)


def test_cholesky_rejects_nonpositive_diagonal():
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(np.array([[0.0, 0.0], [0.0, 1.0]]))


def test_cholesky_jitter_rescues_near_singular():
    # rank-deficient up to rounding: jitter ladder must shore it up
    v = np.array([[1.0], [1.0]])
    K = v @ v.T + 1e-13 * np.eye(2)
    L = cholesky(K)
    assert np.all(np.isfinite(L))
    assert np.linalg.norm(L @ L.T - K) < 1e-3


def test_cholesky_raises_on_indefinite():
    K = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3, -1
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(K)


def test_solve_lower_identity():
    assert np.allclose(solve_lower(np.eye(2), np.array([3.0, 5.0])), [3.0, 5.0])


def test_solve_lower_hand_case():
    L = np.array([[2.0, 0.0], [1.0, 1.0]])
    assert np.allclose(solve_lower(L, np.array([4.0, 3.0])), [2.0, 1.0])


def test_solve_lower_residual_random():
    rng = np.random.default_rng(1)
    L = np.tril(rng.standard_normal((30, 30))) + 30 * np.eye(30)
    b = rng.standard_normal(30)
    v = solve_lower(L, b)
    assert np.max(np.abs(L @ v - b)) < 1e-10


def test_solve_lower_matrix_rhs():
    rng = np.random.default_rng(2)
    L = cholesky(random_spd(rng, 12))
    B = rng.standard_normal((12, 5))
    V = solve_lower(L, B)
    assert np.max(np.abs(L @ V - B)) < 1e-9


def test_solve_lower_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        solve_lower(np.eye(3), np.ones(2))


def test_solve_chol_full_system():
    rng = np.random.default_rng(3)
    K = random_spd(rng, 15)
    b = rng.standard_normal(15)
    x = solve_chol(cholesky(K), b)
    assert np.max(np.abs(K @ x - b)) < 1e-8


def test_chol_append_block_diagonal():
    out = chol_append(np.array([[1.0]]), np.array([0.0]), 1.0)
    assert np.array_equal(out, np.eye(2))


def test_chol_append_small_case_matches_refactorization():
    K = np.array([[2.0, 1.0], [1.0, 2.0]])
    L = cholesky(K)
    out = chol_append(L, np.array([1.0, 1.0]), 2.0)
    K_full = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]])
    assert np.max(np.abs(out - np.linalg.cholesky(K_full))) < 1e-12


def test_chol_append_random_matches_refactorization():
    rng = np.random.default_rng(4)
    K = random_spd(rng, 51)
    L = np.linalg.cholesky(K[:50, :50])
    out = chol_append(L, K[:50, 50], float(K[50, 50]))
    assert np.max(np.abs(out - np.linalg.cholesky(K))) < 1e-10


def test_chol_append_preserves_leading_block_exactly():
    rng = np.random.default_rng(5)
    K = random_spd(rng, 9)
    L = cholesky(K[:8, :8])
    out = chol_append(L, K[:8, 8], float(K[8, 8]))
    assert np.array_equal(out[:8, :8], L)  # bit-for-bit, not approximate


def test_chol_append_rejects_duplicate_point():
    # appending a row identical to an existing one makes the matrix singular
    K = np.array([[2.0, 1.0], [1.0, 2.0]])
    L = cholesky(K)
    with pytest.raises(NotPositiveDefiniteError):
        chol_append(L, K[:, 0].copy(), 2.0)


def test_chol_append_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        chol_append(np.eye(3), np.ones(2), 1.0)


def test_chol_append_many_random_instances():
    rng = np.random.default_rng(6)
    for _ in range(100):
        n = int(rng.integers(1, 65))
        K = random_spd(rng, n + 1)
        L = np.linalg.cholesky(K[:n, :n])
        out = chol_append(L, K[:n, n], float(K[n, n]))
        assert np.max(np.abs(out - np.linalg.cholesky(K))) < 1e-10
