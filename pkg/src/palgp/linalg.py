"""Dense SPD linear algebra for Gaussian-process posteriors.

Factors are plain lower-triangular ``(n, n)`` ndarrays with ``L @ L.T`` equal
to the (possibly jittered) source matrix. The one non-standard operation is
:func:`chol_append`, the O(n^2) bordered update that grows a factor by one
row/column without refactorizing; sequential design criteria lean on it to
score one-point-augmented models cheaply.
"""

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import DimensionMismatchError, NotPositiveDefiniteError

JITTER_INITIAL = 1e-10
JITTER_MAX = 1e-4
# pivot floor for the bordered update, relative to the appended diagonal:
# below this the new point is numerically indistinguishable from existing data
APPEND_PIVOT_FLOOR = 1e-12


def _check_square(K, name="K"):
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {K.shape}")
    return K


def cholesky(K) -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive definite matrix.

    The factorization is first attempted unmodified. On failure, a diagonal
    jitter of ``JITTER_INITIAL * mean(diag(K))`` is added and escalated
    tenfold per retry up to ``JITTER_MAX * mean(diag(K))``. If every attempt
    fails, NotPositiveDefiniteError is raised. When a retry was needed the
    returned factor is of the jittered matrix.
    """
    K = _check_square(K)
    n = K.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    scale = max(1.0, float(np.max(np.abs(K))))
    if np.max(np.abs(K - K.T)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    diag = np.diag(K)
    mean_diag = float(np.mean(diag))
    if np.any(diag <= 0.0) or mean_diag <= 0.0:
        raise NotPositiveDefiniteError("diagonal entries must be strictly positive")
    jitter = 0.0
    while True:
        try:
            if jitter == 0.0:
                return np.linalg.cholesky(K)
            return np.linalg.cholesky(K + jitter * mean_diag * np.eye(n))
        except np.linalg.LinAlgError:
            if jitter == 0.0:
                jitter = JITTER_INITIAL
            elif jitter * 10.0 <= JITTER_MAX * (1.0 + 1e-15):
                jitter *= 10.0
            else:
                raise NotPositiveDefiniteError(
                    f"matrix is not positive definite (jitter up to "
                    f"{JITTER_MAX:g} * mean diagonal exhausted)"
                ) from None


def solve_lower(L, b) -> np.ndarray:
    """Solve ``L v = b`` by forward substitution for lower-triangular L.

    ``b`` may be a vector or a matrix of stacked right-hand sides.
    """
    L = _check_square(L, "L")
    b = np.asarray(b, dtype=float)
    if b.shape[0] != L.shape[0]:
        raise DimensionMismatchError(
            f"right-hand side has leading dimension {b.shape[0]}, "
            f"expected {L.shape[0]}"
        )
    if L.shape[0] == 0:
        return np.zeros_like(b)
    return solve_triangular(L, b, lower=True, check_finite=False)


def solve_chol(L, b) -> np.ndarray:
    """Solve ``(L L^T) x = b`` with two triangular solves."""
    v = solve_lower(L, b)
    if L.shape[0] == 0:
        return np.zeros_like(np.asarray(b, dtype=float))
    return solve_triangular(L, v, lower=True, trans=1, check_finite=False)


def chol_append(L, k_cross, k_self) -> np.ndarray:
    """Grow a Cholesky factor by one row/column in O(n^2).

    Given the factor ``L`` of an SPD matrix ``K`` and the border of the
    augmented matrix ``[[K, c], [c^T, kappa]]``, the new factor is

        [[L, 0], [r^T, d]],  L r = c,  d = sqrt(kappa - r^T r),

    i.e. one forward substitution plus a scalar square root. The leading
    ``n x n`` block of the result is ``L`` copied bit-for-bit. Raises
    NotPositiveDefiniteError when ``kappa - r^T r`` falls at or below
    ``APPEND_PIVOT_FLOOR * kappa`` (the augmented matrix is numerically
    singular, e.g. the new point duplicates a row).
    """
    L = _check_square(L, "L")
    n = L.shape[0]
    c = np.asarray(k_cross, dtype=float).reshape(-1)
    if c.shape[0] != n:
        raise DimensionMismatchError(f"k_cross has length {c.shape[0]}, expected {n}")
    kappa = float(k_self)
    if kappa <= 0.0:
        raise NotPositiveDefiniteError("k_self must be strictly positive")
    r = solve_lower(L, c) if n else np.zeros(0)
    d_sq = kappa - float(r @ r)
    if d_sq <= APPEND_PIVOT_FLOOR * kappa:
        raise NotPositiveDefiniteError(
            "appended point makes the matrix numerically singular"
        )
    out = np.zeros((n + 1, n + 1))
    out[:n, :n] = L
    out[n, :n] = r
    out[n, n] = np.sqrt(d_sq)
    return out
