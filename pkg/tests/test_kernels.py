import math

import numpy as np
import pytest

import reference
from palgp.exceptions import DimensionMismatchError
from palgp.kernels import (
    FAMILIES,
    KernelParams,
    check_family,
    cross_matrix,
    kernel_cross,
    kernel_eval,
    kernel_gram,
)
from palgp.linalg import cholesky


def params_1d(scale=1.0, length=1.0, noise_sd=0.0):
    return KernelParams(scale, np.array([length]), noise_sd)


def test_family_enumeration_closed():
    assert set(FAMILIES) == {"rbf_ard", "matern52_ard", "matern32_ard"}
    with pytest.raises(ValueError):
        check_family("periodic")


def test_params_validation():
    with pytest.raises(ValueError):
        KernelParams(0.0, np.array([1.0]), 0.1)
    with pytest.raises(ValueError):
        KernelParams(1.0, np.array([0.0]), 0.1)
    with pytest.raises(ValueError):
        KernelParams(1.0, np.array([1.0]), -0.1)


def test_rbf_same_point_with_noise():
    p = params_1d(noise_sd=0.1)
    x = np.array([0.3])
    assert kernel_eval("rbf_ard", p, x, x, same_index=True) == pytest.approx(1.01)
    assert kernel_eval("rbf_ard", p, x, x, same_index=False) == pytest.approx(1.0)


def test_rbf_unit_distance():
    p = params_1d()
    v = kernel_eval("rbf_ard", p, np.array([0.0]), np.array([1.0]), same_index=False)
    assert v == pytest.approx(math.exp(-1.0), abs=1e-12)


def test_matern52_unit_distance_closed_form():
    p = params_1d()
    v = kernel_eval("matern52_ard", p, np.array([0.0]), np.array([1.0]))
    c = math.sqrt(5.0)
    assert v == pytest.approx((1.0 + c + 5.0 / 3.0) * math.exp(-c), abs=1e-12)


def test_matern32_unit_distance_closed_form():
    p = params_1d()
    v = kernel_eval("matern32_ard", p, np.array([0.0]), np.array([1.0]))
    c = math.sqrt(3.0)
    assert v == pytest.approx((1.0 + c) * math.exp(-c), abs=1e-12)


@pytest.mark.parametrize("family", FAMILIES)
def test_kernel_matches_loop_reference(family):
    rng = np.random.default_rng(0)
    p = KernelParams(1.7, np.array([0.4, 2.5, 1.1]), 0.3)
    for _ in range(20):
        a, b = rng.standard_normal(3), rng.standard_normal(3)
        got = kernel_eval(family, p, a, b, same_index=False)
        want = reference.kernel_value(family, 1.7, p.lengths, 0.3, a, b)
        assert got == pytest.approx(want, rel=1e-14, abs=1e-15)


@pytest.mark.parametrize("family", FAMILIES)
def test_kernel_symmetry(family):
    rng = np.random.default_rng(1)
    p = KernelParams(0.8, np.array([0.9, 1.4]), 0.05)
    for _ in range(10):
        a, b = rng.standard_normal(2), rng.standard_normal(2)
        assert kernel_eval(family, p, a, b) == kernel_eval(family, p, b, a)


@pytest.mark.parametrize("family", FAMILIES)
def test_kernel_bound_at_tau_squared(family):
    p = KernelParams(2.0, np.array([1.0]), 0.0)
    x = np.array([0.5])
    assert kernel_eval(family, p, x, x) == pytest.approx(4.0)
    rng = np.random.default_rng(2)
    for _ in range(25):
        a, b = rng.standard_normal(1), rng.standard_normal(1)
        v = kernel_eval(family, p, a, b)
        if not np.allclose(a, b):
            assert v < 4.0
        assert v <= 4.0


def test_rbf_ard_length_monotonicity():
    a, b = np.array([0.0, 0.0]), np.array([1.0, 0.0])
    prev = -np.inf
    for l0 in (0.5, 1.0, 2.0, 4.0):
        p = KernelParams(1.0, np.array([l0, 1.0]), 0.0)
        v = kernel_eval("rbf_ard", p, a, b)
        assert v > prev
        prev = v


def test_kernel_cross_single_and_empty():
    p = params_1d(noise_sd=0.2)
    x = np.array([0.4])
    out = kernel_cross("rbf_ard", p, x[None, :], x)
    assert out.shape == (1,)
    # cross-covariances never include the noise term
    assert out[0] == pytest.approx(1.0)
    assert kernel_cross("rbf_ard", p, np.zeros((0, 1)), x).shape == (0,)


def test_kernel_cross_matches_loop():
    rng = np.random.default_rng(3)
    p = KernelParams(1.2, np.array([0.7, 1.3]), 0.1)
    X = rng.standard_normal((10, 2))
    x = rng.standard_normal(2)
    got = kernel_cross("rbf_ard", p, X, x)
    want = [reference.kernel_value("rbf_ard", 1.2, p.lengths, 0.1, r, x) for r in X]
    assert np.max(np.abs(got - np.array(want))) < 1e-15


def test_gram_single_point():
    p = params_1d(scale=1.5, noise_sd=0.2)
    G = kernel_gram("rbf_ard", p, np.array([[0.3]]))
    assert G.shape == (1, 1)
    assert G[0, 0] == pytest.approx(1.5**2 + 0.2**2)


def test_gram_duplicate_points_noise_only_on_diagonal():
    p = params_1d(noise_sd=0.1)
    X = np.array([[0.25], [0.25]])
    G = kernel_gram("rbf_ard", p, X)
    assert np.allclose(G, [[1.01, 1.0], [1.0, 1.01]])


def test_gram_diagonal_and_symmetry_random():
    rng = np.random.default_rng(4)
    p = KernelParams(0.9, np.array([1.0, 0.5, 2.0]), 0.15)
    X = rng.standard_normal((15, 3))
    G = kernel_gram("matern52_ard", p, X)
    assert np.allclose(np.diag(G), 0.9**2 + 0.15**2)
    assert np.array_equal(G, G.T)
    cholesky(G)  # SPD under jitter policy


@pytest.mark.parametrize("family", FAMILIES)
def test_gram_psd_many_random_sets(family):
    rng = np.random.default_rng(5)
    for _ in range(34):
        n = int(rng.integers(2, 25))
        d = int(rng.integers(1, 4))
        p = KernelParams(
            float(rng.uniform(0.2, 3.0)),
            rng.uniform(0.2, 3.0, size=d),
            float(rng.uniform(1e-6, 0.5)),
        )
        cholesky(kernel_gram(family, p, rng.standard_normal((n, d))))


def test_cross_matrix_matches_reference():
    rng = np.random.default_rng(6)
    p = KernelParams(1.1, np.array([0.8, 1.9]), 0.2)
    A, B = rng.standard_normal((7, 2)), rng.standard_normal((9, 2))
    for family in FAMILIES:
        got = cross_matrix(family, p, A, B)
        assert np.max(np.abs(got - reference.cross(family, p, A, B))) < 1e-13


def test_dimension_mismatch_raises():
    p = KernelParams(1.0, np.array([1.0, 1.0]), 0.0)
    with pytest.raises(DimensionMismatchError):
        kernel_eval("rbf_ard", p, np.array([0.0]), np.array([0.0, 1.0]))
    with pytest.raises(DimensionMismatchError):
        kernel_gram("rbf_ard", p, np.zeros((3, 1)))
