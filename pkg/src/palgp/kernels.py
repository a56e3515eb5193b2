"""Stationary covariance functions with per-dimension (ARD) lengthscales.

Families
--------
rbf_ard
    k(x, x') = scale^2 * prod_j exp(-(x_j - x'_j)^2 / l_j^2)
matern52_ard
    k(x, x') = scale^2 * (1 + sqrt(5) r + 5 r^2 / 3) exp(-sqrt(5) r)
matern32_ard
    k(x, x') = scale^2 * (1 + sqrt(3) r) exp(-sqrt(3) r)

with r = sqrt(sum_j (x_j - x'_j)^2 / l_j^2). Observation noise enters only on
the Gram diagonal: the indicator in k(x, x') + noise_sd^2 * 1{x = x'} means
"same observation index", never coordinate equality, so cross-covariances to
prediction points carry no noise term.
"""

from dataclasses import dataclass

import numpy as np

from .validation import as_point, as_points

FAMILIES = ("rbf_ard", "matern52_ard", "matern32_ard")


def check_family(family: str) -> str:
    if family not in FAMILIES:
        raise ValueError(f"unknown kernel family {family!r}; choose from {FAMILIES}")
    return family


@dataclass(frozen=True)
class KernelParams:
    """Hyperparameters: signal scale, ARD lengthscales, observation noise sd."""

    scale: float
    lengths: np.ndarray
    noise_sd: float = 0.0

    def __post_init__(self):
        lengths = np.asarray(self.lengths, dtype=float).reshape(-1)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "noise_sd", float(self.noise_sd))
        if self.scale <= 0.0 or not np.isfinite(self.scale):
            raise ValueError("scale must be strictly positive")
        if lengths.size == 0 or np.any(lengths <= 0.0) or not np.all(np.isfinite(lengths)):
            raise ValueError("lengthscales must be strictly positive")
        if self.noise_sd < 0.0 or not np.isfinite(self.noise_sd):
            raise ValueError("noise_sd must be non-negative")

    @property
    def dim(self) -> int:
        return self.lengths.shape[0]

    @property
    def prior_variance(self) -> float:
        """Signal variance scale^2 (latent prior variance at any point)."""
        return self.scale**2

    @property
    def noisy_variance(self) -> float:
        """scale^2 + noise_sd^2, the Gram diagonal value."""
        return self.scale**2 + self.noise_sd**2


def _correlation(family: str, params: KernelParams, X: np.ndarray, Z: np.ndarray):
    """Noise-free covariance matrix between the rows of X (n,d) and Z (m,d)."""
    diff = (X[:, None, :] - Z[None, :, :]) / params.lengths
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    if family == "rbf_ard":
        return params.prior_variance * np.exp(-sq)
    r = np.sqrt(sq)
    if family == "matern52_ard":
        c = np.sqrt(5.0) * r
        return params.prior_variance * (1.0 + c + c * c / 3.0) * np.exp(-c)
    if family == "matern32_ard":
        c = np.sqrt(3.0) * r
        return params.prior_variance * (1.0 + c) * np.exp(-c)
    raise ValueError(f"unknown kernel family {family!r}")


def cross_matrix(family, params, X, Z) -> np.ndarray:
    """Noise-free (n, m) covariance matrix between two point sets."""
    check_family(family)
    X = as_points(X, dim=params.dim, name="X")
    Z = as_points(Z, dim=params.dim, name="Z")
    return _correlation(family, params, X, Z)


def kernel_cross(family, params, X, x) -> np.ndarray:
    """Noise-free covariance vector between the rows of X and one point x."""
    x = as_point(x, dim=params.dim)
    return cross_matrix(family, params, X, x[None, :])[:, 0]


def kernel_eval(family, params, x, x2, same_index=False) -> float:
    """Covariance between two points; add noise only when both are the same
    observation (``same_index=True``)."""
    x = as_point(x, dim=params.dim)
    x2 = as_point(x2, dim=params.dim, name="x2")
    value = float(cross_matrix(family, params, x[None, :], x2[None, :])[0, 0])
    if same_index:
        value += params.noise_sd**2
    return value


def kernel_gram(family, params, X) -> np.ndarray:
    """Gram matrix of a design: cross-covariances plus noise on the diagonal."""
    check_family(family)
    X = as_points(X, dim=params.dim, name="X")
    K = _correlation(family, params, X, X)
    if params.noise_sd > 0.0:
        K[np.diag_indices_from(K)] += params.noise_sd**2
    return K
