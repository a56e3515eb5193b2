"""Single-region Gaussian-process regression.

A fitted model is an immutable value: design, observations, kernel
hyperparameters, the lower Cholesky factor of the Gram matrix, and the solved
weights ``alpha = K^{-1} y``. Prediction and the sequential-design criteria
only ever touch the factor (never a dense inverse); growing a model by one
point reuses the factor through the bordered update in :mod:`palgp.linalg`.

Hyperparameters are fitted by maximizing the log marginal likelihood

    -(1/2) (y^T K^{-1} y + log det K + n log 2pi)

with a derivative-free Nelder-Mead search over log-parameters, multi-started
from a small Latin hypercube across the bound box. With fewer than two
observations the likelihood cannot identify the parameters and ``fit``
returns the initialization defaults unchanged.
"""

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from . import designs, kernels, linalg
from .exceptions import DegenerateDataWarning, DimensionMismatchError
from .kernels import KernelParams
from .partition import DesignSpace
from .validation import as_point, as_points, as_vector

# bound box multipliers (relative to per-dimension data range / sd of y)
LENGTH_BOUNDS = (1e-3, 1e2)
SCALE_BOUNDS = (1e-3, 1e3)
NOISE_BOUNDS = (1e-6, 1.0)

# initialization defaults, same units
INIT_LENGTH_FRACTION = 0.3
INIT_NOISE_FRACTION = 0.05

# likelihood slack (nats) within which final optima count as tied; must sit
# above the simplex fatol so ridge co-optima are not split by termination
# noise, and far below any statistically meaningful likelihood difference
RIDGE_TIE_TOL = 1e-5

_PENALTY = 1e12


@dataclass(frozen=True)
class FitConfig:
    """Optimizer settings for hyperparameter fitting.

    ``x_range`` supplies per-dimension ranges used when the data's own range
    is degenerate (fewer than two points, or a constant column); the training
    loop passes the design-space widths here.
    """

    n_starts: int = 5
    max_iter: int = 200
    tol: float = 1e-6
    seed: int = 0
    x_range: np.ndarray | None = None


@dataclass(frozen=True)
class LocalGp:
    """An immutable fitted (or placeholder) GP over one region."""

    family: str
    params: KernelParams
    X: np.ndarray
    y: np.ndarray
    factor: np.ndarray
    alpha: np.ndarray

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.params.dim


def build(family, params, X, y) -> LocalGp:
    """Assemble a LocalGp with given hyperparameters (no optimization).

    Factorizes the Gram matrix and solves for the weights; ``n = 0`` gives an
    empty placeholder that predicts the prior.
    """
    kernels.check_family(family)
    X = as_points(X, dim=params.dim)
    y = as_vector(y, n=X.shape[0])
    if X.shape[0] == 0:
        return LocalGp(family, params, X, y, np.zeros((0, 0)), np.zeros(0))
    L = linalg.cholesky(kernels.kernel_gram(family, params, X))
    alpha = linalg.solve_chol(L, y)
    return LocalGp(family, params, X, y, L, alpha)


def log_marginal_likelihood(family, params, X, y) -> float:
    """Gaussian log marginal likelihood of y under the kernel's Gram matrix."""
    X = as_points(X, dim=params.dim)
    y = as_vector(y, n=X.shape[0])
    n = X.shape[0]
    if n == 0:
        raise DimensionMismatchError("log marginal likelihood needs n >= 1")
    L = linalg.cholesky(kernels.kernel_gram(family, params, X))
    alpha = linalg.solve_chol(L, y)
    log_det = 2.0 * float(np.sum(np.log(np.diag(L))))
    return -0.5 * (float(y @ alpha) + log_det + n * np.log(2.0 * np.pi))


def model_log_marginal(gp: LocalGp) -> float:
    """log_marginal_likelihood evaluated from the cached factor and weights."""
    n = gp.n
    if n == 0:
        raise DimensionMismatchError("log marginal likelihood needs n >= 1")
    log_det = 2.0 * float(np.sum(np.log(np.diag(gp.factor))))
    return -0.5 * (float(gp.y @ gp.alpha) + log_det + n * np.log(2.0 * np.pi))


def _ranges_and_sd(X, y, x_range):
    """Per-dimension ranges and sd(y), with unit fallbacks for degenerate data."""
    n, d = X.shape
    if x_range is not None:
        fallback = np.asarray(x_range, dtype=float).reshape(-1)
        if fallback.shape[0] != d:
            raise DimensionMismatchError("x_range length must match the dimension")
    else:
        fallback = np.ones(d)
    ranges = X.max(axis=0) - X.min(axis=0) if n >= 2 else np.zeros(d)
    degenerate_dim = ranges <= 0.0
    ranges = np.where(degenerate_dim, np.where(fallback > 0.0, fallback, 1.0), ranges)
    sd = float(np.std(y, ddof=1)) if n >= 2 else 0.0
    degenerate_y = not np.isfinite(sd) or sd <= 0.0
    if degenerate_y:
        sd = 1.0
    return ranges, sd, degenerate_y


def default_params(family, X, y, x_range=None) -> KernelParams:
    """Initialization-default hyperparameters for a dataset (or placeholder)."""
    kernels.check_family(family)
    X = as_points(X)
    y = as_vector(y, n=X.shape[0])
    ranges, sd, _ = _ranges_and_sd(X, y, x_range)
    return KernelParams(
        scale=sd,
        lengths=INIT_LENGTH_FRACTION * ranges,
        noise_sd=INIT_NOISE_FRACTION * sd,
    )


def _median_spacing(X: np.ndarray, ranges: np.ndarray) -> np.ndarray:
    """Median nearest sample spacing per dimension (range fallback)."""
    spacing = np.empty(X.shape[1])
    for j in range(X.shape[1]):
        gaps = np.diff(np.sort(X[:, j]))
        gaps = gaps[gaps > 0.0]
        spacing[j] = np.median(gaps) if gaps.size else ranges[j]
    return spacing


def _latent_share(theta: np.ndarray) -> float:
    scale_sq = np.exp(2.0 * theta[0])
    total = scale_sq + np.exp(2.0 * theta[-1])
    return float(scale_sq / total) if total > 0.0 else 0.0


def _pack(params: KernelParams) -> np.ndarray:
    return np.log(
        np.concatenate(([params.scale], params.lengths, [params.noise_sd]))
    )


def _unpack(theta: np.ndarray) -> KernelParams:
    values = np.exp(theta)
    return KernelParams(scale=values[0], lengths=values[1:-1], noise_sd=values[-1])


def fit(family, X, y, config: FitConfig = FitConfig(), incumbent=None) -> LocalGp:
    """Fit hyperparameters by multi-start Nelder-Mead over log-parameters.

    Bounds (relative to data scales): lengthscales in [1e-3, 1e2] * range_j,
    scale in [1e-3, 1e3] * sd(y), noise sd in [1e-6, 1] * sd(y). Starts are a
    maximin LHD over the log-space box plus one start at the data's
    resolution scale; each search runs at most ``config.max_iter`` iterations
    with simplex tolerance ``config.tol``, and the best final likelihood wins
    (ties within RIDGE_TIE_TOL resolved toward the latent-heavy variance
    split). Constant observations trigger a DegenerateDataWarning and a unit
    sd fallback.

    ``incumbent`` adds one start at the given KernelParams (clipped into the
    box). Refits pass the previous fit here so the achieved likelihood never
    falls below the incumbent basin's: without it, a refit whose fresh starts
    all miss a narrow optimum silently reverts to an inferior interpretation
    of the data, and a sequential design steered by the reverted model can
    starve the affected region permanently.
    """
    kernels.check_family(family)
    X = as_points(X)
    y = as_vector(y, n=X.shape[0])
    n, d = X.shape
    ranges, sd, degenerate_y = _ranges_and_sd(X, y, config.x_range)
    if n >= 2 and degenerate_y:
        warnings.warn(
            "observations are constant; using a unit sd fallback for the "
            "hyperparameter bounds",
            DegenerateDataWarning,
        )
    defaults = KernelParams(
        scale=sd,
        lengths=INIT_LENGTH_FRACTION * ranges,
        noise_sd=INIT_NOISE_FRACTION * sd,
    )
    if n < 2:
        return build(family, defaults, X, y)

    lower = np.log(
        np.concatenate(
            ([SCALE_BOUNDS[0] * sd], LENGTH_BOUNDS[0] * ranges, [NOISE_BOUNDS[0] * sd])
        )
    )
    upper = np.log(
        np.concatenate(
            ([SCALE_BOUNDS[1] * sd], LENGTH_BOUNDS[1] * ranges, [NOISE_BOUNDS[1] * sd])
        )
    )

    def objective(theta):
        try:
            return -log_marginal_likelihood(family, _unpack(theta), X, y)
        except linalg.NotPositiveDefiniteError:
            return _PENALTY

    start_list = list(
        designs.lhd_maximin(
            DesignSpace(lower, upper), config.n_starts, config.seed, restarts=10
        ).points
    )
    # one start at the data's resolution scale: lengths at the median sample
    # spacing reach the narrowest basin the data can support, and degrade to
    # the latent-heavy white limit when nothing is resolvable there
    resolution = np.concatenate(
        ([sd], _median_spacing(X, ranges), [INIT_NOISE_FRACTION * sd])
    )
    start_list.append(np.clip(np.log(resolution), lower, upper))
    if incumbent is not None:
        start_list.append(np.clip(_pack(incumbent), lower, upper))

    finals = []
    for theta0 in start_list:
        result = minimize(
            objective,
            theta0,
            method="Nelder-Mead",
            bounds=list(zip(lower, upper)),
            options={
                "maxiter": config.max_iter,
                "xatol": config.tol,
                "fatol": config.tol,
            },
        )
        finals.append((float(result.fun), result.x))
    best_value = min(value for value, _ in finals)
    # lengths far below the sample spacing make K ~ (tau^2 + sigma^2) I, so
    # the likelihood identifies only the total variance and ties along the
    # latent/noise split. Resolve ties toward the latent-heavy end: a sparse
    # region then reads "large unexplained variance" rather than "pure
    # noise", which keeps integrated-variance criteria sampling it instead of
    # writing it off before the data can tell the difference.
    tied = [theta for value, theta in finals if value <= best_value + RIDGE_TIE_TOL]
    best_theta = max(tied, key=_latent_share)
    return build(family, _unpack(best_theta), X, y)


def _cross_and_solve(gp: LocalGp, Xq: np.ndarray):
    K_cross = kernels.cross_matrix(gp.family, gp.params, gp.X, Xq)
    V = linalg.solve_lower(gp.factor, K_cross) if gp.n else K_cross
    return K_cross, V


def predict_batch(gp: LocalGp, Xq):
    """Posterior means and noisy predictive variances at query rows.

    The variance is ``scale^2 + noise_sd^2 - v^T v`` with
    ``v = L^{-1} k(X, x)``, clamped at zero; an empty model returns the prior
    (mean 0, variance scale^2 + noise_sd^2).
    """
    Xq = as_points(Xq, dim=gp.dim, name="Xq")
    K_cross, V = _cross_and_solve(gp, Xq)
    means = K_cross.T @ gp.alpha if gp.n else np.zeros(Xq.shape[0])
    variances = gp.params.noisy_variance - np.einsum("ij,ij->j", V, V)
    return means, np.maximum(variances, 0.0)


def predict(gp: LocalGp, x):
    """Posterior mean and noisy predictive variance at a single point."""
    x = as_point(x, dim=gp.dim)
    means, variances = predict_batch(gp, x[None, :])
    return float(means[0]), float(variances[0])


def latent_variances(gp: LocalGp, Xq) -> np.ndarray:
    """Posterior variances of the latent function (no observation noise).

    This is the integrand of the integrated-variance criteria; values are not
    clamped, so exact interpolation may show harmless ~1e-16 negatives.
    """
    Xq = as_points(Xq, dim=gp.dim, name="Xq")
    _, V = _cross_and_solve(gp, Xq)
    return gp.params.prior_variance - np.einsum("ij,ij->j", V, V)


def extend(gp: LocalGp, x, y_new) -> LocalGp:
    """Return the model grown by one observation, hyperparameters unchanged.

    The factor grows through the O(n^2) bordered update; only the weights are
    re-solved. Predictions agree with a from-scratch rebuild at the same
    hyperparameters to machine precision.
    """
    x = as_point(x, dim=gp.dim)
    k_cross = kernels.kernel_cross(gp.family, gp.params, gp.X, x) if gp.n else np.zeros(0)
    L1 = linalg.chol_append(gp.factor, k_cross, gp.params.noisy_variance)
    X1 = np.vstack([gp.X, x[None, :]]) if gp.n else x[None, :].copy()
    y1 = np.append(gp.y, float(y_new))
    alpha1 = linalg.solve_chol(L1, y1)
    return replace(gp, X=X1, y=y1, factor=L1, alpha=alpha1)
