"""Input-validation helpers used by the core modules and the estimator facade."""

import numbers

import numpy as np

from .exceptions import DimensionMismatchError


def as_points(X, dim=None, name="X") -> np.ndarray:
    """Coerce to a float (n, d) array; 1-D input is treated as n points in 1-D."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {X.shape}")
    if dim is not None and X.shape[1] != dim:
        raise DimensionMismatchError(
            f"{name} has {X.shape[1]} columns, expected {dim}"
        )
    if X.size and not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def as_point(x, dim=None, name="x") -> np.ndarray:
    """Coerce a single point to a float (d,) vector."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if dim is not None and x.shape[0] != dim:
        raise DimensionMismatchError(f"{name} has length {x.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def as_vector(y, n=None, name="y") -> np.ndarray:
    """Coerce to a float (n,) vector."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if n is not None and y.shape[0] != n:
        raise DimensionMismatchError(f"{name} has length {y.shape[0]}, expected {n}")
    if y.size and not np.all(np.isfinite(y)):
        raise ValueError(f"{name} contains non-finite values")
    return y


def check_positive_int(value, name) -> int:
    if not isinstance(value, numbers.Integral) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)
