"""Prediction-accuracy metrics for benchmark studies."""

import numpy as np

from .exceptions import MetricError
from .validation import as_vector

METRICS = ("rmse", "mae", "mre")


def check_metric(metric: str) -> str:
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; choose from {METRICS}")
    return metric


def metric_value(truths, predictions, metric, exclude_zero_truth=False) -> float:
    """rmse / mae / mre between truths and predictions.

    mre is the mean of ``|y - yhat| / |y|``; a zero truth makes it undefined
    and raises MetricError unless ``exclude_zero_truth`` drops those points.
    """
    check_metric(metric)
    truths = as_vector(truths, name="truths")
    predictions = as_vector(predictions, n=truths.shape[0], name="predictions")
    if truths.size == 0:
        raise MetricError("metrics need at least one evaluation point")
    err = predictions - truths
    if metric == "rmse":
        return float(np.sqrt(np.mean(err**2)))
    if metric == "mae":
        return float(np.mean(np.abs(err)))
    zero = truths == 0.0
    if np.any(zero):
        if not exclude_zero_truth:
            raise MetricError(
                f"relative error undefined at zero truths "
                f"(indices {np.flatnonzero(zero)[:5].tolist()}...)"
            )
        keep = ~zero
        if not np.any(keep):
            raise MetricError("all truths are zero; relative error undefined")
        err, truths = err[keep], truths[keep]
    return float(np.mean(np.abs(err) / np.abs(truths)))
