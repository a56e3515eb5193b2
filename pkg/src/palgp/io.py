"""CSV schemas shared by the benchmark harness, the CLI, and the oracles.

All floats are written with 17 significant digits so values round-trip
exactly, and summary statistics can be recomputed bit-for-bit from the
per-replication rows.
"""

import csv
from pathlib import Path

import numpy as np

from .exceptions import ConfigError


def fmt(value: float) -> str:
    return f"{float(value):.17g}"


def _read_rows(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"file not found: {path}")
    with open(path, newline="") as handle:
        rows = [row for row in csv.reader(handle) if row]
    if not rows:
        raise ConfigError(f"empty CSV file: {path}")
    return rows


def write_dataset_csv(path, X, y):
    """Write paired observations with header ``x_1..x_d,y``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow([f"x_{j + 1}" for j in range(X.shape[1])] + ["y"])
        for row, value in zip(X, y):
            writer.writerow([fmt(v) for v in row] + [fmt(value)])


def read_dataset_csv(path, dim=None):
    """Read a ``x_1..x_d,y`` CSV; returns (X, y)."""
    rows = _read_rows(path)
    header = rows[0]
    if len(header) < 2 or header[-1] != "y":
        raise ConfigError(f"{path}: expected header x_1..x_d,y, got {header}")
    d = len(header) - 1
    if header[:d] != [f"x_{j + 1}" for j in range(d)]:
        raise ConfigError(f"{path}: expected header x_1..x_d,y, got {header}")
    if dim is not None and d != dim:
        raise ConfigError(f"{path}: has {d} input columns, expected {dim}")
    data = rows[1:]
    X = np.array([[float(v) for v in row[:d]] for row in data], dtype=float)
    y = np.array([float(row[d]) for row in data], dtype=float)
    if X.size == 0:
        X = X.reshape(0, d)
    return X, y


def read_labeled_csv(path, dim=None):
    """Read a ``x_1..x_d,label`` CSV; returns (X, integer labels)."""
    rows = _read_rows(path)
    header = rows[0]
    if len(header) < 2 or header[-1] != "label":
        raise ConfigError(f"{path}: expected header x_1..x_d,label, got {header}")
    d = len(header) - 1
    if dim is not None and d != dim:
        raise ConfigError(f"{path}: has {d} input columns, expected {dim}")
    data = rows[1:]
    X = np.array([[float(v) for v in row[:d]] for row in data], dtype=float)
    labels = np.array([int(row[d]) for row in data], dtype=int)
    if X.size == 0:
        X = X.reshape(0, d)
    return X, labels


def curve_header(dim):
    return (
        ["iteration", "n_samples", "metric", "criterion_seconds"]
        + [f"x_{j + 1}" for j in range(dim)]
        + ["region"]
    )


def write_curve_csv(path, curve, dim):
    """One learning curve: iteration,n,metric,time,x_1..x_d,region per row.

    The selected point and region are blank on the initial-design row (and on
    passive baselines, which select nothing point-by-point).
    """
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(curve_header(dim))
        for rec in curve.records:
            x_cols = (
                [fmt(v) for v in rec.x] if rec.x is not None else [""] * dim
            )
            writer.writerow(
                [
                    str(rec.iteration),
                    str(rec.n_samples),
                    fmt(rec.metric),
                    fmt(rec.criterion_seconds),
                ]
                + x_cols
                + [str(rec.region) if rec.region is not None else ""]
            )


def read_curve_csv(path):
    """Read a curve CSV back into plain row dicts (floats parsed)."""
    rows = _read_rows(path)
    header, data = rows[0], rows[1:]
    out = []
    for row in data:
        record = dict(zip(header, row))
        record["iteration"] = int(record["iteration"])
        record["n_samples"] = int(record["n_samples"])
        record["metric"] = float(record["metric"])
        record["criterion_seconds"] = float(record["criterion_seconds"])
        out.append(record)
    return out


def write_report_csv(path, reports):
    """Deterministic per-replication report with mean/sd summary rows.

    Columns: strategy,replication,seed,final_metric. Summary rows carry
    ``mean``/``sd`` in the replication column and an empty seed. Wall-clock
    quantities are deliberately excluded so identical runs produce identical
    bytes; timing lives in ``aggregate.csv``.
    """
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["strategy", "replication", "seed", "final_metric"])
        for report in reports:
            for rep, (seed, value) in enumerate(
                zip(report.seeds, report.final_metrics)
            ):
                writer.writerow([report.strategy, str(rep), str(seed), fmt(value)])
            writer.writerow([report.strategy, "mean", "", fmt(report.mean)])
            writer.writerow([report.strategy, "sd", "", fmt(report.sd)])


def read_report_csv(path):
    """Parse report.csv into {strategy: {"values": [...], "mean": m, "sd": s}}."""
    rows = _read_rows(path)
    out = {}
    for row in rows[1:]:
        strategy, replication, _, value = row
        entry = out.setdefault(strategy, {"values": []})
        if replication == "mean":
            entry["mean"] = float(value)
        elif replication == "sd":
            entry["sd"] = float(value)
        else:
            entry["values"].append(float(value))
    return out


def write_aggregate_csv(path, reports):
    """Aggregate summary: strategy,mean,sd,mean_criterion_seconds."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["strategy", "mean", "sd", "mean_criterion_seconds"])
        for report in reports:
            writer.writerow(
                [
                    report.strategy,
                    fmt(report.mean),
                    fmt(report.sd),
                    fmt(report.mean_criterion_seconds),
                ]
            )


def read_aggregate_csv(path):
    rows = _read_rows(path)
    out = {}
    for strategy, mean, sd, mean_time in rows[1:]:
        out[strategy] = {
            "mean": float(mean),
            "sd": float(sd),
            "mean_criterion_seconds": float(mean_time),
        }
    return out
