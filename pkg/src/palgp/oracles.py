"""Observation sources for sequential design.

Synthetic oracles expose both a noisy ``query`` (one seeded Gaussian draw per
call, so identical seed and query sequence reproduce identical observations)
and a noise-free ``truth`` for evaluation. Recorded-data oracles return their
stored values verbatim and do not support ``truth``.

The external ask/tell oracle drives a human- or simulator-in-the-loop file
protocol inside a working directory:

* query ``i`` writes ``query_<i>.csv`` (header ``x_1..x_d``, one row);
* the counterpart answers with ``answer_<i>.csv`` (header ``y``, one row);
* the oracle polls for the answer file and raises OracleTimeoutError when the
  timeout expires.
"""

import csv
import time
from pathlib import Path

import numpy as np

from .exceptions import (
    NoSuchRecordError,
    OracleError,
    OracleTimeoutError,
    UnsupportedOracleError,
)
from .partition import DesignSpace
from .validation import as_point, as_points, as_vector

KINDS = ("sine1d", "hetero2d", "table", "external")


class Oracle:
    """Base interface: a design space plus a point-wise observation source."""

    kind = "abstract"

    def __init__(self, space: DesignSpace, noise_sd: float = 0.0, seed: int = 0):
        if noise_sd < 0.0:
            raise ValueError("noise_sd must be non-negative")
        self.space = space
        self.noise_sd = float(noise_sd)
        self.seed = int(seed)
        self._rng = np.random.default_rng(seed)

    def _project(self, x):
        return self.space.project(as_point(x, dim=self.space.dim))

    def truth(self, x) -> float:
        """Noise-free response; unsupported for recorded-data oracles."""
        raise UnsupportedOracleError(f"{self.kind} oracle has no noise-free truth")

    def query(self, x) -> float:
        """One noisy observation at x."""
        x = self._project(x)
        return self.truth(x) + self.noise_sd * float(self._rng.standard_normal())


class Sine1dOracle(Oracle):
    """f(x) = 2 x sin(8 pi x^3) on [0, 1].

    The cubic phase makes the response slowly varying on roughly the lower
    half of the domain and increasingly oscillatory toward 1, which is the
    canonical two-regime stress test for a single stationary lengthscale.
    """

    kind = "sine1d"

    def __init__(self, noise_sd=0.0, seed=0):
        super().__init__(DesignSpace([0.0], [1.0]), noise_sd, seed)

    def truth(self, x) -> float:
        x = self._project(x)
        return float(2.0 * x[0] * np.sin(8.0 * np.pi * x[0] ** 3))


class Hetero2dOracle(Oracle):
    """f(x1, x2) = x1 exp(-x1^2 - x2^2) on [-2, 6]^2.

    One quadrant near the origin holds all the structure (a peak/valley
    pair); the rest of the domain is an essentially flat plateau at zero.
    """

    kind = "hetero2d"

    def __init__(self, noise_sd=0.0, seed=0):
        super().__init__(DesignSpace([-2.0, -2.0], [6.0, 6.0]), noise_sd, seed)

    def truth(self, x) -> float:
        x = self._project(x)
        return float(x[0] * np.exp(-x[0] ** 2 - x[1] ** 2))


class TableLookupOracle(Oracle):
    """Replays recorded observations: nearest stored point within ``tol``.

    Stored responses are returned verbatim (they already carry the real
    process noise); queries farther than ``tol`` from every record raise
    NoSuchRecordError, and ``truth`` is unsupported.
    """

    kind = "table"

    def __init__(self, space, X, y, tol=1e-9):
        super().__init__(space, 0.0, 0)
        self.X = as_points(X, dim=space.dim)
        self.y = as_vector(y, n=self.X.shape[0])
        if self.X.shape[0] == 0:
            raise OracleError("lookup table is empty")
        self.tol = float(tol)

    @classmethod
    def from_csv(cls, space, path, tol=1e-9):
        from .io import read_dataset_csv

        X, y = read_dataset_csv(path, dim=space.dim)
        return cls(space, X, y, tol=tol)

    def query(self, x) -> float:
        x = self._project(x)
        dists = np.sqrt(((self.X - x) ** 2).sum(axis=1))
        i = int(np.argmin(dists))
        if dists[i] > self.tol:
            raise NoSuchRecordError(
                f"no record within {self.tol:g} of {x} (closest at {dists[i]:.3g})"
            )
        return float(self.y[i])


class AskTellOracle(Oracle):
    """File-protocol oracle for an external labelling process (see module doc).

    ``truth`` is unsupported; answers are returned verbatim.
    """

    kind = "external"

    def __init__(self, space, directory, poll_interval=1.0, timeout=86400.0):
        super().__init__(space, 0.0, 0)
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        if poll_interval <= 0.0 or timeout <= 0.0:
            raise ValueError("poll_interval and timeout must be positive")
        self.poll_interval = float(poll_interval)
        self.timeout = float(timeout)
        self._index = 0
        while (self.directory / f"query_{self._index}.csv").exists():
            self._index += 1

    def query(self, x) -> float:
        x = self._project(x)
        idx = self._index
        query_path = self.directory / f"query_{idx}.csv"
        answer_path = self.directory / f"answer_{idx}.csv"
        with open(query_path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow([f"x_{j + 1}" for j in range(self.space.dim)])
            writer.writerow([f"{v:.17g}" for v in x])
        deadline = time.monotonic() + self.timeout
        while not answer_path.exists():
            if time.monotonic() > deadline:
                raise OracleTimeoutError(
                    f"no answer for query {idx} within {self.timeout:g} s"
                )
            time.sleep(self.poll_interval)
        with open(answer_path, newline="") as handle:
            rows = list(csv.reader(handle))
        if len(rows) < 2 or not rows[1]:
            raise OracleError(f"malformed answer file {answer_path}")
        self._index += 1
        return float(rows[1][0])


def make_oracle(kind, **kwargs) -> Oracle:
    """Factory keyed by the CLI-facing kind strings."""
    if kind == "sine1d":
        return Sine1dOracle(
            noise_sd=kwargs.get("noise_sd", 0.0), seed=kwargs.get("seed", 0)
        )
    if kind == "hetero2d":
        return Hetero2dOracle(
            noise_sd=kwargs.get("noise_sd", 0.0), seed=kwargs.get("seed", 0)
        )
    if kind == "table":
        return TableLookupOracle.from_csv(
            kwargs["space"], kwargs["path"], tol=kwargs.get("tol", 1e-9)
        )
    if kind == "external":
        return AskTellOracle(
            kwargs["space"],
            kwargs["directory"],
            poll_interval=kwargs.get("poll_interval", 1.0),
            timeout=kwargs.get("timeout", 86400.0),
        )
    raise ValueError(f"unknown oracle kind {kind!r}; choose from {KINDS}")
