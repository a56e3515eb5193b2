"""Design spaces, datasets, and hard partitions of the input domain.

A partition assigns every in-domain point to exactly one region, labeled with
the integers ``1..M``. Region classifiers are deterministic and total; ties
always resolve toward the lower index so repeated runs agree bit-for-bit.

:func:`estimate_partition` infers a partition from data when none is known:
each sample gets a local slope score (largest finite-difference magnitude
among its nearest neighbors), the scores are clustered with a 1-D k-means,
clusters are relabeled by ascending mean slope (region 1 = flattest), and a
k-NN majority vote generalizes the sample labels to the whole domain.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DegenerateDataError,
    DegenerateDataWarning,
    DimensionMismatchError,
    OutOfDomainError,
)
from .validation import as_point, as_points, as_vector

CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class DesignSpace:
    """Axis-aligned box domain with strictly ordered bounds."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape or lower.size == 0:
            raise DimensionMismatchError("lower and upper must share a nonzero shape")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("bounds must be finite")
        if np.any(lower >= upper):
            raise ValueError("lower bounds must be strictly below upper bounds")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def range(self) -> np.ndarray:
        return self.upper - self.lower

    def normalize(self, X) -> np.ndarray:
        """Map points into the unit cube."""
        X = np.asarray(X, dtype=float)
        return (X - self.lower) / self.range

    def denormalize(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        return self.lower + U * self.range

    def project(self, X):
        """Clamp points onto the box; beyond CLAMP_TOL * range raises OutOfDomainError."""
        X = np.asarray(X, dtype=float)
        tol = CLAMP_TOL * np.maximum(1.0, np.abs(self.range))
        if np.any(X < self.lower - tol) or np.any(X > self.upper + tol):
            raise OutOfDomainError("point lies outside the design space")
        return np.clip(X, self.lower, self.upper)


@dataclass(frozen=True)
class Dataset:
    """Paired design points and noisy observations over a design space."""

    space: DesignSpace
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = as_points(self.X, dim=self.space.dim)
        y = as_vector(self.y, n=X.shape[0])
        X = self.space.project(X)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]


class RegionClassifier:
    """Base class: a total, deterministic map from the domain onto ``1..M``."""

    def __init__(self, space: DesignSpace, num_regions: int):
        if num_regions < 1:
            raise ValueError("num_regions must be at least 1")
        self.space = space
        self.num_regions = int(num_regions)

    def labels(self, X) -> np.ndarray:
        """Region labels (1-based) for each row of X."""
        X = as_points(X, dim=self.space.dim)
        X = self.space.project(X)
        return self._labels(X)

    def _labels(self, X) -> np.ndarray:  # X already validated and clamped
        raise NotImplementedError

    def classify(self, x) -> int:
        x = as_point(x, dim=self.space.dim)
        return int(self.labels(x[None, :])[0])

    def classify_batch(self, X):
        """Split row indices of X by region: a list of M index arrays."""
        lab = self.labels(X)
        return [np.flatnonzero(lab == m) for m in range(1, self.num_regions + 1)]


class TrivialClassifier(RegionClassifier):
    """Single-region partition: everything is region 1."""

    def __init__(self, space: DesignSpace):
        super().__init__(space, 1)

    def _labels(self, X):
        return np.ones(X.shape[0], dtype=int)


class ExplicitRuleClassifier(RegionClassifier):
    """Regions defined by per-dimension threshold rules, first match wins.

    ``rules`` is a list with one entry per region; each entry is a list of
    ``(dim_index, op, threshold)`` conditions with ``op`` in ``{"lt", "ge"}``,
    interpreted as a conjunction. An empty condition list always matches, so a
    final catch-all region guarantees totality.
    """

    def __init__(self, space, rules):
        if not rules:
            raise ValueError("at least one rule is required")
        parsed = []
        for conditions in rules:
            conds = []
            for dim_index, op, threshold in conditions:
                if not 0 <= int(dim_index) < space.dim:
                    raise DimensionMismatchError(
                        f"rule refers to dimension {dim_index} in a "
                        f"{space.dim}-dimensional space"
                    )
                if op not in ("lt", "ge"):
                    raise ValueError(f"unknown comparison {op!r}; use 'lt' or 'ge'")
                conds.append((int(dim_index), op, float(threshold)))
            parsed.append(tuple(conds))
        self.rules = tuple(parsed)
        super().__init__(space, len(parsed))

    def _labels(self, X):
        n = X.shape[0]
        out = np.zeros(n, dtype=int)
        unassigned = np.ones(n, dtype=bool)
        for m, conds in enumerate(self.rules, start=1):
            mask = unassigned.copy()
            for j, op, c in conds:
                if op == "lt":
                    mask &= X[:, j] < c
                else:
                    mask &= X[:, j] >= c
            out[mask] = m
            unassigned &= ~mask
        if np.any(unassigned):
            bad = X[np.flatnonzero(unassigned)[0]]
            raise OutOfDomainError(f"no rule matches point {bad}")
        return out


class VoronoiSeedClassifier(RegionClassifier):
    """Nearest labeled seed wins, distances in normalized coordinates.

    Equidistant seeds resolve to the earliest seed in storage order, and seed
    labels must cover ``1..M`` without gaps.
    """

    def __init__(self, space, seeds, labels):
        seeds = as_points(seeds, dim=space.dim, name="seeds")
        labels = np.asarray(labels, dtype=int).reshape(-1)
        if labels.shape[0] != seeds.shape[0] or seeds.shape[0] == 0:
            raise DimensionMismatchError("seeds and labels must pair up, nonempty")
        m = int(labels.max())
        if labels.min() < 1 or set(np.unique(labels)) != set(range(1, m + 1)):
            raise ValueError("seed labels must cover 1..M without gaps")
        self.seeds = space.project(seeds)
        self.seed_labels = labels
        self._seeds_unit = space.normalize(self.seeds)
        super().__init__(space, m)

    def _labels(self, X):
        U = self.space.normalize(X)
        d2 = ((U[:, None, :] - self._seeds_unit[None, :, :]) ** 2).sum(axis=2)
        return self.seed_labels[np.argmin(d2, axis=1)]


class KnnLabelClassifier(RegionClassifier):
    """Majority vote among the k nearest labeled samples (normalized coords).

    Distance ties keep storage order; vote ties go to the smaller label.
    """

    def __init__(self, space, X, labels, k=3):
        X = as_points(X, dim=space.dim)
        labels = np.asarray(labels, dtype=int).reshape(-1)
        if labels.shape[0] != X.shape[0] or X.shape[0] == 0:
            raise DimensionMismatchError("X and labels must pair up, nonempty")
        m = int(labels.max())
        if labels.min() < 1 or set(np.unique(labels)) != set(range(1, m + 1)):
            raise ValueError("labels must cover 1..M without gaps")
        if k < 1:
            raise ValueError("k must be at least 1")
        self.X = space.project(X)
        self.sample_labels = labels
        self.k = int(min(k, X.shape[0]))
        self._unit = space.normalize(self.X)
        super().__init__(space, m)

    def _labels(self, X):
        U = self.space.normalize(X)
        d2 = ((U[:, None, :] - self._unit[None, :, :]) ** 2).sum(axis=2)
        order = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        votes = self.sample_labels[order]
        out = np.empty(X.shape[0], dtype=int)
        for i in range(X.shape[0]):
            counts = np.bincount(votes[i], minlength=self.num_regions + 1)
            out[i] = int(np.argmax(counts))  # first max = smallest label
        return out


@dataclass(frozen=True)
class EstimatePartition:
    """Marker asking the training loop to estimate the partition from the
    initial design instead of receiving one."""

    num_regions: int
    k_neighbors: int = 3


def _kmeans_1d(values, num_clusters, max_iter=100):
    """Seeded-free 1-D k-means: centroids start at the 1/(M+1)..M/(M+1)
    quantiles, assignment ties go to the lower cluster index."""
    centroids = np.quantile(
        values, [m / (num_clusters + 1.0) for m in range(1, num_clusters + 1)]
    )
    assign = None
    for _ in range(max_iter):
        dist = np.abs(values[:, None] - centroids[None, :])
        new_assign = np.argmin(dist, axis=1)  # first min = lower cluster on ties
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(num_clusters):
            members = values[assign == c]
            if members.size:
                centroids[c] = members.mean()
    return assign


def estimate_partition(data: Dataset, num_regions: int, k_neighbors: int = 3):
    """Infer a region classifier from observed local slopes.

    Each sample's slope score is the largest ``|y_i - y_j| / ||x_i - x_j||``
    over its ``k_neighbors`` nearest neighbors, with distances taken in
    normalized (unit-cube) coordinates. Scores are clustered into
    ``num_regions`` groups by 1-D k-means and relabeled by ascending mean
    slope, then generalized by a k-NN majority vote.

    Falls back to a single region (with a DegenerateDataWarning) when the
    scores carry no spread; duplicate-point pairs are skipped, and if no
    sample has any usable pair DegenerateDataError is raised.
    """
    if num_regions < 2:
        raise ValueError("num_regions must be at least 2; use TrivialClassifier")
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be at least 1")
    n = data.n
    if n < 2 * num_regions:
        raise DegenerateDataError(
            f"need at least {2 * num_regions} samples to estimate "
            f"{num_regions} regions, got {n}"
        )
    U = data.space.normalize(data.X)
    diff = U[:, None, :] - U[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    k = min(k_neighbors, n - 1)

    scores = np.full(n, np.nan)
    for i in range(n):
        order = np.argsort(dist[i], kind="stable")
        neighbors = [j for j in order if j != i][:k]
        slopes = [
            abs(data.y[i] - data.y[j]) / dist[i, j]
            for j in neighbors
            if dist[i, j] > 0.0
        ]
        if slopes:
            scores[i] = max(slopes)
    defined = np.flatnonzero(np.isfinite(scores))
    if defined.size == 0:
        raise DegenerateDataError("all neighbor pairs are duplicate points")

    usable = scores[defined]
    if np.ptp(usable) == 0.0:
        warnings.warn(
            "slope scores carry no spread; falling back to a single region",
            DegenerateDataWarning,
        )
        return TrivialClassifier(data.space)

    assign = _kmeans_1d(usable, num_regions)
    # relabel clusters by ascending mean slope, dropping empty ones
    occupied = [c for c in range(num_regions) if np.any(assign == c)]
    occupied.sort(key=lambda c: usable[assign == c].mean())
    if len(occupied) == 1:
        warnings.warn(
            "slope clustering collapsed to one cluster; using a single region",
            DegenerateDataWarning,
        )
        return TrivialClassifier(data.space)
    if len(occupied) < num_regions:
        warnings.warn(
            f"slope clustering yielded {len(occupied)} of {num_regions} "
            "requested regions",
            DegenerateDataWarning,
        )
    relabel = {c: rank + 1 for rank, c in enumerate(occupied)}
    labels = np.array([relabel[c] for c in assign], dtype=int)
    return KnnLabelClassifier(
        data.space, data.X[defined], labels, k=k_neighbors
    )
