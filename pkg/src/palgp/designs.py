"""Space-filling designs: maximin Latin hypercubes, uniform draws, grids.

All generators are deterministic given their seed. Latin hypercube designs
place exactly one point per axis stratum ``[(i-1)/n, i/n)``; the maximin
variant draws ``restarts`` independent hypercubes and keeps the one with the
largest minimum pairwise distance (measured in normalized coordinates, first
candidate wins ties), so ``restarts=1`` is the plain LHD with the same seed.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .exceptions import RegionTooSmallError
from .partition import DesignSpace, RegionClassifier
from .seeding import mix_seed

DEFAULT_RESTARTS = 50
REGION_OVERSAMPLE_CAP = 100


@dataclass(frozen=True)
class DesignBatch:
    """A generated point set plus provenance (generator tag and seed)."""

    points: np.ndarray
    generator: str
    seed: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("points must form a 2-D array")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]


def _unit_lhd(rng, n, d):
    cols = [(rng.permutation(n) + rng.random(n)) / n for _ in range(d)]
    return np.column_stack(cols)


def lhd_maximin(space: DesignSpace, n: int, seed: int, restarts: int = DEFAULT_RESTARTS):
    """Maximin Latin hypercube design with ``n`` points over the space."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    rng = np.random.default_rng(seed)
    best = None
    best_score = -np.inf
    for _ in range(restarts):
        unit = _unit_lhd(rng, n, space.dim)
        score = pdist(unit).min() if n > 1 else np.inf
        if score > best_score:
            best, best_score = unit, score
    return DesignBatch(space.denormalize(best), "maximin_lhd", int(seed))


def uniform_random(space: DesignSpace, n: int, seed: int):
    """n points drawn i.i.d. uniformly over the space."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    unit = rng.random((n, space.dim))
    return DesignBatch(space.denormalize(unit), "uniform_random", int(seed))


def grid(space: DesignSpace, points_per_dim: int):
    """Regular grid with ``points_per_dim`` cell centers per axis."""
    if points_per_dim < 1:
        raise ValueError("points_per_dim must be at least 1")
    centers = (np.arange(points_per_dim) + 0.5) / points_per_dim
    axes = np.meshgrid(*([centers] * space.dim), indexing="ij")
    unit = np.column_stack([a.reshape(-1) for a in axes])
    return DesignBatch(space.denormalize(unit), "grid", 0)


def filter_to_region(batch: DesignBatch, classifier: RegionClassifier, region: int):
    """Subsequence of the batch classified into ``region``, order preserved."""
    if batch.n == 0:
        return DesignBatch(batch.points, batch.generator, batch.seed)
    keep = classifier.labels(batch.points) == region
    return DesignBatch(batch.points[keep], batch.generator, batch.seed)


def region_lhd(
    space: DesignSpace,
    classifier: RegionClassifier,
    region: int,
    n: int,
    seed: int,
    restarts: int = DEFAULT_RESTARTS,
):
    """n points inside one region, by LHD draws over the box plus rejection.

    Successive seeded hypercubes of size ``n`` are filtered to the region and
    accumulated; if ``REGION_OVERSAMPLE_CAP * n`` draws leave the set short,
    RegionTooSmallError is raised (the region's volume fraction is too small
    for rejection sampling to be sensible).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    accepted = []
    total = 0
    drawn = 0
    attempt = 0
    while total < n:
        if drawn >= REGION_OVERSAMPLE_CAP * n:
            raise RegionTooSmallError(
                f"region {region} yielded {total}/{n} candidates after "
                f"{drawn} draws"
            )
        batch = lhd_maximin(space, n, mix_seed(seed, attempt), restarts=restarts)
        attempt += 1
        drawn += n
        kept = filter_to_region(batch, classifier, region).points
        if kept.shape[0]:
            accepted.append(kept)
            total += kept.shape[0]
    points = np.vstack(accepted)[:n]
    return DesignBatch(points, "maximin_lhd", int(seed))
