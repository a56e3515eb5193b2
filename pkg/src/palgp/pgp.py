"""Partitioned Gaussian-process surrogates.

A hard partition routes every point to one region; each region owns an
independent local GP, so the joint covariance is block-diagonal and is never
formed. Predictions delegate to the owning region's model, the training
objective is the sum of per-region log marginal likelihoods, and with a
single region the whole construction reduces to the plain GP.

Regions holding fewer than two samples cannot identify hyperparameters and
get placeholder models at the initialization defaults (ranges from the design
space, sd from all observed responses); an empty region then predicts its
prior, which keeps its integrated variance high and lets the global search
send samples there.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import gp as gp_mod
from .gp import FitConfig, LocalGp
from .kernels import KernelParams
from .partition import Dataset, DesignSpace, RegionClassifier
from .validation import as_point

REFIT_MIN_POINTS = 2


@dataclass(frozen=True)
class PartitionedGp:
    """An immutable partitioned surrogate: one LocalGp per region."""

    space: DesignSpace
    classifier: RegionClassifier
    local_gps: tuple
    family: str
    fit_config: FitConfig

    @property
    def num_regions(self) -> int:
        return self.classifier.num_regions

    @property
    def n(self) -> int:
        return sum(local.n for local in self.local_gps)

    def region_gp(self, region: int) -> LocalGp:
        return self.local_gps[region - 1]


def _placeholder_params(family, space, y_all, fit_config):
    """Initialization defaults for a region too small to fit: ranges from the
    design space, sd from all observed responses (unit fallback)."""
    ranges = fit_config.x_range if fit_config.x_range is not None else space.range
    ranges = np.where(np.asarray(ranges, dtype=float) > 0.0, ranges, 1.0)
    sd = float(np.std(y_all, ddof=1)) if y_all.size >= 2 else 0.0
    if not np.isfinite(sd) or sd <= 0.0:
        sd = 1.0
    return KernelParams(
        scale=sd,
        lengths=gp_mod.INIT_LENGTH_FRACTION * ranges,
        noise_sd=gp_mod.INIT_NOISE_FRACTION * sd,
    )


def _fit_region(family, X_m, y_m, space, y_all, fit_config, incumbent=None):
    if X_m.shape[0] >= REFIT_MIN_POINTS:
        cfg = fit_config if fit_config.x_range is not None else replace(
            fit_config, x_range=space.range
        )
        return gp_mod.fit(family, X_m, y_m, cfg, incumbent=incumbent)
    params = _placeholder_params(family, space, y_all, fit_config)
    return gp_mod.build(family, params, X_m, y_m)


def train(
    space: DesignSpace,
    classifier: RegionClassifier,
    data: Dataset,
    family: str,
    fit_config: FitConfig = FitConfig(),
) -> PartitionedGp:
    """Split the data by region and fit one local GP per region."""
    groups = classifier.classify_batch(data.X)
    local_gps = []
    for idx in groups:
        local_gps.append(
            _fit_region(family, data.X[idx], data.y[idx], space, data.y, fit_config)
        )
    return PartitionedGp(space, classifier, tuple(local_gps), family, fit_config)


def predict_batch(model: PartitionedGp, Xq):
    """Means, noisy predictive variances, and owning regions for query rows."""
    Xq = np.asarray(Xq, dtype=float)
    groups = model.classifier.classify_batch(Xq)
    means = np.zeros(Xq.shape[0])
    variances = np.zeros(Xq.shape[0])
    regions = np.zeros(Xq.shape[0], dtype=int)
    for m, idx in enumerate(groups, start=1):
        if idx.size == 0:
            continue
        mu, var = gp_mod.predict_batch(model.region_gp(m), Xq[idx])
        means[idx] = mu
        variances[idx] = var
        regions[idx] = m
    return means, variances, regions


def predict(model: PartitionedGp, x):
    """Mean, noisy predictive variance, and owning region at one point."""
    x = as_point(x, dim=model.space.dim)
    means, variances, regions = predict_batch(model, x[None, :])
    return float(means[0]), float(variances[0]), int(regions[0])


def add_observation(model: PartitionedGp, x, y, refit: bool = True) -> PartitionedGp:
    """Route one new observation to its region and return the updated model.

    With ``refit=True`` the receiving region's hyperparameters are refitted
    (other regions are untouched and shared). With ``refit=False`` the
    region's Cholesky factor is grown by the O(n^2) bordered update and only
    the weights are re-solved; predictions then match a full rebuild at the
    frozen hyperparameters to machine precision. A placeholder region refits
    once it has accrued two points.
    """
    x = model.space.project(as_point(x, dim=model.space.dim))
    m = model.classifier.classify(x)
    local = model.region_gp(m)
    if refit:
        X1 = np.vstack([local.X, x[None, :]]) if local.n else x[None, :].copy()
        y1 = np.append(local.y, float(y))
        y_all = np.concatenate([g.y for g in model.local_gps] + [[float(y)]])
        # carry the region's fitted params as a warm start (placeholder
        # params are initialization defaults, not a fit, so skip those)
        incumbent = local.params if local.n >= REFIT_MIN_POINTS else None
        new_local = _fit_region(
            model.family, X1, y1, model.space, y_all, model.fit_config,
            incumbent=incumbent,
        )
    else:
        new_local = gp_mod.extend(local, x, y)
    local_gps = list(model.local_gps)
    local_gps[m - 1] = new_local
    return replace(model, local_gps=tuple(local_gps))


def log_marginal(model: PartitionedGp) -> float:
    """Training objective: sum of per-region log marginal likelihoods."""
    total = 0.0
    for local in model.local_gps:
        if local.n:
            total += gp_mod.model_log_marginal(local)
    return total
