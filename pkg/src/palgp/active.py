"""Sequential-design criteria and the active-learning loop.

Two criterion families are implemented over single or partitioned GPs:

* maximum predictive variance (``alm`` on a single GP, ``palm`` per region);
* integrated posterior variance, "IMSE" (``alc`` on a single GP, and the
  partitioned decomposition behind ``palc-nog`` and ``palc``).

For a partition into M regions, the IMSE of a model augmented by a candidate
``x`` in region m splits into a constant part (the integrated variance of
every other region) plus a local part (the augmented integrated variance of
region m alone). ``palc`` exploits the split: first pick the region with the
largest integrated variance ("global search"), then minimize the local term
over candidates inside that region only ("local search"). ``palc-nog`` skips
the pre-filter and minimizes the full decomposition over all candidates.

Augmented variances are scored without refitting or refactorizing: the
region's Cholesky factor is grown by the bordered update (one forward
substitution per candidate) and the reference solves are shared across
candidates, so each candidate costs O(n^2 + n N_ref) instead of O(n^3). The
integrand is the latent posterior variance (no observation noise: noise is
irreducible, so it would only shift every score by a constant); under uniform
reference weights the constant prior term drops and the selection maximizes
the summed squared forward-substitution updates.
"""

import time
from dataclasses import dataclass, replace

import numpy as np

from . import designs, gp as gp_mod, kernels, linalg, pgp as pgp_mod
from .exceptions import (
    EmptyCandidatesError,
    EmptyReferenceError,
    NotPositiveDefiniteError,
)
from .gp import FitConfig, LocalGp
from .metrics import metric_value
from .partition import (
    Dataset,
    DesignSpace,
    EstimatePartition,
    RegionClassifier,
    TrivialClassifier,
    estimate_partition,
)
from .pgp import PartitionedGp
from .seeding import (
    TAG_CAND,
    TAG_FIT,
    TAG_INIT,
    TAG_REF,
    mix_seed,
)
from .validation import as_point, as_points, as_vector

STRATEGIES = ("alm", "alc", "palm", "palc-nog", "palc")
SINGLE_GP_STRATEGIES = ("alm", "alc")

# candidates closer than this (normalized distance) to an existing design
# point of their region are unscoreable: the bordered system is singular
COLLISION_TOL = 1e-9


def check_strategy(strategy: str) -> str:
    if strategy not in STRATEGIES:
        raise ValueError(
            f"unknown strategy {strategy!r}; choose from {STRATEGIES}"
        )
    return strategy


@dataclass(frozen=True)
class Criterion:
    """Selection rule: strategy name plus optional refinements.

    ``top_regions_fraction`` (palc only) keeps candidates from the smallest
    set of top-scoring regions whose integrated-variance mass fraction reaches
    the value; ``None`` is the default single-argmax region. ``importance``
    is an optional nonnegative weight function evaluated at reference points
    and renormalized.
    """

    strategy: str
    top_regions_fraction: float | None = None
    importance: object | None = None

    def __post_init__(self):
        check_strategy(self.strategy)
        q = self.top_regions_fraction
        if q is not None and not 0.0 < q <= 1.0:
            raise ValueError("top_regions_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class ReferenceSet:
    """Weighted reference points approximating the domain integral."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = as_points(self.points, name="reference points")
        weights = as_vector(self.weights, n=points.shape[0], name="weights")
        if points.shape[0] == 0:
            raise EmptyReferenceError("reference set is empty")
        if np.any(weights < 0.0):
            raise ValueError("reference weights must be non-negative")
        if abs(float(weights.sum()) - 1.0) > 1e-12:
            raise ValueError("reference weights must sum to 1 within 1e-12")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @classmethod
    def uniform(cls, points):
        points = as_points(points, name="reference points")
        if points.shape[0] == 0:
            raise EmptyReferenceError("reference set is empty")
        return cls(points, np.full(points.shape[0], 1.0 / points.shape[0]))

    @classmethod
    def from_importance(cls, points, importance):
        """Evaluate a nonnegative weight function at the points, renormalize."""
        points = as_points(points, name="reference points")
        raw = np.asarray([float(importance(p)) for p in points], dtype=float)
        if np.any(raw < 0.0) or not np.all(np.isfinite(raw)):
            raise ValueError("importance values must be finite and non-negative")
        total = raw.sum()
        if total <= 0.0:
            raise ValueError("importance values are all zero")
        return cls(points, raw / total)


def _as_single_gp(model) -> LocalGp:
    if isinstance(model, LocalGp):
        return model
    if isinstance(model, PartitionedGp):
        if model.num_regions != 1:
            raise ValueError(
                "this criterion is defined on a single GP; the model has "
                f"{model.num_regions} regions"
            )
        return model.region_gp(1)
    raise TypeError(f"unsupported model type {type(model).__name__}")


def _variances(model, points) -> np.ndarray:
    if isinstance(model, LocalGp):
        return gp_mod.predict_batch(model, points)[1]
    if isinstance(model, PartitionedGp):
        return pgp_mod.predict_batch(model, points)[1]
    raise TypeError(f"unsupported model type {type(model).__name__}")


def score_alm(model, x) -> float:
    """Predictive-variance criterion: exactly the model's variance at x."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    return float(_variances(model, x)[0])


def score_imse_batch(gp: LocalGp, candidates, ref_points, ref_weights):
    """Augmented integrated latent variance for each candidate.

    Returns ``(scores, valid)``: ``scores[c] = sum_s w_s Var_{n+1}(s | c)``
    where the augmented model appends candidate c at frozen hyperparameters;
    candidates whose bordered system is numerically singular get
    ``scores = +inf`` and ``valid = False``. Reference solves are shared
    across candidates, so the cost is one triangular solve per candidate plus
    two matrix products.
    """
    C = as_points(candidates, dim=gp.dim, name="candidates")
    S = as_points(ref_points, dim=gp.dim, name="reference points")
    w = as_vector(ref_weights, n=S.shape[0], name="weights")
    n_cand = C.shape[0]
    if n_cand == 0:
        return np.zeros(0), np.zeros(0, dtype=bool)
    prior = gp.params.prior_variance
    kappa = gp.params.noisy_variance

    K_XS = kernels.cross_matrix(gp.family, gp.params, gp.X, S)
    V = linalg.solve_lower(gp.factor, K_XS) if gp.n else K_XS
    base = np.einsum("ij,ij->j", V, V)

    K_XC = kernels.cross_matrix(gp.family, gp.params, gp.X, C)
    R = linalg.solve_lower(gp.factor, K_XC) if gp.n else K_XC
    d_sq = kappa - np.einsum("ij,ij->j", R, R)
    valid = d_sq > linalg.APPEND_PIVOT_FLOOR * kappa

    K_CS = kernels.cross_matrix(gp.family, gp.params, C, S)
    W = K_CS - R.T @ V
    scores = np.full(n_cand, np.inf)
    if np.any(valid):
        v_new_sq = W[valid] ** 2 / d_sq[valid, None]
        reduction = v_new_sq @ w
        scores[valid] = prior * float(w.sum()) - float(base @ w) - reduction
    return scores, valid


def score_imse_single(gp: LocalGp, x, ref: ReferenceSet) -> float:
    """Integrated latent variance of the model augmented by one candidate.

    Equals the dense computation ``sum_s w_s (prior - k_s^T K_{n+1}^{-1} k_s)``
    but runs through the bordered-factor update. Raises
    NotPositiveDefiniteError when appending x makes the Gram matrix singular
    (callers treat that candidate as score +inf).
    """
    x = as_point(x, dim=gp.dim)
    scores, valid = score_imse_batch(gp, x[None, :], ref.points, ref.weights)
    if not valid[0]:
        raise NotPositiveDefiniteError(
            "candidate duplicates an existing design point; bordered system "
            "is singular"
        )
    return float(scores[0])


def _collision_mask(space, X_existing, candidates):
    """True where a candidate sits within COLLISION_TOL (normalized) of an
    existing design point."""
    if X_existing.shape[0] == 0 or candidates.shape[0] == 0:
        return np.zeros(candidates.shape[0], dtype=bool)
    U = space.normalize(candidates)
    E = space.normalize(X_existing)
    d2 = ((U[:, None, :] - E[None, :, :]) ** 2).sum(axis=2)
    return np.sqrt(d2.min(axis=1)) <= COLLISION_TOL


def region_scores(model: PartitionedGp, ref: ReferenceSet) -> np.ndarray:
    """Integrated latent variance per region (the global-search scores).

    Entry m-1 is ``sum_{s in region m} w_s Var_m(s)`` under the current
    per-region models; regions holding no reference mass score 0.
    """
    groups = model.classifier.classify_batch(ref.points)
    scores = np.zeros(model.num_regions)
    for m, idx in enumerate(groups, start=1):
        if idx.size == 0:
            continue
        latent = gp_mod.latent_variances(model.region_gp(m), ref.points[idx])
        scores[m - 1] = float(ref.weights[idx] @ latent)
    return scores


def global_search(model: PartitionedGp, ref: ReferenceSet) -> int:
    """Region with the largest integrated variance (ties to the lowest index)."""
    return int(np.argmax(region_scores(model, ref))) + 1


def top_region_set(scores, fraction) -> list:
    """Smallest set of top-scoring regions whose mass fraction reaches
    ``fraction``; ``None`` degenerates to the single argmax."""
    scores = np.asarray(scores, dtype=float)
    if fraction is None:
        return [int(np.argmax(scores)) + 1]
    order = np.argsort(-scores, kind="stable")
    total = float(scores.sum())
    if total <= 0.0:
        return [int(order[0]) + 1]
    chosen, mass = [], 0.0
    for idx in order:
        chosen.append(int(idx) + 1)
        mass += float(scores[idx])
        if mass >= fraction * total - 1e-15:
            break
    return chosen


def _region_reference(model, ref, region, renormalize):
    idx = np.flatnonzero(model.classifier.labels(ref.points) == region)
    if idx.size == 0:
        return None, None
    weights = ref.weights[idx]
    if renormalize:
        weights = weights / weights.sum()
    return ref.points[idx], weights


def local_search(model: PartitionedGp, region: int, candidates, ref: ReferenceSet):
    """Minimize the region's augmented integrated variance over candidates.

    The reference set is restricted to the region (weights renormalized to
    sum 1 there); candidates colliding with the region's design points are
    skipped. Ties resolve to the lowest candidate index.
    """
    C = as_points(candidates, dim=model.space.dim, name="candidates")
    if C.shape[0] == 0:
        raise EmptyCandidatesError("no candidates inside the selected region")
    pts, wts = _region_reference(model, ref, region, renormalize=True)
    if pts is None:
        raise EmptyReferenceError(f"no reference mass in region {region}")
    local = model.region_gp(region)
    scores, _ = score_imse_batch(local, C, pts, wts)
    scores[_collision_mask(model.space, local.X, C)] = np.inf
    best = int(np.argmin(scores))
    if not np.isfinite(scores[best]):
        raise EmptyCandidatesError("every candidate is unscoreable")
    return C[best]


def decomposition_scores(model: PartitionedGp, candidates, ref: ReferenceSet):
    """Full partitioned-IMSE objective for each candidate.

    For a candidate in region m the score is the sum of every other region's
    integrated variance (a constant per region) plus region m's augmented
    integrated variance with the raw global reference weights, i.e. the
    whole-domain IMSE of the one-point-augmented partitioned model.
    """
    C = as_points(candidates, dim=model.space.dim, name="candidates")
    per_region = region_scores(model, ref)
    total = float(per_region.sum())
    labels = model.classifier.labels(C)
    scores = np.full(C.shape[0], np.inf)
    evaluations = 0
    for m in range(1, model.num_regions + 1):
        idx = np.flatnonzero(labels == m)
        if idx.size == 0:
            continue
        rest = total - float(per_region[m - 1])
        pts, wts = _region_reference(model, ref, m, renormalize=False)
        local = model.region_gp(m)
        if pts is None:
            # no reference mass in the region: augmenting there leaves the
            # measured IMSE at the other-region constant
            scores[idx] = rest
        else:
            local_scores, _ = score_imse_batch(local, C[idx], pts, wts)
            evaluations += idx.size
            scores[idx] = rest + local_scores
        collide = _collision_mask(model.space, local.X, C[idx])
        scores[idx[collide]] = np.inf
    return scores, labels, evaluations


def select_next_info(model, criterion: Criterion, candidates, ref: ReferenceSet):
    """Like :func:`select_next` but returns selection diagnostics too."""
    check_strategy(criterion.strategy)
    strategy = criterion.strategy
    C = np.asarray(candidates, dtype=float)
    if C.ndim == 1:
        C = C.reshape(-1, 1)
    if C.shape[0] == 0:
        raise EmptyCandidatesError("candidate set is empty")
    info = {"strategy": strategy, "bordered_evaluations": 0}

    if strategy in ("alm", "palm"):
        if strategy == "alm":
            _as_single_gp(model)  # enforce the single-GP contract
        variances = _variances(model, C)
        best = int(np.argmax(variances))
        info.update(index=best, score=float(variances[best]))
        if isinstance(model, PartitionedGp):
            info["region"] = int(model.classifier.classify(C[best]))
        else:
            info["region"] = 1
        info["point"] = C[best]
        return info

    if strategy == "alc":
        single = _as_single_gp(model)
        scores, _ = score_imse_batch(single, C, ref.points, ref.weights)
        if isinstance(model, PartitionedGp):
            scores[_collision_mask(model.space, single.X, C)] = np.inf
        info["bordered_evaluations"] = C.shape[0]
        best = int(np.argmin(scores))
        if not np.isfinite(scores[best]):
            raise EmptyCandidatesError("every candidate is unscoreable")
        info.update(index=best, score=float(scores[best]), region=1, point=C[best])
        return info

    if not isinstance(model, PartitionedGp):
        raise TypeError(f"{strategy} needs a partitioned model")

    if strategy == "palc-nog":
        scores, labels, evals = decomposition_scores(model, C, ref)
        info["bordered_evaluations"] = evals
        best = int(np.argmin(scores))
        if not np.isfinite(scores[best]):
            raise EmptyCandidatesError("every candidate is unscoreable")
        info.update(
            index=best,
            score=float(scores[best]),
            region=int(labels[best]),
            point=C[best],
        )
        return info

    # palc: global search, then a local search restricted to the top region(s)
    per_region = region_scores(model, ref)
    info["region_scores"] = per_region
    regions = top_region_set(per_region, criterion.top_regions_fraction)
    info["selected_regions"] = regions
    labels = model.classifier.labels(C)
    keep = np.isin(labels, regions)
    if not np.any(keep):
        raise EmptyCandidatesError(
            f"no candidate lies in the selected region(s) {regions}"
        )
    kept_idx = np.flatnonzero(keep)
    if len(regions) == 1:
        m = regions[0]
        pts, wts = _region_reference(model, ref, m, renormalize=True)
        if pts is None:
            raise EmptyReferenceError(f"no reference mass in region {m}")
        local = model.region_gp(m)
        scores, _ = score_imse_batch(local, C[kept_idx], pts, wts)
        scores[_collision_mask(model.space, local.X, C[kept_idx])] = np.inf
        info["bordered_evaluations"] = kept_idx.size
        sub_best = int(np.argmin(scores))
        if not np.isfinite(scores[sub_best]):
            raise EmptyCandidatesError("every candidate is unscoreable")
        best = int(kept_idx[sub_best])
        info.update(
            index=best, score=float(scores[sub_best]), region=m, point=C[best]
        )
        return info
    scores, all_labels, evals = decomposition_scores(model, C[kept_idx], ref)
    info["bordered_evaluations"] = evals
    sub_best = int(np.argmin(scores))
    if not np.isfinite(scores[sub_best]):
        raise EmptyCandidatesError("every candidate is unscoreable")
    best = int(kept_idx[sub_best])
    info.update(
        index=best,
        score=float(scores[sub_best]),
        region=int(all_labels[sub_best]),
        point=C[best],
    )
    return info


def select_next(model, criterion: Criterion, candidates, ref: ReferenceSet):
    """Select the next design point under the given strategy."""
    return select_next_info(model, criterion, candidates, ref)["point"]


@dataclass(frozen=True)
class EvalSpec:
    """Held-out evaluation data and the metric tracked along the run."""

    points: np.ndarray
    truths: np.ndarray
    metric: str = "rmse"
    exclude_zero_truth: bool = False

    def __post_init__(self):
        points = as_points(self.points, name="eval points")
        truths = as_vector(self.truths, n=points.shape[0], name="eval truths")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "truths", truths)


@dataclass(frozen=True)
class LoopConfig:
    """Budgets and cadence for a sequential run.

    ``budget`` is the total number of samples (initial design included);
    ``early_stop_target`` stops the loop once the tracked metric drops to the
    target or below (checked before each iteration, so a trivially large
    target stops after the initial evaluation).
    """

    n_initial: int
    budget: int
    n_ref: int = 1000
    n_cand: int = 200
    refit_each_step: bool = True
    seed: int = 0
    eval_spec: EvalSpec | None = None
    early_stop_target: float | None = None

    def __post_init__(self):
        if self.n_initial < 1:
            raise ValueError("n_initial must be at least 1")
        if self.budget < self.n_initial:
            raise ValueError("budget must be at least n_initial")
        if self.n_ref < 1 or self.n_cand < 1:
            raise ValueError("n_ref and n_cand must be at least 1")
        if self.early_stop_target is not None and self.eval_spec is None:
            raise ValueError("early_stop_target requires eval_spec")


@dataclass(frozen=True)
class LearningRecord:
    """One row of a learning curve."""

    iteration: int
    n_samples: int
    metric: float
    criterion_seconds: float
    x: np.ndarray | None
    region: int | None


@dataclass(frozen=True)
class LearningCurve:
    """Per-iteration records of one sequential run."""

    records: tuple

    @property
    def final_metric(self) -> float:
        return self.records[-1].metric

    @property
    def total_criterion_seconds(self) -> float:
        return float(sum(r.criterion_seconds for r in self.records))


def propose_next(
    model: PartitionedGp,
    criterion: Criterion,
    ref: ReferenceSet,
    n_cand: int,
    cand_seed: int,
    timer=time.perf_counter,
):
    """One selection step: generate candidates and pick the next point.

    ``palc`` runs its global search first and generates the candidate design
    inside the selected region (by LHD-plus-rejection); every other strategy
    scores a fresh LHD over the whole box. Returns ``(point, region,
    criterion_seconds)`` where the timing covers criterion evaluation only,
    not design generation.
    """
    strategy = criterion.strategy
    space = model.space
    if strategy != "palc":
        cand = designs.lhd_maximin(space, n_cand, cand_seed).points
        t0 = timer()
        picked = select_next_info(model, criterion, cand, ref)
        elapsed = timer() - t0
        return picked["point"], picked["region"], elapsed

    t0 = timer()
    per_region = region_scores(model, ref)
    regions = top_region_set(per_region, criterion.top_regions_fraction)
    elapsed = timer() - t0
    if len(regions) == 1:
        m = regions[0]
        cand = designs.region_lhd(space, model.classifier, m, n_cand, cand_seed).points
        pts, wts = _region_reference(model, ref, m, renormalize=True)
        if pts is None:
            raise EmptyReferenceError(f"no reference mass in region {m}")
        local = model.region_gp(m)
        t0 = timer()
        scores, _ = score_imse_batch(local, cand, pts, wts)
        scores[_collision_mask(space, local.X, cand)] = np.inf
        best = int(np.argmin(scores))
        elapsed += timer() - t0
        if not np.isfinite(scores[best]):
            raise EmptyCandidatesError("every candidate is unscoreable")
        return cand[best], m, elapsed
    box = designs.lhd_maximin(space, n_cand, cand_seed).points
    keep = np.isin(model.classifier.labels(box), regions)
    if np.any(keep):
        cand = box[keep]
    else:
        cand = designs.region_lhd(
            space, model.classifier, regions[0], n_cand, cand_seed
        ).points
    t0 = timer()
    scores, labels, _ = decomposition_scores(model, cand, ref)
    best = int(np.argmin(scores))
    elapsed += timer() - t0
    if not np.isfinite(scores[best]):
        raise EmptyCandidatesError("every candidate is unscoreable")
    return cand[best], int(labels[best]), elapsed


def _resolve_classifier(space, classifier, strategy, data):
    if strategy in SINGLE_GP_STRATEGIES:
        return TrivialClassifier(space)
    if classifier is None:
        return TrivialClassifier(space)
    if isinstance(classifier, EstimatePartition):
        return estimate_partition(
            data, classifier.num_regions, classifier.k_neighbors
        )
    return classifier


def _evaluate(model, eval_spec):
    if eval_spec is None:
        return np.nan
    means = pgp_mod.predict_batch(model, eval_spec.points)[0]
    return metric_value(
        eval_spec.truths,
        means,
        eval_spec.metric,
        exclude_zero_truth=eval_spec.exclude_zero_truth,
    )


def run_loop(
    oracle,
    space: DesignSpace,
    classifier,
    criterion: Criterion,
    family: str,
    config: LoopConfig,
    fit_config: FitConfig = FitConfig(),
    timer=time.perf_counter,
) -> LearningCurve:
    """Run one sequential-design session and return its learning curve.

    The initial design is a maximin LHD of ``n_initial`` points; when
    ``classifier`` is an EstimatePartition marker the partition is estimated
    from that initial data and frozen. ``alm``/``alc`` always run on a
    single-region model. Every iteration draws fresh seeded reference and
    candidate designs (``palc`` generates its candidates inside the selected
    region by rejection), selects a point, queries the oracle, and routes the
    observation to its region (refitting it when ``refit_each_step``).

    ``criterion_seconds`` measures criterion evaluation only (region scores,
    candidate scoring, argmin); oracle queries, fits, metric evaluation, and
    design generation are excluded.
    """
    check_strategy(criterion.strategy)
    strategy = criterion.strategy
    seed = config.seed
    fit_cfg = replace(
        fit_config,
        seed=mix_seed(seed, TAG_FIT),
        x_range=fit_config.x_range if fit_config.x_range is not None else space.range,
    )

    init = designs.lhd_maximin(space, config.n_initial, mix_seed(seed, TAG_INIT))
    y0 = np.array([oracle.query(x) for x in init.points])
    data = Dataset(space, init.points, y0)
    resolved = _resolve_classifier(space, classifier, strategy, data)
    model = pgp_mod.train(space, resolved, data, family, fit_cfg)

    records = [
        LearningRecord(0, model.n, _evaluate(model, config.eval_spec), 0.0, None, None)
    ]
    iteration = 0
    while model.n < config.budget:
        if (
            config.early_stop_target is not None
            and records[-1].metric <= config.early_stop_target
        ):
            break
        iteration += 1
        ref_batch = designs.lhd_maximin(
            space, config.n_ref, mix_seed(seed, iteration, TAG_REF)
        )
        if criterion.importance is not None:
            ref = ReferenceSet.from_importance(ref_batch.points, criterion.importance)
        else:
            ref = ReferenceSet.uniform(ref_batch.points)
        x_next, region, elapsed = propose_next(
            model, criterion, ref, config.n_cand,
            mix_seed(seed, iteration, TAG_CAND), timer=timer,
        )
        y_next = oracle.query(x_next)
        model = pgp_mod.add_observation(
            model, x_next, y_next, refit=config.refit_each_step
        )
        records.append(
            LearningRecord(
                iteration,
                model.n,
                _evaluate(model, config.eval_spec),
                elapsed,
                np.asarray(x_next, dtype=float),
                region,
            )
        )
    return LearningCurve(tuple(records))
