"""Benchmark harness: replicated studies, learning curves, reports.

A study runs one strategy for R replications (seeds ``seed+0..seed+R-1``),
tracks a held-out metric on a fixed evaluation design (fresh maximin LHD,
seeded independently of training), and aggregates final metrics and criterion
timings. Active strategies run the sequential loop; the passive baselines
``lhd`` and ``random`` draw their whole budget up front and fit a single GP
once, so their curve is a single record with zero criterion time.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import designs, pgp as pgp_mod
from .active import (
    Criterion,
    EvalSpec,
    LearningCurve,
    LearningRecord,
    LoopConfig,
    run_loop,
)
from .exceptions import UnsupportedOracleError
from .gp import FitConfig
from .io import write_aggregate_csv, write_curve_csv, write_report_csv
from .metrics import metric_value
from .partition import Dataset, DesignSpace, TrivialClassifier
from .seeding import TAG_EVAL, TAG_INIT, TAG_NOISE, mix_seed

PASSIVE_STRATEGIES = ("lhd", "random")
ALL_STRATEGIES = ("alm", "alc", "palm", "palc-nog", "palc") + PASSIVE_STRATEGIES


def evaluate(model, points, truths, metric="rmse", exclude_zero_truth=False) -> float:
    """Metric of the model's posterior-mean predictions on held-out data."""
    means = pgp_mod.predict_batch(model, points)[0]
    return metric_value(truths, means, metric, exclude_zero_truth=exclude_zero_truth)


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce one study.

    ``oracle_factory`` maps a noise seed to a fresh oracle so each
    replication gets an independent (but reproducible) noise stream;
    stateful oracles (table lookups, external ask/tell) may ignore the seed.
    """

    space: DesignSpace
    oracle_factory: object
    strategy: str
    n_initial: int
    budget: int
    replications: int
    seed: int
    partition: object | None = None
    family: str = "rbf_ard"
    n_ref: int = 1000
    n_cand: int = 200
    metric: str = "rmse"
    eval_size: int = 1000
    eval_seed: int | None = None
    eval_data: tuple | None = None
    early_stop_target: float | None = None
    top_regions_fraction: float | None = None
    importance: object | None = None
    refit_each_step: bool = True
    exclude_zero_truth: bool = False
    fit_config: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        if self.strategy not in ALL_STRATEGIES:
            raise ValueError(
                f"unknown strategy {self.strategy!r}; choose from {ALL_STRATEGIES}"
            )
        if self.replications < 1:
            raise ValueError("replications must be at least 1")


@dataclass(frozen=True)
class ExperimentReport:
    """Aggregated study results for one strategy."""

    strategy: str
    seeds: tuple
    final_metrics: tuple
    mean: float
    sd: float
    mean_criterion_seconds: float
    curves: tuple
    dim: int = 1


def make_eval_spec(spec: ExperimentSpec) -> EvalSpec | None:
    """The study's fixed evaluation data: explicit if provided, otherwise a
    fresh seeded LHD labeled by the oracle's noise-free truth. Oracles
    without a truth (recorded data) leave the metric untracked (NaN)."""
    if spec.eval_data is not None:
        points, truths = spec.eval_data
        return EvalSpec(points, truths, spec.metric, spec.exclude_zero_truth)
    eval_seed = spec.eval_seed
    if eval_seed is None:
        eval_seed = mix_seed(spec.seed, TAG_EVAL)
    points = designs.lhd_maximin(spec.space, spec.eval_size, eval_seed).points
    oracle = spec.oracle_factory(0)
    try:
        truths = np.array([oracle.truth(x) for x in points])
    except UnsupportedOracleError:
        return None
    return EvalSpec(points, truths, spec.metric, spec.exclude_zero_truth)


def _passive_curve(spec, seed_r, eval_spec):
    gen = designs.lhd_maximin if spec.strategy == "lhd" else designs.uniform_random
    batch = gen(spec.space, spec.budget, mix_seed(seed_r, TAG_INIT))
    oracle = spec.oracle_factory(mix_seed(seed_r, TAG_NOISE))
    y = np.array([oracle.query(x) for x in batch.points])
    data = Dataset(spec.space, batch.points, y)
    model = pgp_mod.train(
        spec.space, TrivialClassifier(spec.space), data, spec.family, spec.fit_config
    )
    if eval_spec is None:
        metric = float("nan")
    else:
        metric = evaluate(
            model, eval_spec.points, eval_spec.truths, spec.metric,
            spec.exclude_zero_truth,
        )
    return LearningCurve((LearningRecord(0, model.n, metric, 0.0, None, None),))


def run_replication(spec: ExperimentSpec, replication: int, eval_spec=None) -> LearningCurve:
    """One seeded replication of the study."""
    if eval_spec is None:
        eval_spec = make_eval_spec(spec)
    seed_r = spec.seed + replication
    if spec.strategy in PASSIVE_STRATEGIES:
        return _passive_curve(spec, seed_r, eval_spec)
    oracle = spec.oracle_factory(mix_seed(seed_r, TAG_NOISE))
    config = LoopConfig(
        n_initial=spec.n_initial,
        budget=spec.budget,
        n_ref=spec.n_ref,
        n_cand=spec.n_cand,
        refit_each_step=spec.refit_each_step,
        seed=seed_r,
        eval_spec=eval_spec,
        early_stop_target=spec.early_stop_target,
    )
    criterion = Criterion(
        spec.strategy,
        top_regions_fraction=spec.top_regions_fraction,
        importance=spec.importance,
    )
    return run_loop(
        oracle, spec.space, spec.partition, criterion, spec.family, config,
        fit_config=spec.fit_config,
    )


def _aggregate(spec, curves) -> ExperimentReport:
    finals = tuple(curve.final_metric for curve in curves)
    values = np.asarray(finals, dtype=float)
    mean = float(values.mean())
    sd = float(values.std(ddof=1)) if values.size > 1 else 0.0
    mean_time = float(
        np.mean([curve.total_criterion_seconds for curve in curves])
    )
    seeds = tuple(spec.seed + r for r in range(len(curves)))
    return ExperimentReport(
        spec.strategy, seeds, finals, mean, sd, mean_time, tuple(curves),
        spec.space.dim,
    )


def run_experiment(spec: ExperimentSpec, out_dir=None, jobs: int = 1) -> ExperimentReport:
    """Run all replications and aggregate.

    With ``jobs > 1`` replications run in parallel worker processes (results
    are collected in replication order, so aggregation is unaffected). In
    sequential mode a failing replication still persists the completed
    curves to ``out_dir`` (when given) before the error propagates.
    """
    eval_spec = make_eval_spec(spec)
    curves = []
    if jobs > 1:
        from joblib import Parallel, delayed

        curves = list(
            Parallel(n_jobs=jobs)(
                delayed(run_replication)(spec, r, eval_spec)
                for r in range(spec.replications)
            )
        )
    else:
        for r in range(spec.replications):
            try:
                curves.append(run_replication(spec, r, eval_spec))
            except Exception:
                if out_dir is not None and curves:
                    partial = _aggregate(spec, curves)
                    export_reports([partial], out_dir)
                raise
    report = _aggregate(spec, curves)
    if out_dir is not None:
        export_reports([report], out_dir)
    return report


def export_reports(reports, out_dir):
    """Write report.csv, aggregate.csv, and per-replication curve CSVs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_report_csv(out / "report.csv", reports)
    write_aggregate_csv(out / "aggregate.csv", reports)
    curve_dir = out / "curves"
    curve_dir.mkdir(exist_ok=True)
    for report in reports:
        for rep, curve in enumerate(report.curves):
            write_curve_csv(
                curve_dir / f"curve_{report.strategy}_rep{rep}.csv", curve, report.dim
            )


def export_curves(report: ExperimentReport, out_dir):
    """Persist one report (curves plus summary files) under ``out_dir``."""
    export_reports([report], out_dir)
