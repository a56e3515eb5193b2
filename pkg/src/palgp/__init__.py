"""Partitioned Gaussian-process surrogates with active-learning strategies.

The functional core (immutable models, explicit seeds) lives in the
submodules; :mod:`palgp.estimators` wraps it in scikit-learn style classes.
"""

from . import (
    active,
    bench,
    designs,
    gp,
    io,
    kernels,
    linalg,
    metrics,
    oracles,
    partition,
    pgp,
)
from .active import Criterion, LearningCurve, LoopConfig, ReferenceSet, run_loop
from .bench import ExperimentReport, ExperimentSpec, run_experiment
from .estimators import (
    FiniteDifferencePartitioner,
    GpRegressor,
    PartitionedGpRegressor,
)
from .exceptions import (
    ConfigError,
    DegenerateDataError,
    DegenerateDataWarning,
    DimensionMismatchError,
    EmptyCandidatesError,
    EmptyReferenceError,
    MetricError,
    NoSuchRecordError,
    NotPositiveDefiniteError,
    OracleError,
    OracleTimeoutError,
    OutOfDomainError,
    PalgpError,
    RegionTooSmallError,
    UnsupportedOracleError,
)
from .gp import FitConfig, LocalGp
from .kernels import KernelParams
from .partition import (
    Dataset,
    DesignSpace,
    EstimatePartition,
    ExplicitRuleClassifier,
    KnnLabelClassifier,
    RegionClassifier,
    TrivialClassifier,
    VoronoiSeedClassifier,
    estimate_partition,
)
from .pgp import PartitionedGp

__version__ = "0.1.0"

__all__ = [
    "active",
    "bench",
    "designs",
    "gp",
    "io",
    "kernels",
    "linalg",
    "metrics",
    "oracles",
    "partition",
    "pgp",
    "Criterion",
    "LearningCurve",
    "LoopConfig",
    "ReferenceSet",
    "run_loop",
    "ExperimentReport",
    "ExperimentSpec",
    "run_experiment",
    "FiniteDifferencePartitioner",
    "GpRegressor",
    "PartitionedGpRegressor",
    "ConfigError",
    "DegenerateDataError",
    "DegenerateDataWarning",
    "DimensionMismatchError",
    "EmptyCandidatesError",
    "EmptyReferenceError",
    "MetricError",
    "NoSuchRecordError",
    "NotPositiveDefiniteError",
    "OracleError",
    "OracleTimeoutError",
    "OutOfDomainError",
    "PalgpError",
    "RegionTooSmallError",
    "UnsupportedOracleError",
    "FitConfig",
    "LocalGp",
    "KernelParams",
    "Dataset",
    "DesignSpace",
    "EstimatePartition",
    "ExplicitRuleClassifier",
    "KnnLabelClassifier",
    "RegionClassifier",
    "TrivialClassifier",
    "VoronoiSeedClassifier",
    "estimate_partition",
    "PartitionedGp",
    "__version__",
]
