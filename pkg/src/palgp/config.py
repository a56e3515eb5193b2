"""Strict key/value configuration files for the command-line interface.

The format is flat INI text with one section per concern. Unknown sections or
keys, missing required keys, and out-of-range values all raise ConfigError,
so a configuration that validates runs unambiguously.

Sections and keys (* = required):

[space]      dim*, lower*, upper*           (comma-separated floats)
[oracle]     kind*, noise_sd, path, directory, poll_interval, timeout
[partition]  mode (none|explicit|seeds|estimate), regions, k_neighbors,
             rule.<m> (explicit mode, e.g. "x1 < 0.5 and x2 >= 0.25"), file
[kernel]     family (rbf_ard|matern52_ard|matern32_ard)
[run]        strategy*, n_initial*, budget*, n_ref, n_cand, replications,
             seed, metric, top_regions_fraction, refit_each_step,
             exclude_zero_truth
[eval]       size, seed, file
[early_stop] target
[output]     dir
"""

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path

from .bench import ALL_STRATEGIES, ExperimentSpec
from .exceptions import ConfigError
from .io import read_dataset_csv, read_labeled_csv
from .kernels import FAMILIES
from .metrics import METRICS
from .oracles import KINDS, make_oracle
from .partition import (
    DesignSpace,
    EstimatePartition,
    ExplicitRuleClassifier,
    VoronoiSeedClassifier,
)

PARTITION_MODES = ("none", "explicit", "seeds", "estimate")

_SCHEMA = {
    "space": {"dim", "lower", "upper"},
    "oracle": {"kind", "noise_sd", "path", "directory", "poll_interval", "timeout"},
    "partition": {"mode", "regions", "k_neighbors", "file"},  # plus rule.<m>
    "kernel": {"family"},
    "run": {
        "strategy",
        "n_initial",
        "budget",
        "n_ref",
        "n_cand",
        "replications",
        "seed",
        "metric",
        "top_regions_fraction",
        "refit_each_step",
        "exclude_zero_truth",
    },
    "eval": {"size", "seed", "file"},
    "early_stop": {"target"},
    "output": {"dir"},
}

_RULE_KEY = re.compile(r"^rule\.(\d+)$")
_CONDITION = re.compile(r"^\s*x(\d+)\s*(<|>=)\s*([-+0-9.eE]+)\s*$")


@dataclass
class ExperimentConfig:
    """Typed, validated view of one configuration file."""

    dim: int
    lower: list
    upper: list
    oracle_kind: str
    strategy: str
    n_initial: int
    budget: int
    noise_sd: float = 0.0
    oracle_path: str | None = None
    oracle_directory: str | None = None
    poll_interval: float = 1.0
    timeout: float = 86400.0
    partition_mode: str = "none"
    regions: int | None = None
    k_neighbors: int = 3
    rules: list = field(default_factory=list)
    seeds_file: str | None = None
    family: str = "rbf_ard"
    n_ref: int = 1000
    n_cand: int = 200
    replications: int = 1
    seed: int = 0
    metric: str = "rmse"
    top_regions_fraction: float | None = None
    refit_each_step: bool = True
    exclude_zero_truth: bool = False
    eval_size: int = 1000
    eval_seed: int | None = None
    eval_file: str | None = None
    early_stop_target: float | None = None
    output_dir: str | None = None


def _fail(message):
    raise ConfigError(message)


class _Section:
    def __init__(self, name, mapping):
        self.name = name
        self.mapping = dict(mapping)

    def take(self, key, parse, default=None, required=False):
        if key not in self.mapping:
            if required:
                _fail(f"[{self.name}] is missing required key '{key}'")
            return default
        raw = self.mapping.pop(key).strip()
        try:
            return parse(raw)
        except ConfigError:
            raise
        except Exception as exc:
            _fail(f"[{self.name}] {key} = {raw!r}: {exc}")

    def finish(self):
        if self.mapping:
            _fail(
                f"[{self.name}] has unknown keys: {sorted(self.mapping)}"
            )


def _parse_int(raw):
    return int(raw)


def _parse_float(raw):
    return float(raw)


def _parse_floats(raw):
    return [float(part) for part in raw.split(",") if part.strip()]


def _parse_bool(raw):
    lowered = raw.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError("expected a boolean (true/false)")


def _parse_choice(options):
    def parse(raw):
        if raw not in options:
            raise ValueError(f"must be one of {options}")
        return raw

    return parse


def parse_rule(text):
    """Parse 'x1 < 0.5 and x2 >= 0.25' into [(dim0, op, threshold), ...]."""
    conditions = []
    for clause in re.split(r"\s+and\s+", text.strip()):
        match = _CONDITION.match(clause)
        if not match:
            raise ConfigError(
                f"malformed rule clause {clause!r}; use 'x<j> < c' or 'x<j> >= c'"
            )
        j = int(match.group(1))
        if j < 1:
            raise ConfigError(f"rule clause {clause!r}: dimensions are 1-based")
        op = "lt" if match.group(2) == "<" else "ge"
        conditions.append((j - 1, op, float(match.group(3))))
    return conditions


def load_config(path) -> ExperimentConfig:
    """Read and validate a configuration file."""
    path = Path(path)
    if not path.exists():
        _fail(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except configparser.Error as exc:
        _fail(f"{path}: {exc}")

    sections = {name: dict(parser[name]) for name in parser.sections()}
    unknown = set(sections) - set(_SCHEMA)
    if unknown:
        _fail(f"unknown sections: {sorted(unknown)}")
    for required_section in ("space", "oracle", "run"):
        if required_section not in sections:
            _fail(f"missing required section [{required_section}]")

    space = _Section("space", sections.get("space", {}))
    dim = space.take("dim", _parse_int, required=True)
    lower = space.take("lower", _parse_floats, required=True)
    upper = space.take("upper", _parse_floats, required=True)
    space.finish()
    if dim < 1:
        _fail("[space] dim must be at least 1")
    if len(lower) != dim or len(upper) != dim:
        _fail("[space] lower/upper must list one value per dimension")
    if any(lo >= hi for lo, hi in zip(lower, upper)):
        _fail("[space] lower bounds must be strictly below upper bounds")

    oracle = _Section("oracle", sections.get("oracle", {}))
    kind = oracle.take("kind", _parse_choice(KINDS), required=True)
    noise_sd = oracle.take("noise_sd", _parse_float, default=0.0)
    oracle_path = oracle.take("path", str)
    oracle_directory = oracle.take("directory", str)
    poll_interval = oracle.take("poll_interval", _parse_float, default=1.0)
    timeout = oracle.take("timeout", _parse_float, default=86400.0)
    oracle.finish()
    if noise_sd < 0.0:
        _fail("[oracle] noise_sd must be non-negative")
    if kind == "table" and not oracle_path:
        _fail("[oracle] kind=table requires 'path'")
    if kind == "external" and not oracle_directory:
        _fail("[oracle] kind=external requires 'directory'")
    if kind == "sine1d" and dim != 1:
        _fail("[oracle] kind=sine1d requires dim=1")
    if kind == "hetero2d" and dim != 2:
        _fail("[oracle] kind=hetero2d requires dim=2")

    part_raw = dict(sections.get("partition", {}))
    rules = []
    for key in sorted(part_raw):
        match = _RULE_KEY.match(key)
        if match:
            rules.append((int(match.group(1)), part_raw.pop(key)))
    part = _Section("partition", part_raw)
    mode = part.take("mode", _parse_choice(PARTITION_MODES), default="none")
    regions = part.take("regions", _parse_int)
    k_neighbors = part.take("k_neighbors", _parse_int, default=3)
    seeds_file = part.take("file", str)
    part.finish()
    parsed_rules = []
    if mode == "explicit":
        if not rules:
            _fail("[partition] mode=explicit requires rule.1..rule.M keys")
        expected = list(range(1, len(rules) + 1))
        if [idx for idx, _ in sorted(rules)] != expected:
            _fail("[partition] rule indices must be contiguous from 1")
        parsed_rules = [text for _, text in sorted(rules)]
        for text in parsed_rules:
            parse_rule(text)  # validate early
    elif rules:
        _fail("[partition] rule.<m> keys are only valid with mode=explicit")
    if mode == "seeds" and not seeds_file:
        _fail("[partition] mode=seeds requires 'file'")
    if mode == "estimate":
        if regions is None or regions < 2:
            _fail("[partition] mode=estimate requires regions >= 2")
        if k_neighbors < 1:
            _fail("[partition] k_neighbors must be at least 1")

    kernel = _Section("kernel", sections.get("kernel", {}))
    family = kernel.take("family", _parse_choice(FAMILIES), default="rbf_ard")
    kernel.finish()

    run = _Section("run", sections.get("run", {}))
    strategy = run.take("strategy", _parse_choice(ALL_STRATEGIES), required=True)
    n_initial = run.take("n_initial", _parse_int, required=True)
    budget = run.take("budget", _parse_int, required=True)
    n_ref = run.take("n_ref", _parse_int, default=1000)
    n_cand = run.take("n_cand", _parse_int, default=200)
    replications = run.take("replications", _parse_int, default=1)
    seed = run.take("seed", _parse_int, default=0)
    metric = run.take("metric", _parse_choice(METRICS), default="rmse")
    top_q = run.take("top_regions_fraction", _parse_float)
    refit = run.take("refit_each_step", _parse_bool, default=True)
    exclude_zero = run.take("exclude_zero_truth", _parse_bool, default=False)
    run.finish()
    if n_initial < 1:
        _fail("[run] n_initial must be at least 1")
    if budget < n_initial:
        _fail("[run] budget must be at least n_initial")
    if n_ref < 1 or n_cand < 1:
        _fail("[run] n_ref and n_cand must be at least 1")
    if replications < 1:
        _fail("[run] replications must be at least 1")
    if top_q is not None and not 0.0 < top_q <= 1.0:
        _fail("[run] top_regions_fraction must lie in (0, 1]")

    ev = _Section("eval", sections.get("eval", {}))
    eval_size = ev.take("size", _parse_int, default=1000)
    eval_seed = ev.take("seed", _parse_int)
    eval_file = ev.take("file", str)
    ev.finish()
    if eval_size < 1:
        _fail("[eval] size must be at least 1")

    early = _Section("early_stop", sections.get("early_stop", {}))
    target = early.take("target", _parse_float)
    early.finish()

    output = _Section("output", sections.get("output", {}))
    output_dir = output.take("dir", str)
    output.finish()

    base_dir = path.parent
    for label, referenced in (
        ("[oracle] path", oracle_path if kind == "table" else None),
        ("[partition] file", seeds_file if mode == "seeds" else None),
        ("[eval] file", eval_file),
    ):
        if referenced is not None and not _resolve(referenced, base_dir).exists():
            _fail(f"{label} refers to a missing file: {referenced}")

    return ExperimentConfig(
        dim=dim,
        lower=lower,
        upper=upper,
        oracle_kind=kind,
        noise_sd=noise_sd,
        oracle_path=oracle_path,
        oracle_directory=oracle_directory,
        poll_interval=poll_interval,
        timeout=timeout,
        partition_mode=mode,
        regions=regions,
        k_neighbors=k_neighbors,
        rules=parsed_rules,
        seeds_file=seeds_file,
        family=family,
        strategy=strategy,
        n_initial=n_initial,
        budget=budget,
        n_ref=n_ref,
        n_cand=n_cand,
        replications=replications,
        seed=seed,
        metric=metric,
        top_regions_fraction=top_q,
        refit_each_step=refit,
        exclude_zero_truth=exclude_zero,
        eval_size=eval_size,
        eval_seed=eval_seed,
        eval_file=eval_file,
        early_stop_target=target,
        output_dir=output_dir,
    )


def make_space(config: ExperimentConfig) -> DesignSpace:
    return DesignSpace(config.lower, config.upper)


def make_partition(config: ExperimentConfig, space: DesignSpace, base_dir=None):
    """Build the partition object (or estimation marker) a config asks for."""
    if config.partition_mode == "none":
        return None
    if config.partition_mode == "explicit":
        return ExplicitRuleClassifier(
            space, [parse_rule(text) for text in config.rules]
        )
    if config.partition_mode == "seeds":
        path = _resolve(config.seeds_file, base_dir)
        X, labels = read_labeled_csv(path, dim=space.dim)
        return VoronoiSeedClassifier(space, X, labels)
    return EstimatePartition(config.regions, config.k_neighbors)


def _resolve(path, base_dir):
    path = Path(path)
    if not path.is_absolute() and base_dir is not None:
        return Path(base_dir) / path
    return path


def make_oracle_factory(config: ExperimentConfig, space: DesignSpace, base_dir=None):
    """Oracle constructor keyed by noise seed (stateful kinds are shared)."""
    kind = config.oracle_kind
    if kind in ("sine1d", "hetero2d"):
        noise_sd = config.noise_sd

        def factory(seed):
            return make_oracle(kind, noise_sd=noise_sd, seed=seed)

        return factory
    if kind == "table":
        oracle = make_oracle(
            kind, space=space, path=_resolve(config.oracle_path, base_dir)
        )
    else:
        oracle = make_oracle(
            kind,
            space=space,
            directory=_resolve(config.oracle_directory, base_dir),
            poll_interval=config.poll_interval,
            timeout=config.timeout,
        )
    return lambda seed: oracle


def build_spec(config: ExperimentConfig, base_dir=None) -> ExperimentSpec:
    """Assemble the benchmark spec a validated config describes."""
    space = make_space(config)
    eval_data = None
    if config.eval_file is not None:
        eval_data = read_dataset_csv(_resolve(config.eval_file, base_dir), dim=space.dim)
    return ExperimentSpec(
        space=space,
        oracle_factory=make_oracle_factory(config, space, base_dir),
        partition=make_partition(config, space, base_dir),
        family=config.family,
        strategy=config.strategy,
        n_initial=config.n_initial,
        budget=config.budget,
        n_ref=config.n_ref,
        n_cand=config.n_cand,
        replications=config.replications,
        seed=config.seed,
        metric=config.metric,
        eval_size=config.eval_size,
        eval_seed=config.eval_seed,
        eval_data=eval_data,
        early_stop_target=config.early_stop_target,
        top_regions_fraction=config.top_regions_fraction,
        refit_each_step=config.refit_each_step,
        exclude_zero_truth=config.exclude_zero_truth,
    )


def normalized_text(config: ExperimentConfig) -> str:
    """Canonical dump of a validated config (defaults made explicit)."""
    lines = ["[space]"]
    lines.append(f"dim = {config.dim}")
    lines.append("lower = " + ", ".join(repr(v) for v in config.lower))
    lines.append("upper = " + ", ".join(repr(v) for v in config.upper))
    lines.append("")
    lines.append("[oracle]")
    lines.append(f"kind = {config.oracle_kind}")
    lines.append(f"noise_sd = {config.noise_sd!r}")
    if config.oracle_path:
        lines.append(f"path = {config.oracle_path}")
    if config.oracle_directory:
        lines.append(f"directory = {config.oracle_directory}")
        lines.append(f"poll_interval = {config.poll_interval!r}")
        lines.append(f"timeout = {config.timeout!r}")
    lines.append("")
    lines.append("[partition]")
    lines.append(f"mode = {config.partition_mode}")
    if config.partition_mode == "explicit":
        for m, text in enumerate(config.rules, start=1):
            lines.append(f"rule.{m} = {text}")
    if config.partition_mode == "seeds":
        lines.append(f"file = {config.seeds_file}")
    if config.partition_mode == "estimate":
        lines.append(f"regions = {config.regions}")
        lines.append(f"k_neighbors = {config.k_neighbors}")
    lines.append("")
    lines.append("[kernel]")
    lines.append(f"family = {config.family}")
    lines.append("")
    lines.append("[run]")
    lines.append(f"strategy = {config.strategy}")
    lines.append(f"n_initial = {config.n_initial}")
    lines.append(f"budget = {config.budget}")
    lines.append(f"n_ref = {config.n_ref}")
    lines.append(f"n_cand = {config.n_cand}")
    lines.append(f"replications = {config.replications}")
    lines.append(f"seed = {config.seed}")
    lines.append(f"metric = {config.metric}")
    if config.top_regions_fraction is not None:
        lines.append(f"top_regions_fraction = {config.top_regions_fraction!r}")
    lines.append(f"refit_each_step = {str(config.refit_each_step).lower()}")
    lines.append(f"exclude_zero_truth = {str(config.exclude_zero_truth).lower()}")
    lines.append("")
    lines.append("[eval]")
    lines.append(f"size = {config.eval_size}")
    if config.eval_seed is not None:
        lines.append(f"seed = {config.eval_seed}")
    if config.eval_file:
        lines.append(f"file = {config.eval_file}")
    if config.early_stop_target is not None:
        lines.append("")
        lines.append("[early_stop]")
        lines.append(f"target = {config.early_stop_target!r}")
    if config.output_dir:
        lines.append("")
        lines.append("[output]")
        lines.append(f"dir = {config.output_dir}")
    return "\n".join(lines) + "\n"
