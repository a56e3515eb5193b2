"""Command-line front end.

Three subcommands:

``run``       execute a configured experiment and write curves + report CSVs
``validate``  parse and cross-check a config, print its normalized form
``suggest``   stateless ask/tell step: given a state directory holding
              ``config.cfg`` and ``data.csv``, print the next design point

Exit codes: 0 success, 2 configuration error, 3 runtime error, 4 budget
exhausted. Every failure prints a single line ``palgp-error: <category>:
<message>`` on stderr.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import active, designs
from . import pgp as pgp_mod
from .bench import ALL_STRATEGIES, run_experiment
from .config import build_spec, load_config, make_partition, make_space, normalized_text
from .exceptions import ConfigError, PalgpError
from .gp import FitConfig
from .io import fmt, read_dataset_csv
from .partition import Dataset
from .seeding import TAG_CAND, TAG_FIT, TAG_INIT, TAG_REF, mix_seed

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_BUDGET = 4


class BudgetExhausted(Exception):
    pass


def _error(category, message):
    text = " ".join(str(message).split())  # keep the diagnostic on one line
    print(f"palgp-error: {category}: {text}", file=sys.stderr)


def _apply_overrides(config, args):
    if getattr(args, "seed_override", None) is not None:
        config.seed = args.seed_override
    strategy = getattr(args, "strategy_override", None)
    if strategy is not None:
        if strategy not in ALL_STRATEGIES:
            raise ConfigError(
                f"--strategy-override must be one of {ALL_STRATEGIES}, got {strategy!r}"
            )
        config.strategy = strategy
    return config


def cmd_run(args) -> int:
    config_path = Path(args.config)
    config = _apply_overrides(load_config(config_path), args)
    out_dir = args.out or config.output_dir
    if out_dir is None:
        raise ConfigError("an output directory is required ([output] dir or --out)")
    spec = build_spec(config, base_dir=config_path.parent)
    report = run_experiment(spec, out_dir=out_dir, jobs=args.jobs)
    print(
        f"{report.strategy}: mean_{config.metric}={report.mean:.6g} "
        f"sd={report.sd:.6g} replications={len(report.final_metrics)}"
    )
    print(f"wrote {Path(out_dir) / 'report.csv'}")
    return EXIT_OK


def cmd_validate(args) -> int:
    config = load_config(args.config)
    print(normalized_text(config), end="")
    return EXIT_OK


def _initial_design(config, space):
    return designs.lhd_maximin(
        space, config.n_initial, mix_seed(config.seed, TAG_INIT)
    ).points


def _suggest_point(config, space, X, y, state_dir):
    """The deterministic next point for a dataset of ``len(y)`` observations."""
    n_data = len(y)
    if n_data < config.n_initial:
        return _initial_design(config, space)[n_data], None, "initial", 0

    iteration = n_data - config.n_initial + 1
    strategy = config.strategy
    criterion = active.Criterion(
        strategy, top_regions_fraction=config.top_regions_fraction
    )
    # Partition choice mirrors the library loop: estimated partitions are
    # learned from the initial design only, then held fixed.
    initial = Dataset(space, X[: config.n_initial], y[: config.n_initial])
    classifier = active._resolve_classifier(
        space, make_partition(config, space, base_dir=state_dir), strategy, initial
    )
    fit_cfg = FitConfig(seed=mix_seed(config.seed, TAG_FIT), x_range=space.range)
    model = pgp_mod.train(space, classifier, Dataset(space, X, y), config.family, fit_cfg)
    ref_batch = designs.lhd_maximin(
        space, config.n_ref, mix_seed(config.seed, iteration, TAG_REF)
    )
    ref = active.ReferenceSet.uniform(ref_batch.points)
    point, region, _ = active.propose_next(
        model, criterion, ref, config.n_cand,
        mix_seed(config.seed, iteration, TAG_CAND),
    )
    return np.asarray(point, dtype=float), region, "active", iteration


def cmd_suggest(args) -> int:
    state_dir = Path(args.state)
    config_path = state_dir / "config.cfg"
    data_path = state_dir / "data.csv"
    if not config_path.exists():
        raise ConfigError(f"state directory is missing config.cfg: {state_dir}")
    if not data_path.exists():
        raise ConfigError(f"state directory is missing data.csv: {state_dir}")
    config = _apply_overrides(load_config(config_path), args)
    space = make_space(config)
    X, y = read_dataset_csv(data_path, dim=config.dim)
    n_data = len(y)
    if n_data >= config.budget:
        raise BudgetExhausted(f"budget reached ({n_data} of {config.budget} samples)")

    point, region, phase, iteration = _suggest_point(config, space, X, y, state_dir)
    record = {
        "sample_index": n_data + 1,
        "phase": phase,
        "iteration": iteration,
        "strategy": config.strategy if phase == "active" else "initial_lhd",
        "point": [float(v) for v in point],
        "region": region,
    }
    meta_path = state_dir / f"suggestion_{n_data + 1}.json"
    meta_path.write_text(json.dumps(record, sort_keys=True, indent=2) + "\n")
    print(",".join(fmt(v) for v in point))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="palgp",
        description="Partitioned GP surrogates with active-learning strategies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a configured experiment")
    run.add_argument("--config", required=True, help="experiment config file")
    run.add_argument("--out", default=None, help="output directory (overrides config)")
    run.add_argument("--jobs", type=int, default=1, help="parallel replications")
    run.add_argument("--seed-override", type=int, default=None)
    run.add_argument("--strategy-override", default=None)
    run.set_defaults(handler=cmd_run)

    validate = sub.add_parser("validate", help="check a config without running")
    validate.add_argument("--config", required=True)
    validate.set_defaults(handler=cmd_validate)

    suggest = sub.add_parser(
        "suggest", help="print the next design point for an ask/tell state directory"
    )
    suggest.add_argument(
        "--state", required=True, help="directory holding config.cfg and data.csv"
    )
    suggest.add_argument("--seed-override", type=int, default=None)
    suggest.add_argument("--strategy-override", default=None)
    suggest.set_defaults(handler=cmd_suggest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        _error("config", exc)
        return EXIT_CONFIG
    except BudgetExhausted as exc:
        _error("budget", exc)
        return EXIT_BUDGET
    except (PalgpError, ValueError, OSError) as exc:
        _error("runtime", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
