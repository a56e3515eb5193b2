import numpy as np
import pytest

from palgp.config import (
    build_spec,
    load_config,
    make_oracle_factory,
    make_partition,
    make_space,
    normalized_text,
    parse_rule,
)
from palgp.exceptions import ConfigError
from palgp.partition import (
    EstimatePartition,
    ExplicitRuleClassifier,
    VoronoiSeedClassifier,
)

MINIMAL = """
[space]
dim = 1
lower = 0.0
upper = 1.0

[oracle]
kind = sine1d
noise_sd = 0.01

[run]
strategy = palc
n_initial = 5
budget = 10
"""


def write_cfg(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def edited(text, old, new):
    assert old in text
    return text.replace(old, new)


class TestLoad:
    def test_minimal_defaults(self, tmp_path):
        config = load_config(write_cfg(tmp_path, MINIMAL))
        assert config.dim == 1
        assert config.oracle_kind == "sine1d"
        assert config.strategy == "palc"
        assert config.n_ref == 1000 and config.n_cand == 200
        assert config.partition_mode == "none"
        assert config.family == "rbf_ard"
        assert config.metric == "rmse"
        assert config.refit_each_step is True
        assert config.eval_size == 1000
        assert config.output_dir is None

    def test_full_file(self, tmp_path):
        text = MINIMAL + (
            "\n[partition]\nmode = explicit\nrule.1 = x1 < 0.5\nrule.2 = x1 >= 0.5\n"
            "\n[kernel]\nfamily = matern52_ard\n"
            "\n[eval]\nsize = 77\nseed = 5\n"
            "\n[early_stop]\ntarget = 0.01\n"
            "\n[output]\ndir = results\n"
        )
        config = load_config(write_cfg(tmp_path, text))
        assert config.partition_mode == "explicit"
        assert config.rules == ["x1 < 0.5", "x1 >= 0.5"]
        assert config.family == "matern52_ard"
        assert config.eval_size == 77 and config.eval_seed == 5
        assert config.early_stop_target == 0.01
        assert config.output_dir == "results"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.cfg")

    def test_shipped_examples_validate(self):
        for name in ("configs/sim1d.cfg", "configs/sim2d.cfg"):
            config = load_config(name)
            spec = build_spec(config, base_dir=".")
            assert spec.replications == 10


class TestRejection:
    def reject(self, tmp_path, text, fragment):
        with pytest.raises(ConfigError) as err:
            load_config(write_cfg(tmp_path, text))
        assert fragment in str(err.value)

    def test_unknown_section(self, tmp_path):
        self.reject(tmp_path, MINIMAL + "\n[tuning]\nx = 1\n", "unknown sections")

    def test_unknown_key(self, tmp_path):
        self.reject(
            tmp_path, MINIMAL + "\n[eval]\npoints = 3\n", "unknown keys"
        )

    def test_missing_section(self, tmp_path):
        text = MINIMAL[: MINIMAL.index("[run]")]
        self.reject(tmp_path, text, "missing required section [run]")

    def test_missing_required_key(self, tmp_path):
        self.reject(
            tmp_path, edited(MINIMAL, "n_initial = 5\n", ""), "missing required key"
        )

    def test_bad_dim(self, tmp_path):
        self.reject(tmp_path, edited(MINIMAL, "dim = 1", "dim = 0"), "dim")

    def test_bounds_length_mismatch(self, tmp_path):
        self.reject(
            tmp_path,
            edited(MINIMAL, "lower = 0.0", "lower = 0.0, 0.0"),
            "one value per dimension",
        )

    def test_reversed_bounds(self, tmp_path):
        self.reject(
            tmp_path, edited(MINIMAL, "upper = 1.0", "upper = -1.0"), "strictly below"
        )

    def test_negative_noise(self, tmp_path):
        self.reject(
            tmp_path,
            edited(MINIMAL, "noise_sd = 0.01", "noise_sd = -0.01"),
            "non-negative",
        )

    def test_unknown_oracle_kind(self, tmp_path):
        self.reject(tmp_path, edited(MINIMAL, "kind = sine1d", "kind = borehole"), "kind")

    def test_oracle_dim_cross_check(self, tmp_path):
        self.reject(
            tmp_path,
            edited(MINIMAL, "kind = sine1d", "kind = hetero2d"),
            "requires dim=2",
        )

    def test_table_requires_path(self, tmp_path):
        self.reject(
            tmp_path, edited(MINIMAL, "kind = sine1d", "kind = table"), "requires 'path'"
        )

    def test_table_path_must_exist(self, tmp_path):
        text = edited(MINIMAL, "kind = sine1d", "kind = table\npath = absent.csv")
        self.reject(tmp_path, text, "missing file")

    def test_external_requires_directory(self, tmp_path):
        self.reject(
            tmp_path,
            edited(MINIMAL, "kind = sine1d", "kind = external"),
            "requires 'directory'",
        )

    def test_bad_strategy(self, tmp_path):
        self.reject(
            tmp_path, edited(MINIMAL, "strategy = palc", "strategy = ucb"), "strategy"
        )

    def test_budget_below_initial(self, tmp_path):
        self.reject(
            tmp_path,
            edited(MINIMAL, "budget = 10", "budget = 4"),
            "budget must be at least n_initial",
        )

    def test_bad_replications(self, tmp_path):
        self.reject(
            tmp_path,
            edited(MINIMAL, "budget = 10", "budget = 10\nreplications = 0"),
            "replications",
        )

    def test_fraction_out_of_range(self, tmp_path):
        self.reject(
            tmp_path,
            edited(MINIMAL, "budget = 10", "budget = 10\ntop_regions_fraction = 1.5"),
            "top_regions_fraction",
        )

    def test_bad_boolean(self, tmp_path):
        self.reject(
            tmp_path,
            edited(MINIMAL, "budget = 10", "budget = 10\nrefit_each_step = maybe"),
            "refit_each_step",
        )

    def test_bad_metric(self, tmp_path):
        self.reject(
            tmp_path,
            edited(MINIMAL, "budget = 10", "budget = 10\nmetric = mape"),
            "metric",
        )

    def test_bad_family(self, tmp_path):
        self.reject(tmp_path, MINIMAL + "\n[kernel]\nfamily = rbf\n", "family")

    def test_explicit_mode_needs_rules(self, tmp_path):
        self.reject(
            tmp_path, MINIMAL + "\n[partition]\nmode = explicit\n", "rule.1"
        )

    def test_rule_indices_contiguous(self, tmp_path):
        self.reject(
            tmp_path,
            MINIMAL + "\n[partition]\nmode = explicit\nrule.1 = x1 < 0.5\nrule.3 = x1 >= 0.5\n",
            "contiguous",
        )

    def test_rules_only_with_explicit_mode(self, tmp_path):
        self.reject(
            tmp_path,
            MINIMAL + "\n[partition]\nmode = none\nrule.1 = x1 < 0.5\n",
            "only valid with mode=explicit",
        )

    def test_malformed_rule(self, tmp_path):
        self.reject(
            tmp_path,
            MINIMAL + "\n[partition]\nmode = explicit\nrule.1 = x1 <= 0.5\n",
            "malformed rule",
        )

    def test_seeds_mode_needs_file(self, tmp_path):
        self.reject(tmp_path, MINIMAL + "\n[partition]\nmode = seeds\n", "requires 'file'")

    def test_seeds_file_must_exist(self, tmp_path):
        self.reject(
            tmp_path,
            MINIMAL + "\n[partition]\nmode = seeds\nfile = ghost.csv\n",
            "missing file",
        )

    def test_estimate_needs_regions(self, tmp_path):
        self.reject(
            tmp_path, MINIMAL + "\n[partition]\nmode = estimate\n", "regions >= 2"
        )

    def test_bad_eval_size(self, tmp_path):
        self.reject(tmp_path, MINIMAL + "\n[eval]\nsize = 0\n", "size")

    def test_eval_file_must_exist(self, tmp_path):
        self.reject(tmp_path, MINIMAL + "\n[eval]\nfile = holdout.csv\n", "missing file")

    def test_unparseable_int(self, tmp_path):
        self.reject(tmp_path, edited(MINIMAL, "budget = 10", "budget = ten"), "budget")


class TestRules:
    def test_single_clause(self):
        assert parse_rule("x1 < 0.5") == [(0, "lt", 0.5)]
        assert parse_rule("x2 >= -1.5") == [(1, "ge", -1.5)]

    def test_conjunction(self):
        assert parse_rule("x1 < 0.5 and x2 >= 0.25") == [
            (0, "lt", 0.5),
            (1, "ge", 0.25),
        ]

    def test_rejects_other_operators(self):
        for bad in ("x1 > 0.5", "x1 <= 0.5", "x1 == 0.5", "x0 < 0.5", "y1 < 0.5"):
            with pytest.raises(ConfigError):
                parse_rule(bad)


class TestBuilders:
    def test_make_space(self, tmp_path):
        config = load_config(write_cfg(tmp_path, MINIMAL))
        space = make_space(config)
        assert space.dim == 1
        assert np.array_equal(space.lower, [0.0])

    def test_partition_none(self, tmp_path):
        config = load_config(write_cfg(tmp_path, MINIMAL))
        assert make_partition(config, make_space(config)) is None

    def test_partition_explicit(self, tmp_path):
        text = MINIMAL + "\n[partition]\nmode = explicit\nrule.1 = x1 < 0.5\nrule.2 = x1 >= 0.5\n"
        config = load_config(write_cfg(tmp_path, text))
        classifier = make_partition(config, make_space(config))
        assert isinstance(classifier, ExplicitRuleClassifier)
        assert classifier.classify(np.array([0.2])) == 1
        assert classifier.classify(np.array([0.8])) == 2

    def test_partition_seeds(self, tmp_path):
        (tmp_path / "seeds.csv").write_text("x_1,label\n0.2,1\n0.8,2\n")
        text = MINIMAL + "\n[partition]\nmode = seeds\nfile = seeds.csv\n"
        config = load_config(write_cfg(tmp_path, text))
        classifier = make_partition(config, make_space(config), base_dir=tmp_path)
        assert isinstance(classifier, VoronoiSeedClassifier)
        assert classifier.classify(np.array([0.1])) == 1

    def test_partition_estimate_marker(self, tmp_path):
        text = MINIMAL + "\n[partition]\nmode = estimate\nregions = 3\nk_neighbors = 5\n"
        config = load_config(write_cfg(tmp_path, text))
        marker = make_partition(config, make_space(config))
        assert isinstance(marker, EstimatePartition)
        assert marker.num_regions == 3 and marker.k_neighbors == 5

    def test_synthetic_factory_gives_fresh_oracles(self, tmp_path):
        config = load_config(write_cfg(tmp_path, MINIMAL))
        factory = make_oracle_factory(config, make_space(config))
        assert factory(1) is not factory(1)
        assert factory(1).query([0.3]) == factory(1).query([0.3])

    def test_table_factory_shares_instance(self, tmp_path):
        (tmp_path / "table.csv").write_text("x_1,y\n0.5,2.0\n")
        text = edited(MINIMAL, "kind = sine1d", "kind = table\npath = table.csv")
        config = load_config(write_cfg(tmp_path, text))
        factory = make_oracle_factory(config, make_space(config), base_dir=tmp_path)
        assert factory(1) is factory(2)

    def test_build_spec_reads_eval_file(self, tmp_path):
        (tmp_path / "holdout.csv").write_text("x_1,y\n0.25,0.5\n0.75,-0.5\n")
        text = MINIMAL + "\n[eval]\nfile = holdout.csv\n"
        config = load_config(write_cfg(tmp_path, text))
        spec = build_spec(config, base_dir=tmp_path)
        points, truths = spec.eval_data
        assert np.array_equal(points, [[0.25], [0.75]])
        assert np.array_equal(truths, [0.5, -0.5])


class TestNormalizedText:
    def test_round_trip_is_fixed_point(self, tmp_path):
        text = MINIMAL + (
            "\n[partition]\nmode = estimate\nregions = 2\n"
            "\n[eval]\nsize = 50\n"
            "\n[output]\ndir = out\n"
        )
        config = load_config(write_cfg(tmp_path, text))
        dump = normalized_text(config)
        config2 = load_config(write_cfg(tmp_path, dump, name="normalized.cfg"))
        assert normalized_text(config2) == dump
        assert config2 == config
