"""TOML ingestion: schema round trips, defaults, and diagnostics that name
the offending key."""
import pytest

from levydiv.config import EXPERIMENTS, ConfigError, load_config, parse_config
from levydiv.fleet import FLEET
from levydiv.models import ExpMixture, Exponential

FULL = """
[model]
gamma = 0.1
sigma = 0.35
[model.jumps]
rate = 1.8
prob_positive = 0.45
[model.jumps.positive]
kind = "exp_mixture"
weights = [0.6, 0.4]
rates = [3.0, 6.0]
[model.jumps.negative]
kind = "exponential"
rate = 2.0

[params]
discount = 0.35
injection_cost = 1.8

[run]
seed = 7
n_paths = 1000
grid_step = 0.02
horizon = 12.0
tol_a = 0.05
mc_budget = 9000

[experiment]
name = "derivatives"

[[strategies]]
kind = "double_barrier"
barrier = 0.6

[[strategies]]
kind = "periodic_review"
barrier = 0.6
review_dt = 0.25
"""


def _load(tmp_path, text):
    p = tmp_path / "cfg.toml"
    p.write_text(text)
    return load_config(p)


def test_full_round_trip(tmp_path):
    cfg = _load(tmp_path, FULL)
    assert cfg.model.gamma == 0.1
    assert cfg.model.sigma == 0.35
    assert cfg.model.jumps.rate == 1.8
    assert cfg.model.jumps.positive == ExpMixture(weights=(0.6, 0.4), rates=(3.0, 6.0))
    assert cfg.model.jumps.negative == Exponential(2.0)
    assert cfg.params.discount == 0.35
    assert cfg.run.seed == 7
    assert cfg.run.horizon == 12.0
    assert cfg.run.n_workers == 1  # default
    assert cfg.experiment == "derivatives"
    assert cfg.model_name == "custom"
    assert len(cfg.strategies) == 2
    assert cfg.strategies[1].review_dt == 0.25


def test_preset_pulls_fleet_model(tmp_path):
    cfg = _load(
        tmp_path,
        """
[model]
preset = "F4"
[params]
discount = 0.3
injection_cost = 1.8
[run]
seed = 3
""",
    )
    assert cfg.model == FLEET["F4"].model
    assert cfg.model_name == "F4"
    assert cfg.experiment == "all"
    assert cfg.run.n_paths == 4000  # default
    assert cfg.run.horizon is None  # discount-driven default


def test_zero_horizon_means_default(tmp_path):
    cfg = _load(
        tmp_path,
        """
[model]
preset = "F2"
[params]
discount = 0.3
injection_cost = 1.8
[run]
seed = 3
horizon = 0.0
""",
    )
    assert cfg.run.horizon is None


@pytest.mark.parametrize(
    "mutation, message",
    [
        ("[params]\ndiscount = 0.3\ninjection_cost = 1.0\n", "injection_cost"),
        ("[params]\ndiscount = 0.3\n", "injection_cost"),
        ("[params]\ndiscount = -1.0\ninjection_cost = 1.8\n", "discount"),
    ],
)
def test_param_errors(tmp_path, mutation, message):
    text = "[model]\npreset = \"F2\"\n%s[run]\nseed = 1\n" % mutation
    with pytest.raises(ConfigError, match=message):
        _load(tmp_path, text)


def test_seed_is_required(tmp_path):
    text = "[model]\npreset = \"F2\"\n[params]\ndiscount = 0.3\ninjection_cost = 1.8\n[run]\nn_paths = 10\n"
    with pytest.raises(ConfigError, match="seed"):
        _load(tmp_path, text)


def test_unknown_sections_and_keys(tmp_path):
    base = "[model]\npreset = \"F2\"\n[params]\ndiscount = 0.3\ninjection_cost = 1.8\n[run]\nseed = 1\n"
    with pytest.raises(ConfigError, match="unknown top-level sections: extras"):
        _load(tmp_path, base + "[extras]\nfoo = 1\n")
    with pytest.raises(ConfigError, match="run: unknown keys walltime"):
        _load(tmp_path, base.replace("seed = 1\n", "seed = 1\nwalltime = 60\n"))


def test_preset_excludes_explicit_keys(tmp_path):
    text = "[model]\npreset = \"F2\"\ngamma = 0.5\n[params]\ndiscount = 0.3\ninjection_cost = 1.8\n[run]\nseed = 1\n"
    with pytest.raises(ConfigError, match="preset"):
        _load(tmp_path, text)


def test_unknown_preset(tmp_path):
    text = "[model]\npreset = \"F9\"\n[params]\ndiscount = 0.3\ninjection_cost = 1.8\n[run]\nseed = 1\n"
    with pytest.raises(ConfigError, match="F9"):
        _load(tmp_path, text)


def test_bad_experiment_name(tmp_path):
    text = (
        "[model]\npreset = \"F2\"\n[params]\ndiscount = 0.3\ninjection_cost = 1.8\n"
        "[run]\nseed = 1\n[experiment]\nname = \"benchmark\"\n"
    )
    with pytest.raises(ConfigError, match="experiment.name"):
        _load(tmp_path, text)


def test_bad_distribution_kind(tmp_path):
    text = """
[model]
gamma = 0.5
sigma = 0.0
[model.jumps]
rate = 1.0
prob_positive = 0.0
[model.jumps.negative]
kind = "lognormal"
mu = 0.0
[params]
discount = 0.3
injection_cost = 1.8
[run]
seed = 1
"""
    with pytest.raises(ConfigError, match="lognormal"):
        _load(tmp_path, text)


def test_prob_positive_out_of_range(tmp_path):
    text = """
[model]
gamma = 0.5
sigma = 0.0
[model.jumps]
rate = 1.0
prob_positive = 1.5
[model.jumps.positive]
kind = "exponential"
rate = 2.0
[params]
discount = 0.3
injection_cost = 1.8
[run]
seed = 1
"""
    with pytest.raises(ConfigError, match="prob_positive"):
        _load(tmp_path, text)


def test_strategy_block_errors(tmp_path):
    base = "[model]\npreset = \"F2\"\n[params]\ndiscount = 0.3\ninjection_cost = 1.8\n[run]\nseed = 1\n"
    with pytest.raises(ConfigError, match=r"strategies\[0\]"):
        _load(tmp_path, base + "[[strategies]]\nkind = \"double_barrier\"\n")
    with pytest.raises(ConfigError, match="unknown keys color"):
        _load(tmp_path, base + "[[strategies]]\nkind = \"double_barrier\"\nbarrier = 0.5\ncolor = \"red\"\n")
    with pytest.raises(ConfigError, match="review_dt"):
        _load(tmp_path, base + "[[strategies]]\nkind = \"periodic_review\"\nbarrier = 0.5\n")


def test_malformed_toml_and_missing_file(tmp_path):
    p = tmp_path / "broken.toml"
    p.write_text("[model\npreset = ")
    with pytest.raises(ConfigError):
        load_config(p)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.toml")


def test_with_overrides(tmp_path):
    cfg = _load(tmp_path, FULL)
    out = cfg.with_overrides(seed=99, n_paths=50, experiment="generator")
    assert out.run.seed == 99
    assert out.run.n_paths == 50
    assert out.experiment == "generator"
    # untouched fields carry over; the original is unchanged
    assert out.run.grid_step == cfg.run.grid_step
    assert cfg.run.seed == 7
    same = cfg.with_overrides()
    assert same == cfg
    with pytest.raises(ConfigError, match="experiment.name"):
        cfg.with_overrides(experiment="nope")


def test_experiment_names_are_closed():
    assert EXPERIMENTS[-1] == "all"
    assert len(set(EXPERIMENTS)) == 7


def test_parse_config_rejects_non_table():
    with pytest.raises(ConfigError, match="top level"):
        parse_config([1, 2, 3])
