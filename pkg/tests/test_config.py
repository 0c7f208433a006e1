import pytest

from acgl.config import (
    ConfigError,
    SCHEMA,
    apply_overrides,
    build_experiment,
    config_echo,
    default_config,
    load_config,
    parse_config_text,
    resolve_seeds,
)


def test_defaults_cover_schema():
    cfg = default_config()
    assert set(cfg) == set(SCHEMA)
    build_experiment(cfg)  # defaults must validate


def test_parse_dotted_keys_and_comments():
    cfg = parse_config_text(
        """
        # comment line
        backbone.epochs = 7   # trailing comment
        gamma = 0.25
        plan.shuffle_classes = true
        dataset.path = data/toy
        """
    )
    assert cfg["backbone.epochs"] == 7
    assert cfg["gamma"] == 0.25
    assert cfg["plan.shuffle_classes"] is True
    assert cfg["dataset.path"] == "data/toy"


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown config key"):
        parse_config_text("backbone.epoch = 7")


def test_type_errors_name_the_key():
    with pytest.raises(ConfigError, match="backbone.epochs"):
        parse_config_text("backbone.epochs = soon")
    with pytest.raises(ConfigError, match="expects a bool"):
        parse_config_text("plan.shuffle_classes = maybe")


def test_malformed_line_carries_position():
    with pytest.raises(ConfigError, match="<config>:2"):
        parse_config_text("gamma = 1.0\nbroken line\n")


def test_gamma_zero_rejected_naming_field():
    cfg = apply_overrides(default_config(), ["gamma=0"])
    with pytest.raises(ConfigError, match="'gamma'"):
        build_experiment(cfg)


def test_expander_must_exceed_hidden():
    cfg = apply_overrides(default_config(), ["backbone.hidden=64", "expander.dim=64"])
    with pytest.raises(ConfigError, match="expander.dim"):
        build_experiment(cfg)


def test_overrides_apply_in_order():
    cfg = apply_overrides(default_config(), ["seed=7", "seed=9"])
    assert cfg["seed"] == 9


def test_seed_derivation_offsets():
    cfg = apply_overrides(default_config(), ["seed=100"])
    assert resolve_seeds(cfg) == (100, 101, 102)


def test_named_seeds_win_over_global():
    cfg = apply_overrides(default_config(), ["seed=100", "seed.backbone=5"])
    assert resolve_seeds(cfg) == (100, 5, 102)


def test_config_echo_contains_derived_seeds():
    echo = config_echo(apply_overrides(default_config(), ["seed=3"]))
    assert echo["seed.data"] == 3
    assert echo["seed.backbone"] == 4
    assert echo["seed.expander"] == 5
    assert "dataset.path" not in echo  # unset keys are omitted


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "absent.cfg")


def test_build_experiment_wires_fields():
    cfg = apply_overrides(default_config(), [
        "plan.base_classes=3", "plan.increment=2", "gamma=0.5",
        "backbone.hidden=32", "expander.dim=64", "seed=11",
    ])
    exp = build_experiment(cfg)
    assert exp.c0 == 3
    assert exp.k == 2
    assert exp.gamma == 0.5
    assert exp.backbone.hidden == 32
    assert exp.backbone.seed == 12
    assert exp.expander.dim == 64
    assert exp.expander.seed == 13
    assert exp.data_seed == 11


def test_zero_base_classes_means_default_half():
    exp = build_experiment(default_config())
    assert exp.c0 is None  # resolved to ceil(C/2) inside the harness
