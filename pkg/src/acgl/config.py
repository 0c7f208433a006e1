"""Flat key-value experiment configuration.

Config files are plain text, one ``key = value`` per line, ``#`` comments,
dotted section keys (``backbone.epochs = 50``). Every key is declared in
the schema below with a type and default; unknown keys are rejected, as
are values of the wrong type. ``--set key=value`` overrides reuse the same
parser.

Randomness flows from exactly three named seeds: ``seed.data`` (graph
generation and class-order shuffling), ``seed.backbone`` (weight init and
dropout), and ``seed.expander`` (the frozen expansion weight). Any of them
left unset is derived from the global ``seed`` by a fixed offset (+0, +1,
+2), so a single global seed pins the whole run.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .backbone import BackboneConfig
from .harness import ExperimentConfig, ExpanderConfig, SyntheticSpec


class ConfigError(ValueError):
    """Unknown key, malformed line, bad type, or invalid value."""


@dataclass(frozen=True)
class Field:
    kind: str            # "int" | "float" | "bool" | "str"
    default: object
    help: str


# Sentinel default for optional keys.
UNSET = None

SCHEMA: dict[str, Field] = {
    "dataset.path": Field("str", UNSET, "dataset directory; unset means synthetic data"),
    "synthetic.classes": Field("int", 4, "synthetic: number of classes"),
    "synthetic.nodes_per_class": Field("int", 50, "synthetic: nodes per class"),
    "synthetic.features": Field("int", 16, "synthetic: feature dimension"),
    "synthetic.homophily": Field("float", 0.9, "synthetic: intra-class edge probability"),
    "synthetic.avg_degree": Field("float", 4.0, "synthetic: target mean degree"),
    "synthetic.class_sep": Field("float", 1.0, "synthetic: class mean separation scale"),
    "plan.base_classes": Field("int", 0, "base class count c0; 0 means half of C rounded up"),
    "plan.increment": Field("int", 1, "classes added per incremental session"),
    "plan.shuffle_classes": Field("bool", False, "shuffle class order with the data seed"),
    "backbone.hidden": Field("int", 256, "GCN hidden width"),
    "backbone.epochs": Field("int", 50, "base-session training epochs"),
    "backbone.lr": Field("float", 0.001, "Adam learning rate"),
    "backbone.dropout": Field("float", 0.5, "dropout rate on the hidden layer"),
    "backbone.weight_decay": Field("float", 5e-4, "L2 decay folded into gradients"),
    "expander.dim": Field("int", 2048, "feature expansion output dimension"),
    "expander.use_adjacency": Field("bool", False, "multiply by adjacency inside the expander"),
    "gamma": Field("float", 1.0, "ridge regularization strength"),
    "seed": Field("int", 42, "global seed; derives the named seeds when unset"),
    "seed.data": Field("int", UNSET, "data seed (synthetic graph, class shuffle)"),
    "seed.backbone": Field("int", UNSET, "backbone init and dropout seed"),
    "seed.expander": Field("int", UNSET, "frozen expansion weight seed"),
    "eval.union_graph": Field("bool", False, "evaluate on the union graph of seen classes"),
    "features.row_normalize": Field("bool", False, "L1-normalize feature rows after load"),
}


def parse_value(key: str, raw: str):
    field = SCHEMA.get(key)
    if field is None:
        raise ConfigError(f"unknown config key {key!r}")
    raw = raw.strip()
    try:
        if field.kind == "int":
            return int(raw)
        if field.kind == "float":
            return float(raw)
        if field.kind == "bool":
            lowered = raw.lower()
            if lowered in ("true", "1", "yes", "on"):
                return True
            if lowered in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError:
        raise ConfigError(f"key {key!r} expects a {field.kind}, got {raw!r}") from None


def default_config() -> dict:
    return {key: field.default for key, field in SCHEMA.items()}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    cfg = default_config()
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{line_no}: expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        try:
            cfg[key] = parse_value(key, raw)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{line_no}: {exc}") from None
    return cfg


def load_config(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text(encoding="utf-8"), source=str(p))


def apply_overrides(cfg: dict, pairs: list[str]) -> dict:
    out = dict(cfg)
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"override must look like key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        out[key.strip()] = parse_value(key.strip(), raw)
    return out


def _validate(cfg: dict) -> None:
    checks = [
        ("gamma", cfg["gamma"] > 0, "must be positive"),
        ("backbone.dropout", 0.0 <= cfg["backbone.dropout"] < 1.0, "must lie in [0, 1)"),
        ("backbone.lr", cfg["backbone.lr"] > 0, "must be positive"),
        ("backbone.hidden", cfg["backbone.hidden"] >= 1, "must be >= 1"),
        ("backbone.epochs", cfg["backbone.epochs"] >= 0, "must be >= 0"),
        ("plan.increment", cfg["plan.increment"] >= 1, "must be >= 1"),
        ("plan.base_classes", cfg["plan.base_classes"] >= 0, "must be >= 0"),
        ("expander.dim", cfg["expander.dim"] > cfg["backbone.hidden"],
         "must exceed backbone.hidden"),
        ("synthetic.homophily", 0.0 <= cfg["synthetic.homophily"] <= 1.0,
         "must lie in [0, 1]"),
        ("synthetic.classes", cfg["synthetic.classes"] >= 2, "must be >= 2"),
        ("synthetic.nodes_per_class", cfg["synthetic.nodes_per_class"] >= 2, "must be >= 2"),
    ]
    for key, ok, msg in checks:
        if not ok:
            raise ConfigError(f"config key {key!r} {msg} (got {cfg[key]!r})")


def resolve_seeds(cfg: dict) -> tuple[int, int, int]:
    """(data, backbone, expander) seeds, derived from the global seed when unset."""
    base = cfg["seed"]
    data = cfg["seed.data"] if cfg["seed.data"] is not None else base
    backbone = cfg["seed.backbone"] if cfg["seed.backbone"] is not None else base + 1
    expander = cfg["seed.expander"] if cfg["seed.expander"] is not None else base + 2
    return data, backbone, expander


def build_experiment(cfg: dict) -> ExperimentConfig:
    """Turn a validated flat config into the harness config."""
    _validate(cfg)
    data_seed, backbone_seed, expander_seed = resolve_seeds(cfg)
    synthetic = None
    if cfg["dataset.path"] is None:
        synthetic = SyntheticSpec(
            classes=cfg["synthetic.classes"],
            nodes_per_class=cfg["synthetic.nodes_per_class"],
            features=cfg["synthetic.features"],
            homophily=cfg["synthetic.homophily"],
            avg_degree=cfg["synthetic.avg_degree"],
            class_sep=cfg["synthetic.class_sep"],
        )
    return ExperimentConfig(
        dataset_path=cfg["dataset.path"],
        synthetic=synthetic,
        c0=cfg["plan.base_classes"] or None,
        k=cfg["plan.increment"],
        shuffle_classes=cfg["plan.shuffle_classes"],
        gamma=cfg["gamma"],
        backbone=BackboneConfig(
            hidden=cfg["backbone.hidden"],
            epochs=cfg["backbone.epochs"],
            lr=cfg["backbone.lr"],
            dropout=cfg["backbone.dropout"],
            weight_decay=cfg["backbone.weight_decay"],
            seed=backbone_seed,
        ),
        expander=ExpanderConfig(
            dim=cfg["expander.dim"],
            seed=expander_seed,
            use_adjacency=cfg["expander.use_adjacency"],
        ),
        data_seed=data_seed,
        eval_union=cfg["eval.union_graph"],
        row_normalize=cfg["features.row_normalize"],
    )


def config_echo(cfg: dict) -> dict:
    """JSON-friendly view of the effective config, including derived seeds."""
    data_seed, backbone_seed, expander_seed = resolve_seeds(cfg)
    echo = {k: v for k, v in cfg.items() if v is not None}
    echo["seed.data"] = data_seed
    echo["seed.backbone"] = backbone_seed
    echo["seed.expander"] = expander_seed
    return echo
