"""Command-line surface.

Commands:
    run               execute one experiment and write report artifacts
    sweep             rerun the experiment across one axis (feg_dim | gamma)
    gen-synth         write a synthetic dataset directory
    validate-dataset  load a dataset directory and print its statistics

Exit codes: 0 success, 2 config error, 3 runtime failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import config as cfgmod
from .config import ConfigError
from .datasets import dataset_summary, load_dataset, save_dataset
from .harness import run_experiment
from .metrics import RunReport, curve_svg, emit_report
from .synthetic import generate_synthetic, intra_class_fraction

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4

SWEEP_AXES = {
    "feg_dim": ("expander.dim", int),
    "gamma": ("gamma", float),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acgl",
        description="Analytic continual graph learning experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="experiment config file (flat key=value format)")
        p.add_argument("--out", default="acgl-out", help="output directory for artifacts")
        p.add_argument("--seed", type=int, help="global seed override")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="config override, repeatable")

    p_run = sub.add_parser("run", help="run one experiment")
    add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="run one experiment per axis value")
    add_common(p_sweep)
    p_sweep.add_argument("--axis", choices=sorted(SWEEP_AXES), required=True,
                         help="which knob to sweep")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated axis values")

    p_gen = sub.add_parser("gen-synth", help="generate a synthetic dataset directory")
    p_gen.add_argument("--out", required=True, help="dataset directory to write")
    p_gen.add_argument("--classes", type=int, default=4, help="number of classes")
    p_gen.add_argument("--nodes-per-class", type=int, default=50, help="nodes per class")
    p_gen.add_argument("--features", type=int, default=16, help="feature dimension")
    p_gen.add_argument("--homophily", type=float, default=0.9,
                       help="intra-class edge probability")
    p_gen.add_argument("--avg-degree", type=float, default=4.0, help="target mean degree")
    p_gen.add_argument("--class-sep", type=float, default=1.0,
                       help="class mean separation scale")
    p_gen.add_argument("--seed", type=int, default=0, help="generator seed")

    p_val = sub.add_parser("validate-dataset", help="check a dataset directory")
    p_val.add_argument("--path", required=True, help="dataset directory to validate")

    return parser


def _load_effective_config(args) -> dict:
    cfg = cfgmod.load_config(args.config) if args.config else cfgmod.default_config()
    overrides = []
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    overrides.extend(args.overrides)
    return cfgmod.apply_overrides(cfg, overrides)


def _af_text(af) -> str:
    return "n/a" if af is None else f"{af:.4f}"


def _cmd_run(args) -> int:
    cfg = _load_effective_config(args)
    experiment = cfgmod.build_experiment(cfg)
    result = run_experiment(experiment)
    report = RunReport.from_matrix(result.matrix, result.timings, cfgmod.config_echo(cfg))
    emit_report(report, args.out)
    print(
        f"AP={report.ap:.4f} AF={_af_text(report.af)} "
        f"total={result.timings['total_s']:.2f}s out={args.out}"
    )
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _load_effective_config(args)
    key, cast = SWEEP_AXES[args.axis]
    try:
        values = [cast(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values for axis {args.axis} must be {cast.__name__}s") from None
    if not values:
        raise ConfigError("--values must list at least one value")

    out = Path(args.out)
    rows = []
    for value in values:
        point_cfg = cfgmod.apply_overrides(cfg, [f"{key}={value}"])
        experiment = cfgmod.build_experiment(point_cfg)
        result = run_experiment(experiment)
        report = RunReport.from_matrix(result.matrix, result.timings,
                                       cfgmod.config_echo(point_cfg))
        emit_report(report, out / f"point_{value}")
        rows.append((value, report.ap, report.af, result.timings["total_s"]))
        print(f"{args.axis}={value} AP={report.ap:.4f} AF={_af_text(report.af)} "
              f"total={result.timings['total_s']:.2f}s")

    out.mkdir(parents=True, exist_ok=True)
    with (out / "sweep.csv").open("w", encoding="utf-8") as f:
        f.write(f"{args.axis},ap,af,time_s\n")
        for value, ap, af, t in rows:
            af_cell = "" if af is None else repr(af)
            f.write(f"{value},{repr(ap)},{af_cell},{repr(t)}\n")
    series = {"AP": [r[1] for r in rows]}
    if all(r[2] is not None for r in rows):
        series["AF"] = [r[2] for r in rows]
    svg = curve_svg([str(v) for v in values], series, title=f"sweep over {args.axis}")
    (out / "sweep.svg").write_text(svg, encoding="utf-8")
    return EXIT_OK


def _cmd_gen_synth(args) -> int:
    graph = generate_synthetic(
        args.classes, args.nodes_per_class, args.features, args.homophily,
        seed=args.seed, avg_degree=args.avg_degree, class_sep=args.class_sep,
    )
    save_dataset(graph, args.out)
    stats = dataset_summary(graph)
    stats["intra_class_edge_fraction"] = round(intra_class_fraction(graph), 4)
    for key, value in stats.items():
        print(f"{key}: {value}")
    print(f"written: {args.out}")
    return EXIT_OK


def _cmd_validate_dataset(args) -> int:
    graph = load_dataset(args.path)
    for key, value in dataset_summary(graph).items():
        print(f"{key}: {value}")
    print("dataset ok")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "gen-synth": _cmd_gen_synth,
    "validate-dataset": _cmd_validate_dataset,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
