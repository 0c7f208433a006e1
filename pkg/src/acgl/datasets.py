"""On-disk dataset format: load, save, validate.

A dataset directory contains five files:

    edges.csv      one edge per line, two comma-separated integer node ids
    features.csv   N lines, d comma-separated reals per line
    labels.csv     N lines, one integer class id per line
    split.csv      N lines, each one of: train, val, test, none
    meta.json      {"num_nodes": N, "num_features": d, "num_classes": C, ...}

Integers round-trip bit-exactly; reals are written with shortest
round-trip formatting (repr), which reconstructs the exact double.
Directed or duplicated edges are symmetrized and deduplicated on load;
self-loops are dropped (they are reintroduced during normalization).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .graph import Graph, canonical_edges

FORMAT_NAME = "csv-dir"
FORMAT_VERSION = 1

_SPLIT_NAMES = ("train", "val", "test", "none")


class DatasetFormatError(ValueError):
    """A dataset file could not be parsed; message carries file and line."""


def _parse_error(path: Path, line_no: int, detail: str) -> DatasetFormatError:
    return DatasetFormatError(f"{path}:{line_no}: {detail}")


def _read_lines(path: Path) -> list[str]:
    if not path.is_file():
        raise DatasetFormatError(f"{path}: missing dataset file")
    with path.open("r", encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f]


def load_dataset(path, fmt: str = FORMAT_NAME, row_normalize: bool = False) -> Graph:
    """Load a dataset directory into a validated :class:`Graph`.

    ``fmt`` names the on-disk layout; only ``"csv-dir"`` is supported.
    """
    if fmt != FORMAT_NAME:
        raise DatasetFormatError(f"unknown dataset format {fmt!r}; supported: {FORMAT_NAME!r}")
    root = Path(path)
    meta_path = root / "meta.json"
    if not meta_path.is_file():
        raise DatasetFormatError(f"{meta_path}: missing dataset file")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{meta_path}: invalid JSON ({exc})") from exc
    for key in ("num_nodes", "num_features", "num_classes"):
        if key not in meta:
            raise DatasetFormatError(f"{meta_path}: missing key {key!r}")
        if not isinstance(meta[key], int) or meta[key] <= 0:
            raise DatasetFormatError(f"{meta_path}: {key} must be a positive integer")
    n, d, c = meta["num_nodes"], meta["num_features"], meta["num_classes"]

    edges_path = root / "edges.csv"
    raw_edges = []
    for i, line in enumerate(_read_lines(edges_path), start=1):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise _parse_error(edges_path, i, f"expected 2 integer columns, got {len(parts)}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise _parse_error(edges_path, i, f"non-integer edge entry {line!r}") from None
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"{edges_path}:{i}: edge ({u}, {v}) out of range for {n} nodes")
        raw_edges.append((u, v))
    edges = canonical_edges(np.asarray(raw_edges, dtype=np.int64).reshape(-1, 2), n)

    feat_path = root / "features.csv"
    feat_lines = _read_lines(feat_path)
    if len(feat_lines) != n:
        raise DatasetFormatError(f"{feat_path}: expected {n} rows, found {len(feat_lines)}")
    features = np.empty((n, d), dtype=np.float64)
    for i, line in enumerate(feat_lines, start=1):
        parts = line.split(",")
        if len(parts) != d:
            raise _parse_error(feat_path, i, f"expected {d} columns, got {len(parts)}")
        try:
            features[i - 1] = [float(p) for p in parts]
        except ValueError:
            raise _parse_error(feat_path, i, f"non-numeric feature entry in {line!r}") from None

    label_path = root / "labels.csv"
    label_lines = _read_lines(label_path)
    if len(label_lines) != n:
        raise DatasetFormatError(f"{label_path}: expected {n} rows, found {len(label_lines)}")
    labels = np.empty(n, dtype=np.int64)
    for i, line in enumerate(label_lines, start=1):
        try:
            labels[i - 1] = int(line.strip())
        except ValueError:
            raise _parse_error(label_path, i, f"non-integer label {line!r}") from None
        if not 0 <= labels[i - 1] < c:
            raise ValueError(
                f"{label_path}:{i}: label {labels[i - 1]} out of range [0, {c})"
            )

    split_path = root / "split.csv"
    split_lines = _read_lines(split_path)
    if len(split_lines) != n:
        raise DatasetFormatError(f"{split_path}: expected {n} rows, found {len(split_lines)}")
    masks = {name: np.zeros(n, dtype=bool) for name in ("train", "val", "test")}
    for i, line in enumerate(split_lines, start=1):
        tag = line.strip()
        if tag not in _SPLIT_NAMES:
            raise _parse_error(split_path, i, f"unknown split tag {tag!r}; expected one of {_SPLIT_NAMES}")
        if tag != "none":
            masks[tag][i - 1] = True

    graph = Graph(
        num_nodes=n,
        edges=edges,
        features=features,
        labels=labels,
        train_mask=masks["train"],
        val_mask=masks["val"],
        test_mask=masks["test"],
        num_classes=c,
    )
    if row_normalize:
        from .graph import row_normalize_features

        graph = row_normalize_features(graph)
    return graph


def save_dataset(graph: Graph, path) -> None:
    """Write ``graph`` to a dataset directory (created if absent).

    ``load_dataset(save_dataset(g)) == g`` holds exactly: integers are
    written verbatim and reals with shortest round-trip formatting.
    """
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)

    with (root / "edges.csv").open("w", encoding="utf-8") as f:
        for u, v in graph.edges:
            f.write(f"{u},{v}\n")

    with (root / "features.csv").open("w", encoding="utf-8") as f:
        for row in graph.features:
            f.write(",".join(repr(float(x)) for x in row) + "\n")

    with (root / "labels.csv").open("w", encoding="utf-8") as f:
        for y in graph.labels:
            f.write(f"{y}\n")

    split = np.full(graph.num_nodes, "none", dtype=object)
    split[graph.train_mask] = "train"
    split[graph.val_mask] = "val"
    split[graph.test_mask] = "test"
    with (root / "split.csv").open("w", encoding="utf-8") as f:
        for tag in split:
            f.write(f"{tag}\n")

    meta = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "num_nodes": graph.num_nodes,
        "num_features": graph.feature_dim,
        "num_classes": graph.num_classes,
        "num_edges": graph.num_edges,
    }
    (root / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def dataset_summary(graph: Graph) -> dict:
    """Human-facing statistics used by the CLI validator."""
    return {
        "num_nodes": graph.num_nodes,
        "num_edges": graph.num_edges,
        "num_features": graph.feature_dim,
        "num_classes": graph.num_classes,
        "train_nodes": int(graph.train_mask.sum()),
        "val_nodes": int(graph.val_mask.sum()),
        "test_nodes": int(graph.test_mask.sum()),
    }
