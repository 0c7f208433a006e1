"""Versioned binary container for model state.

Layout (all little-endian): 4-byte magic ``ACGL``, u16 format version,
u16 kind tag, then kind-specific fields. Matrices are stored row-major as
64-bit reals, so save/load round-trips are bit-exact and a resumed session
stream continues identically. Loaders verify magic, version, kind, and
that the payload length matches the declared dimensions.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .analytic import AnalyticState
from .backbone import BackboneParams
from .expander import ExpanderParams

MAGIC = b"ACGL"
VERSION = 1

KIND_BACKBONE = 1
KIND_EXPANDER = 2
KIND_ANALYTIC = 3

_HEADER = struct.Struct("<4sHH")


class ContainerError(ValueError):
    """Corrupt, truncated, or mismatched container file."""


def _matrix_bytes(mat: np.ndarray) -> bytes:
    return np.ascontiguousarray(mat, dtype="<f8").tobytes()


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.off = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.data):
            raise ContainerError(f"{self.path}: truncated (needed {n} more bytes)")
        out = self.data[self.off : self.off + n]
        self.off += n
        return out

    def unpack(self, fmt: str):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))

    def matrix(self, rows: int, cols: int) -> np.ndarray:
        raw = self.take(rows * cols * 8)
        return np.frombuffer(raw, dtype="<f8").reshape(rows, cols).astype(np.float64)

    def done(self):
        if self.off != len(self.data):
            raise ContainerError(f"{self.path}: {len(self.data) - self.off} trailing bytes")


def _open(path, expected_kind: int) -> _Reader:
    data = Path(path).read_bytes()
    r = _Reader(data, path)
    magic, version, kind = r.unpack("<4sHH")
    if magic != MAGIC:
        raise ContainerError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ContainerError(f"{path}: unsupported container version {version}")
    if kind != expected_kind:
        raise ContainerError(f"{path}: kind {kind} found, {expected_kind} expected")
    return r


def save_backbone(params: BackboneParams, path) -> None:
    d, h = params.W0.shape
    c = params.W1.shape[1]
    blob = _HEADER.pack(MAGIC, VERSION, KIND_BACKBONE)
    blob += struct.pack("<QQQ", d, h, c)
    blob += _matrix_bytes(params.W0) + _matrix_bytes(params.W1)
    Path(path).write_bytes(blob)


def load_backbone(path) -> BackboneParams:
    r = _open(path, KIND_BACKBONE)
    d, h, c = r.unpack("<QQQ")
    W0 = r.matrix(d, h)
    W1 = r.matrix(h, c)
    r.done()
    return BackboneParams(W0=W0, W1=W1)


def save_expander(params: ExpanderParams, path) -> None:
    h, d_out = params.weight.shape
    blob = _HEADER.pack(MAGIC, VERSION, KIND_EXPANDER)
    blob += struct.pack("<QQqB", h, d_out, params.seed, int(params.uses_adjacency))
    blob += _matrix_bytes(params.weight)
    Path(path).write_bytes(blob)


def load_expander(path) -> ExpanderParams:
    r = _open(path, KIND_EXPANDER)
    h, d_out, seed, uses_adj = r.unpack("<QQqB")
    weight = r.matrix(h, d_out)
    r.done()
    return ExpanderParams(weight=weight, seed=seed, uses_adjacency=bool(uses_adj))


def save_analytic_state(state: AnalyticState, path) -> None:
    d, c = state.weights.shape
    blob = _HEADER.pack(MAGIC, VERSION, KIND_ANALYTIC)
    blob += struct.pack("<dQQ", state.gamma, d, c)
    blob += struct.pack(f"<{c}q", *state.seen_classes)
    blob += _matrix_bytes(state.weights) + _matrix_bytes(state.inv_gram)
    Path(path).write_bytes(blob)


def load_analytic_state(path) -> AnalyticState:
    r = _open(path, KIND_ANALYTIC)
    gamma, d, c = r.unpack("<dQQ")
    seen = r.unpack(f"<{c}q")
    weights = r.matrix(d, c)
    inv_gram = r.matrix(d, d)
    r.done()
    return AnalyticState(
        weights=weights, inv_gram=inv_gram, gamma=gamma, seen_classes=tuple(seen)
    )
