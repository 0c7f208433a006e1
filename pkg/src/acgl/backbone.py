"""Two-layer GCN: forward pass, masked cross-entropy, exact gradients, Adam.

The forward map is

    hidden = relu(A_hat @ X @ W0)        (dropout on hidden while training)
    logits = A_hat @ hidden @ W1

with A_hat the symmetrically normalized adjacency. Gradients are derived
by hand so training is exactly reproducible with plain numpy; dropout uses
inverted scaling (mask / keep_prob at train time, identity at inference).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .graph import Graph, SessionPlan, normalize_adjacency, session_subgraph


@dataclass(frozen=True)
class BackboneParams:
    """Weights of the two GCN layers. W0: (d, h), W1: (h, c0)."""

    W0: np.ndarray
    W1: np.ndarray

    def __post_init__(self):
        if self.W0.ndim != 2 or self.W1.ndim != 2:
            raise ValueError("W0 and W1 must be matrices")
        if self.W0.shape[1] != self.W1.shape[0]:
            raise ValueError(
                f"hidden dims disagree: W0 is {self.W0.shape}, W1 is {self.W1.shape}"
            )
        if not (np.isfinite(self.W0).all() and np.isfinite(self.W1).all()):
            raise ValueError("parameters must be finite")

    @property
    def hidden_dim(self) -> int:
        return self.W0.shape[1]


@dataclass(frozen=True)
class AdamState:
    """Per-matrix first/second moment accumulators plus the shared step count."""

    m_W0: np.ndarray
    v_W0: np.ndarray
    m_W1: np.ndarray
    v_W1: np.ndarray
    step: int
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0

    @classmethod
    def init(cls, params: BackboneParams, lr: float, weight_decay: float = 0.0) -> "AdamState":
        return cls(
            m_W0=np.zeros_like(params.W0),
            v_W0=np.zeros_like(params.W0),
            m_W1=np.zeros_like(params.W1),
            v_W1=np.zeros_like(params.W1),
            step=0,
            lr=lr,
            weight_decay=weight_decay,
        )


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_backbone(feature_dim: int, hidden_dim: int, num_base_classes: int,
                  rng: np.random.Generator) -> BackboneParams:
    return BackboneParams(
        W0=glorot_uniform(rng, feature_dim, hidden_dim),
        W1=glorot_uniform(rng, hidden_dim, num_base_classes),
    )


def sample_dropout_mask(rng: np.random.Generator, shape: tuple[int, int],
                        rate: float) -> np.ndarray:
    """Inverted-dropout mask: entries are 0 or 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise ValueError("dropout rate must lie in [0, 1)")
    keep = rng.random(shape) >= rate
    return keep.astype(np.float64) / (1.0 - rate)


def _forward(adj: sp.csr_array, X: np.ndarray, params: BackboneParams,
             dropout_mask: np.ndarray | None):
    """Shared forward pass; returns pre-activation, dropped hidden, logits."""
    z0 = adj @ (X @ params.W0)
    hidden = np.maximum(z0, 0.0)
    dropped = hidden if dropout_mask is None else hidden * dropout_mask
    logits = adj @ (dropped @ params.W1)
    return z0, dropped, logits


def gcn_forward(
    adj: sp.csr_array,
    X: np.ndarray,
    params: BackboneParams,
    dropout_rate: float = 0.0,
    rng: np.random.Generator | None = None,
    training: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Run the two-layer GCN; returns (hidden, logits).

    In training mode with a positive dropout rate an inverted-dropout mask
    is sampled from ``rng`` and applied to the hidden layer (the returned
    hidden includes it). Inference applies no dropout and no scaling.
    """
    if X.shape[1] != params.W0.shape[0]:
        raise ValueError(f"feature dim {X.shape[1]} != W0 rows {params.W0.shape[0]}")
    mask = None
    if training and dropout_rate > 0.0:
        if rng is None:
            raise ValueError("training with dropout requires an rng")
        mask = sample_dropout_mask(rng, (X.shape[0], params.hidden_dim), dropout_rate)
    _, hidden, logits = _forward(adj, X, params, mask)
    return hidden, logits


def masked_softmax_cross_entropy(
    logits: np.ndarray, labels: np.ndarray, mask: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over masked rows; also returns full softmax probs.

    Stabilized by row-max subtraction, so huge logits neither overflow nor
    produce NaNs.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("mask selects no nodes")
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    probs = np.exp(log_probs)
    picked = log_probs[mask, labels[mask]]
    return float(-picked.mean()), probs


def gcn_backward(
    adj: sp.csr_array,
    X: np.ndarray,
    params: BackboneParams,
    labels: np.ndarray,
    mask: np.ndarray,
    dropout_mask: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradients of the masked mean cross-entropy w.r.t. W0 and W1.

    ``dropout_mask`` must be the same (already scaled) mask used in the
    paired forward pass, or None. The relu subgradient at 0 is taken as 0.
    """
    mask = np.asarray(mask, dtype=bool)
    z0, dropped, logits = _forward(adj, X, params, dropout_mask)
    _, probs = masked_softmax_cross_entropy(logits, labels, mask)

    n_masked = int(mask.sum())
    d_logits = np.zeros_like(probs)
    d_logits[mask] = probs[mask]
    d_logits[mask, labels[mask]] -= 1.0
    d_logits /= n_masked

    # adj is symmetric, so adj.T @ M == adj @ M throughout.
    back1 = adj @ d_logits
    grad_W1 = dropped.T @ back1
    d_dropped = back1 @ params.W1.T
    d_hidden = d_dropped if dropout_mask is None else d_dropped * dropout_mask
    d_z0 = d_hidden * (z0 > 0.0)
    grad_W0 = (adj @ X).T @ d_z0
    return grad_W0, grad_W1


def _adam_update(param, grad, m, v, state: AdamState, t: int):
    if state.weight_decay:
        grad = grad + state.weight_decay * param
    m = state.beta1 * m + (1.0 - state.beta1) * grad
    v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    return param - state.lr * m_hat / (np.sqrt(v_hat) + state.eps), m, v


def adam_step(
    params: BackboneParams,
    grads: tuple[np.ndarray, np.ndarray],
    state: AdamState,
) -> tuple[BackboneParams, AdamState]:
    """One bias-corrected Adam step over both weight matrices.

    L2 weight decay is folded into the gradient before the moment update
    (grad += decay * param), matching decay applied through the loss.
    """
    g0, g1 = grads
    if g0.shape != params.W0.shape or g1.shape != params.W1.shape:
        raise ValueError("gradient shapes must mirror parameter shapes")
    t = state.step + 1
    new_W0, m0, v0 = _adam_update(params.W0, g0, state.m_W0, state.v_W0, state, t)
    new_W1, m1, v1 = _adam_update(params.W1, g1, state.m_W1, state.v_W1, state, t)
    new_params = BackboneParams(W0=new_W0, W1=new_W1)
    new_state = replace(state, m_W0=m0, v_W0=v0, m_W1=m1, v_W1=v1, step=t)
    return new_params, new_state


@dataclass(frozen=True)
class BackboneConfig:
    hidden: int = 256
    epochs: int = 50
    lr: float = 0.001
    dropout: float = 0.5
    weight_decay: float = 5e-4
    seed: int = 0

    def __post_init__(self):
        if self.hidden < 1 or self.epochs < 0:
            raise ValueError("hidden must be >= 1 and epochs >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")


def train_base(graph: Graph, plan: SessionPlan, config: BackboneConfig) -> BackboneParams:
    """Train the backbone on the base session's induced subgraph.

    Runs ``config.epochs`` full-batch Adam steps on the train-mask nodes of
    the base subgraph; no early stopping. The label head indexes classes by
    their position in the base group. Deterministic given ``config.seed``.
    """
    base = session_subgraph(graph, plan.base_classes)
    if not base.train_mask.any():
        raise ValueError("base session has an empty train split")
    class_pos = {c: i for i, c in enumerate(plan.base_classes)}
    y = np.array([class_pos[int(c)] for c in base.labels], dtype=np.int64)

    adj = normalize_adjacency(base)
    X = base.features
    rng = np.random.default_rng(config.seed)
    params = init_backbone(X.shape[1], config.hidden, len(plan.base_classes), rng)
    state = AdamState.init(params, lr=config.lr, weight_decay=config.weight_decay)

    for _ in range(config.epochs):
        mask_drop = None
        if config.dropout > 0.0:
            mask_drop = sample_dropout_mask(rng, (X.shape[0], config.hidden), config.dropout)
        grads = gcn_backward(adj, X, params, y, base.train_mask, mask_drop)
        params, state = adam_step(params, grads, state)
    return params


def extract_hidden(graph: Graph, params: BackboneParams) -> np.ndarray:
    """Frozen-backbone embeddings of every node (inference mode, no dropout)."""
    adj = normalize_adjacency(graph)
    hidden, _ = gcn_forward(adj, graph.features, params, training=False)
    return hidden
