"""Epoch batch assembly and the structure-aware group-discrimination loss.

The composite loss is alpha * L_gd + beta * L_hop + gamma * L_degree, each
term a mean binary cross entropy over all rows of the batch:

    L_gd      positives (1) vs corrupted negatives (0)
    L_degree  relative-degree class of the row's node position
    L_hop     high-hop (k > K/2) vs low-hop rows; disabled when K == 1

Gradients are computed analytically, including the path through the
per-row lambda scaling into the softmax logits behind the view weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .graph import StructureLabels
from .nn import ModelState, activate, activate_grad, bce_with_logits, head_logits, sigmoid
from .perturb import MaskSpec
from .views import ViewSet


@dataclass
class LossWeights:
    alpha: float = 1.0
    beta: float = 0.01
    gamma: float = 0.05

    def __post_init__(self) -> None:
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ConfigError("loss weights must be nonnegative")


def hop_label(k: int, hops: int, mode: str = "binary") -> float:
    """Binary high/low split at K/2; soft mode spreads (k-1)/(K-1)."""
    if not 1 <= k <= hops:
        raise DataError(f"hop {k} outside [1, {hops}]")
    if mode == "binary":
        return 1.0 if k > hops / 2 else 0.0
    if mode == "soft":
        return 0.0 if hops == 1 else (k - 1) / (hops - 1)
    raise ConfigError(f"hop_label_mode must be 'binary' or 'soft', got {mode!r}")


@dataclass
class EpochBatch:
    """Paired positive/negative rows; row j and row B+j share node and hop.

    Rows are stored unscaled; the per-row lambda scaling is applied inside
    the forward pass so the min step can reuse the batch after the max step
    has moved lambda.
    """

    rows: np.ndarray         # (2B, d), positives then negatives
    node_idx: np.ndarray     # (2B,)
    hop: np.ndarray          # (2B,) 1-based hop index
    y_group: np.ndarray      # (2B,) 1.0 for positives, 0.0 for negatives
    y_degree: np.ndarray     # (2B,)
    y_hop: np.ndarray        # (2B,)
    hops: int

    @property
    def size(self) -> int:
        return self.rows.shape[0]


def view_sample_counts(num_nodes: int, active: int) -> list[int]:
    """floor(N/K) per view, remainder going one each to the first views."""
    base, rem = divmod(num_nodes, active)
    return [base + (1 if i < rem else 0) for i in range(active)]


def assemble_epoch_batch(pos_views: ViewSet, neg_views: ViewSet,
                         labels: StructureLabels, rng: np.random.Generator,
                         mask: MaskSpec | None = None,
                         mask_negatives: bool = False,
                         hop_label_mode: str = "binary",
                         active_hops: list[int] | None = None) -> EpochBatch:
    """Sample N/K nodes per view (without replacement within a view).

    active_hops restricts sampling to a subset of views; fixed-weight
    ablations with zero entries sample only the nonzero hops, so the batch
    stays N positive rows against N paired negatives either way.
    """
    hops = pos_views.hops
    n = pos_views.num_nodes
    if active_hops is None:
        active_hops = list(range(1, hops + 1))
    if n < len(active_hops):
        raise DataError(f"need at least {len(active_hops)} nodes, got {n}")
    counts = view_sample_counts(n, len(active_hops))

    dim = pos_views.dim
    half = sum(counts)
    rows = np.empty((2 * half, dim), dtype=pos_views.views[0].dtype)
    nodes, hop_col = [], []
    offset = 0
    for k, count in zip(active_hops, counts):
        idx = rng.choice(n, size=count, replace=False)
        np.take(pos_views.hop(k), idx, axis=0, out=rows[offset:offset + count])
        np.take(neg_views.hop(k), idx, axis=0,
                out=rows[half + offset:half + offset + count])
        nodes.append(idx)
        hop_col.append(np.full(count, k, dtype=np.int64))
        offset += count
    if mask is not None:
        if mask.mask.shape[0] != dim:
            raise DataError(
                f"mask length {mask.mask.shape[0]} != feature dim {dim}")
        dropped = mask.mask == 0.0
        stop = 2 * half if mask_negatives else half
        rows[:stop, dropped] = 0.0

    node_idx = np.concatenate(nodes)
    node_idx = np.concatenate([node_idx, node_idx])
    hop_arr = np.concatenate(hop_col)
    hop_arr = np.concatenate([hop_arr, hop_arr])

    dtype = rows.dtype
    y_group = np.zeros(2 * half, dtype=dtype)
    y_group[:half] = 1.0
    y_degree = labels.degree_label[node_idx].astype(dtype)
    hop_targets = {k: hop_label(k, hops, hop_label_mode) for k in active_hops}
    y_hop = np.array([hop_targets[int(k)] for k in hop_arr], dtype=dtype)
    return EpochBatch(rows=rows, node_idx=node_idx, hop=hop_arr,
                      y_group=y_group, y_degree=y_degree, y_hop=y_hop,
                      hops=hops)


@dataclass
class LossParts:
    total: float
    gd: float
    hop: float
    degree: float


def _effective_weights(weights: LossWeights, hops: int) -> tuple[float, float, float]:
    beta = 0.0 if hops == 1 else weights.beta
    return weights.alpha, beta, weights.gamma


def forward(model: ModelState, batch: EpochBatch, weights: LossWeights,
            lam: np.ndarray | None = None) -> tuple[LossParts, dict]:
    """Evaluate the composite loss; returns the parts and a cache for backward."""
    if batch.rows.shape[1] != model.dim:
        raise DataError(f"batch dim {batch.rows.shape[1]} != model dim {model.dim}")
    if lam is None:
        lam = model.lam()
    lam = np.asarray(lam, dtype=batch.rows.dtype)
    alpha, beta, gamma = _effective_weights(weights, batch.hops)

    lam_row = lam[batch.hop - 1]
    if np.all(lam_row == 1.0):
        scaled = batch.rows          # K=1 or all-ones fixed weights: no copy
    else:
        scaled = batch.rows * lam_row[:, None]
    pre = scaled @ model.enc_w + model.enc_b
    hidden = activate(pre, model.slope[0], model.activation)

    logits = {}
    losses = {}
    for name, weight, target in (("gd", alpha, batch.y_group),
                                 ("deg", gamma, batch.y_degree),
                                 ("hop", beta, batch.y_hop)):
        if weight > 0:
            logits[name] = head_logits(model, name, hidden)
            losses[name] = bce_with_logits(logits[name], target)
        else:
            losses[name] = 0.0
    l_gd, l_deg, l_hop = losses["gd"], losses["deg"], losses["hop"]
    total = alpha * l_gd + beta * l_hop + gamma * l_deg
    parts = LossParts(total=total, gd=l_gd, hop=l_hop, degree=l_deg)
    cache = {"scaled": scaled, "pre": pre, "hidden": hidden,
             "logits": logits, "lam": lam,
             "eff": (alpha, beta, gamma)}
    return parts, cache


def sagd_loss(batch: EpochBatch, model: ModelState, weights: LossWeights,
              lam: np.ndarray | None = None) -> LossParts:
    parts, _ = forward(model, batch, weights, lam)
    return parts


def backward(model: ModelState, batch: EpochBatch, cache: dict,
             need_theta: bool = True, need_lam: bool = True) -> dict[str, np.ndarray]:
    """Analytic gradients of the composite loss for every requested tensor.

    need_theta covers encoder, heads, and slope; need_lam covers the
    softmax logits behind the view weights. Skipping the unused side saves
    the corresponding matrix product in each half of the min-max step.
    """
    alpha, beta, gamma = cache["eff"]
    hidden = cache["hidden"]
    pre = cache["pre"]
    scaled = cache["scaled"]
    dtype = hidden.dtype
    b_rows = batch.size
    ones_hidden = np.ones(model.hidden, dtype=dtype)

    grads: dict[str, np.ndarray] = {}
    d_hidden = np.zeros_like(hidden)
    head_terms = [("gd", alpha, batch.y_group), ("deg", gamma, batch.y_degree),
                  ("hop", beta, batch.y_hop)]
    for name, weight, target in head_terms:
        if weight == 0:
            continue                 # zero-weight heads stay frozen
        z = cache["logits"][name]
        gz = (weight / b_rows) * (sigmoid(z) - target)
        w, _ = model.head(name)
        if need_theta:
            grads[f"{name}_w"] = np.outer(hidden.T @ gz, ones_hidden)
            grads[f"{name}_b"] = np.full(model.hidden, gz.sum(), dtype=dtype)
        d_hidden += gz[:, None] * w.sum(axis=1)[None, :]

    d_pre = d_hidden * activate_grad(pre, model.slope[0], model.activation)
    if need_theta:
        if model.activation == "prelu":
            neg = pre <= 0
            grads["slope"] = np.array([np.sum(d_hidden[neg] * pre[neg])], dtype=dtype)
        else:
            grads["slope"] = np.zeros(1, dtype=dtype)
        grads["enc_w"] = scaled.T @ d_pre
        grads["enc_b"] = d_pre.sum(axis=0)
    if need_lam:
        d_scaled = d_pre @ model.enc_w.T
        per_row = np.einsum("ij,ij->i", d_scaled, batch.rows)
        d_lam = np.bincount(batch.hop - 1, weights=per_row,
                            minlength=batch.hops).astype(dtype)
        lam = cache["lam"]
        grads["lam_logits"] = lam * (d_lam - np.dot(lam, d_lam))
    return grads
