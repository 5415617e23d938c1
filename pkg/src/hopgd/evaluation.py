"""Last-hop inference, the linear probe, and the hop-separation diagnostic.

Inference touches no graph data at all: it receives the cached hop-K view
and applies the frozen encoder. The probe is a multinomial logistic
regression trained full-batch on the train split with frozen embeddings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng as rng_streams
from .errors import DataError
from .graph import GraphBundle, homophily_ratio, normalize_adjacency
from .nn import Adam, ModelState, encode, model_hash, xavier_uniform
from .views import propagate


def infer(model: ModelState, view_k: np.ndarray) -> np.ndarray:
    """Embeddings from the cached last-hop view; performs zero sparse ops."""
    if view_k.shape[1] != model.dim:
        raise DataError(
            f"view dim {view_k.shape[1]} != checkpoint dim {model.dim}")
    return encode(model, view_k)


def save_embeddings(embeddings: np.ndarray, path: str | Path,
                    model: ModelState | None = None,
                    view_manifest: bytes | None = None) -> Path:
    """Raw f32 rows plus a JSON sidecar carrying shapes and provenance."""
    path = Path(path)
    np.ascontiguousarray(embeddings, dtype="<f4").tofile(path)
    sidecar = {
        "num_rows": int(embeddings.shape[0]),
        "dim": int(embeddings.shape[1]),
        "checkpoint_hash": model_hash(model) if model is not None else None,
        "view_manifest": view_manifest.hex() if view_manifest else None,
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=1) + "\n")
    return path


def load_embeddings(path: str | Path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing upstream artifact: {path}")
    sidecar_path = path.with_suffix(".json")
    if not sidecar_path.exists():
        raise DataError(f"missing upstream artifact: {sidecar_path}")
    sidecar = json.loads(sidecar_path.read_text())
    blob = np.fromfile(path, dtype="<f4")
    n, d = sidecar["num_rows"], sidecar["dim"]
    if blob.size != n * d:
        raise DataError(f"embeddings size {blob.size} != {n}*{d}")
    return blob.reshape(n, d), sidecar


def _probe_once(train_x, train_y, test_x, test_y, num_classes, rng,
                iters, lr, weight_decay):
    w = xavier_uniform(rng, (train_x.shape[1], num_classes), np.float64)
    b = np.zeros(num_classes)
    onehot = np.eye(num_classes)[train_y]
    opt = Adam(lr)
    for _ in range(iters):
        z = train_x @ w + b
        z -= z.max(axis=1, keepdims=True)
        p = np.exp(z)
        p /= p.sum(axis=1, keepdims=True)
        g = (p - onehot) / len(train_y)
        gw = train_x.T @ g + weight_decay * w
        gb = g.sum(axis=0)
        w = opt.step("w", w, gw)
        b = opt.step("b", b, gb)
    pred = (test_x @ w + b).argmax(axis=1)
    return float((pred == test_y).mean())


def probe(embeddings: np.ndarray, labels: np.ndarray | None,
          splits: dict[str, np.ndarray] | None, runs: int = 10,
          seed: int = 0, iters: int = 300, lr: float = 0.01,
          weight_decay: float = 1e-5) -> tuple[float, float, list[float]]:
    """Mean/std test accuracy of `runs` independently initialized probes."""
    if labels is None:
        raise DataError("probe requires labels")
    if splits is None:
        raise DataError("probe requires splits")
    if runs < 1:
        raise DataError("probe requires runs >= 1")
    train_idx, test_idx = splits.get("train"), splits.get("test")
    if train_idx is None or train_idx.size == 0:
        raise DataError("empty train split")
    if test_idx is None or test_idx.size == 0:
        raise DataError("empty test split")
    num_classes = int(labels.max()) + 1
    train_x = embeddings[train_idx].astype(np.float64)
    test_x = embeddings[test_idx].astype(np.float64)
    accs = []
    for run in range(runs):
        rng = rng_streams.stream(seed, rng_streams.PROBE, run)
        accs.append(_probe_once(train_x, labels[train_idx], test_x,
                                labels[test_idx], num_classes, rng,
                                iters, lr, weight_decay))
    return float(np.mean(accs)), float(np.std(accs)), accs


def separation_score(pos_rows: np.ndarray, neg_rows: np.ndarray) -> float:
    """How far each group sits from the other group's centroid, in units
    of within-group spread (averaged over the two directions)."""
    c_pos = pos_rows.mean(axis=0)
    c_neg = neg_rows.mean(axis=0)
    spread_pos = np.linalg.norm(pos_rows - c_pos, axis=1).mean()
    spread_neg = np.linalg.norm(neg_rows - c_neg, axis=1).mean()
    cross_pos = np.linalg.norm(pos_rows - c_neg, axis=1).mean()
    cross_neg = np.linalg.norm(neg_rows - c_pos, axis=1).mean()
    eps = 1e-30
    return float(0.5 * (cross_pos / max(spread_neg, eps)
                        + cross_neg / max(spread_pos, eps)))


@dataclass
class DiagnosticReport:
    scores: list[tuple[int, float]]     # (hop, separation score), hop 0 = raw
    homophily: float | None             # None when the graph has no edges

    def to_dict(self) -> dict:
        return {"scores": [[int(k), float(s)] for k, s in self.scores],
                "homophily": self.homophily}


def hop_separation_diagnostic(bundle: GraphBundle, k_max: int = 4,
                              self_loops: bool = True,
                              seed: int = 0) -> DiagnosticReport:
    """Track positive/negative separation as propagation depth grows.

    Positives are the bundle's own features; negatives are a row
    permutation of them, both pushed through the same operator. On a
    homophilous graph the two groups drift apart with depth; on a
    heterophilous one they stay mixed.
    """
    h = homophily_ratio(bundle) if bundle.edges.size else None
    adj = normalize_adjacency(bundle, self_loops)
    rng = rng_streams.stream(seed, rng_streams.SYNTH, 1)
    perm = rng.permutation(bundle.num_nodes)
    pos = bundle.features.astype(np.float64)
    neg = pos[perm]
    scores = [(0, separation_score(pos, neg))]
    if k_max >= 1:
        pos_views = propagate(adj, pos, k_max)
        neg_views = propagate(adj, neg, k_max)
        for k in range(1, k_max + 1):
            scores.append((k, separation_score(pos_views.hop(k),
                                               neg_views.hop(k))))
    return DiagnosticReport(scores=scores, homophily=h)
