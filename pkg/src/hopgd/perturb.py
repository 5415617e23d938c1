"""Positive-sample masking and negative-sample corruption.

Positives: one Bernoulli column mask per epoch, shared by every row. Since
zeroing columns commutes bitwise with propagation (per-column op sequences
are identical), the mask is applied directly to the cached positive views,
costing zero sparse multiplies per epoch.

Negatives: the feature rows are permuted before propagation, so the graph
aggregates the wrong neighbors. That does not commute with propagation, so
a pool of corrupted view sets is precomputed up front and cycled per epoch.
Negatives are left unmasked by default; masking them is an ablation flag.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng as rng_streams
from .errors import ConfigError, DataError
from .graph import GraphBundle, SparseAdj
from .views import ViewSet, compute_manifest, load_views, propagate, save_views


@dataclass
class MaskSpec:
    """A single 0/1 column mask broadcast to all rows; kept prob is 1 - p_m."""

    p_m: float
    mask: np.ndarray    # (d,) float32 in {0, 1}


def draw_mask(dim: int, p_m: float, rng: np.random.Generator) -> MaskSpec:
    if not 0.0 <= p_m <= 1.0:
        raise ConfigError(f"p_m must lie in [0, 1], got {p_m}")
    keep = rng.random(dim) >= p_m
    return MaskSpec(p_m=p_m, mask=keep.astype(np.float32))


def mask_rows(rows: np.ndarray, spec: MaskSpec) -> np.ndarray:
    """Zero the masked columns of a row block (exact zeros, not multiplies)."""
    if rows.shape[1] != spec.mask.shape[0]:
        raise DataError(
            f"mask length {spec.mask.shape[0]} != feature dim {rows.shape[1]}")
    out = rows.copy()
    out[:, spec.mask == 0.0] = 0.0
    return out


def apply_mask(viewset: ViewSet, spec: MaskSpec) -> ViewSet:
    """Mask every view's columns; bitwise equal to propagating masked features."""
    masked = [mask_rows(v, spec) for v in viewset.views]
    return ViewSet(views=masked, manifest=viewset.manifest,
                   self_loops=viewset.self_loops,
                   corruption_id=viewset.corruption_id)


def corrupt(adj: SparseAdj, feats: np.ndarray, hops: int,
            rng: np.random.Generator, corruption_id: int = 1,
            graph_hash: str = "", features_hash: str = "") -> tuple[np.ndarray, ViewSet]:
    """Permute feature rows uniformly and propagate the permuted matrix.

    Row i of the corrupted features is row perm[i] of the input, so the
    row multiset is preserved exactly while every neighborhood aggregates
    the wrong attributes.
    """
    n = feats.shape[0]
    if n < 2:
        raise DataError("corruption needs at least two nodes")
    perm = rng.permutation(n)
    corrupted = feats[perm]
    manifest = compute_manifest(graph_hash, features_hash, hops,
                                adj.self_loops, corruption_id)
    views = propagate(adj, corrupted, hops, manifest=manifest,
                      corruption_id=corruption_id)
    return perm, views


@dataclass
class CorruptionPool:
    """Precomputed corrupted view sets, cycled across epochs (read-only)."""

    perms: list[np.ndarray]
    entries: list[ViewSet]

    @property
    def size(self) -> int:
        return len(self.entries)

    def entry(self, epoch: int) -> ViewSet:
        return self.entries[epoch % self.size]


def build_pool(bundle: GraphBundle, adj: SparseAdj, hops: int,
               size: int, master_seed: int) -> CorruptionPool:
    """Build `size` corrupted view sets, each from its own RNG stream."""
    if size < 1:
        raise ConfigError(f"pool size must be >= 1, got {size}")
    gh, fh = bundle.graph_hash(), bundle.features_hash()
    perms, entries = [], []
    for idx in range(size):
        stream = rng_streams.stream(master_seed, rng_streams.POOL, idx)
        perm, views = corrupt(adj, bundle.features, hops, stream,
                              corruption_id=idx + 1,
                              graph_hash=gh, features_hash=fh)
        perms.append(perm)
        entries.append(views)
    return CorruptionPool(perms=perms, entries=entries)


def save_pool(pool: CorruptionPool, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for idx, (perm, views) in enumerate(zip(pool.perms, pool.entries)):
        name = f"neg_{idx:02d}"
        save_views(views, directory / f"{name}.views")
        np.ascontiguousarray(perm, dtype="<u4").tofile(directory / f"{name}.perm")
        names.append(name)
    (directory / "pool.json").write_text(json.dumps({"entries": names}) + "\n")
    return directory


def load_pool(directory: str | Path,
              expected_manifests: list[bytes] | None = None) -> CorruptionPool:
    directory = Path(directory)
    meta_path = directory / "pool.json"
    if not meta_path.exists():
        raise DataError(f"missing upstream artifact: {meta_path}")
    names = json.loads(meta_path.read_text())["entries"]
    perms, entries = [], []
    for idx, name in enumerate(names):
        expect = expected_manifests[idx] if expected_manifests else None
        views = load_views(directory / f"{name}.views", expect)
        perm = np.fromfile(directory / f"{name}.perm", dtype="<u4").astype(np.int64)
        perms.append(perm)
        entries.append(views)
    return CorruptionPool(perms=perms, entries=entries)
