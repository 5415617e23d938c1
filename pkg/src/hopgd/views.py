"""Precomputed multi-hop feature views and their on-disk cache.

A view set holds the matrices A_hat^k X for k = 1..K, computed by K
iterated sparse-dense multiplies (A_hat^k is never materialized). The
cache file format is fixed:

    magic "AVGE1" | u32 N, d, K, flags | 32-byte manifest hash | K f32 blocks

flags bit 0 carries the self-loop setting; bits 8+ carry the corruption id
(0 for pristine features). The manifest hash binds the cache to the exact
graph, feature blob, hop count, and flags it was computed from, so stale
caches fail loudly on load.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .counters import sparse_ops
from .errors import DataError, StaleCacheError
from .graph import GraphBundle, SparseAdj

MAGIC = b"AVGE1"
_HEADER = struct.Struct("<5s4I32s")


def compute_manifest(graph_hash: str, features_hash: str, hops: int,
                     self_loops: bool, corruption_id: int = 0) -> bytes:
    h = hashlib.sha256()
    h.update(b"view-cache-v1|")
    h.update(graph_hash.encode())
    h.update(features_hash.encode())
    h.update(struct.pack("<IBI", hops, int(self_loops), corruption_id))
    return h.digest()


@dataclass
class ViewSet:
    """K propagated feature matrices; hop k is views[k-1]. Immutable by convention."""

    views: list[np.ndarray]
    manifest: bytes = b"\x00" * 32
    self_loops: bool = True
    corruption_id: int = 0

    @property
    def hops(self) -> int:
        return len(self.views)

    @property
    def num_nodes(self) -> int:
        return self.views[0].shape[0]

    @property
    def dim(self) -> int:
        return self.views[0].shape[1]

    def hop(self, k: int) -> np.ndarray:
        if not 1 <= k <= self.hops:
            raise DataError(f"hop {k} outside [1, {self.hops}]")
        return self.views[k - 1]


def propagate(adj: SparseAdj, feats: np.ndarray, hops: int,
              manifest: bytes = b"\x00" * 32, corruption_id: int = 0) -> ViewSet:
    """Compute [A_hat X, ..., A_hat^K X] by K iterated sparse multiplies."""
    if hops < 1:
        raise DataError(f"hop count must be >= 1, got {hops}")
    if feats.shape[0] != adj.num_nodes:
        raise DataError(
            f"feature rows {feats.shape[0]} != graph nodes {adj.num_nodes}")
    mat = adj.as_dtype(feats.dtype)
    views = []
    current = feats
    for _ in range(hops):
        current = mat @ current
        sparse_ops.add(1)
        views.append(current)
    if not np.isfinite(views[-1]).all():
        raise DataError("non-finite value produced during propagation")
    return ViewSet(views=views, manifest=manifest,
                   self_loops=adj.self_loops, corruption_id=corruption_id)


def build_views(bundle: GraphBundle, adj: SparseAdj, hops: int) -> ViewSet:
    """Propagate the bundle's own features, with a manifest bound to the bundle."""
    manifest = compute_manifest(bundle.graph_hash(), bundle.features_hash(),
                                hops, adj.self_loops, corruption_id=0)
    return propagate(adj, bundle.features, hops, manifest=manifest)


def save_views(viewset: ViewSet, path: str | Path) -> Path:
    path = Path(path)
    if viewset.views[0].dtype != np.float32:
        raise DataError("view cache format is f32; got dtype "
                        f"{viewset.views[0].dtype}")
    flags = int(viewset.self_loops) | (viewset.corruption_id << 8)
    header = _HEADER.pack(MAGIC, viewset.num_nodes, viewset.dim,
                          viewset.hops, flags, viewset.manifest)
    with open(path, "wb") as f:
        f.write(header)
        for v in viewset.views:
            f.write(np.ascontiguousarray(v, dtype="<f4").tobytes())
    return path


def load_views(path: str | Path, expected_manifest: bytes | None = None) -> ViewSet:
    """Read a view cache; rejects bad magic, truncation, and stale manifests."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing upstream artifact: {path}")
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise DataError(f"corrupt view cache (truncated header): {path}")
    magic, n, d, hops, flags, manifest = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise DataError(f"corrupt view cache (bad magic {magic!r}): {path}")
    expected_size = _HEADER.size + hops * n * d * 4
    if len(blob) != expected_size:
        raise DataError(
            f"corrupt view cache: {len(blob)} bytes, expected {expected_size}")
    if expected_manifest is not None and manifest != expected_manifest:
        raise StaleCacheError(
            f"stale cache: {path} was built from different inputs")
    views = []
    offset = _HEADER.size
    block = n * d * 4
    for _ in range(hops):
        arr = np.frombuffer(blob, dtype="<f4", count=n * d, offset=offset)
        views.append(arr.reshape(n, d).copy())
        offset += block
    return ViewSet(views=views, manifest=manifest,
                   self_loops=bool(flags & 1), corruption_id=flags >> 8)
