"""Graph bundle loading, validation, normalized adjacency, and structure labels.

A bundle is a directory:

    meta.json      num_nodes, feature_dim, num_classes (int or null), dtype ("f32")
    edges.tsv      one "src<TAB>dst" pair per line, 0-indexed
    features.bin   little-endian f32, row-major, N*d values, no header
    labels.tsv     optional, one class index per line
    splits.json    optional, {"train": [...], "val": [...], "test": [...]}

Edge lists are treated as undirected: on load each edge is stored in both
directions and duplicates collapse. Self-loop input edges are dropped with
a warning; self-loops enter only through the propagation operator.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DataError

SPLIT_NAMES = ("train", "val", "test")


@dataclass
class GraphBundle:
    """An in-memory dataset: topology, features, optional labels and splits."""

    num_nodes: int
    edges: np.ndarray            # (E, 2) int64, symmetrized directed pairs, sorted, unique
    features: np.ndarray         # (N, d) float32
    labels: np.ndarray | None = None       # (N,) int64
    splits: dict[str, np.ndarray] | None = None
    num_classes: int | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def validate(self) -> None:
        n = self.num_nodes
        if n <= 0:
            raise DataError(f"num_nodes must be positive, got {n}")
        if self.features.shape[0] != n:
            raise DataError(
                f"row count mismatch: meta says {n} nodes, "
                f"features has {self.features.shape[0]} rows")
        if self.features.ndim != 2 or self.features.shape[1] < 1:
            raise DataError("features must be a 2-d matrix with at least one column")
        if not np.isfinite(self.features).all():
            raise DataError("non-finite feature value")
        if self.edges.size and (self.edges.min() < 0 or self.edges.max() >= n):
            raise DataError(f"edge index out of range [0, {n})")
        if self.labels is not None:
            if len(self.labels) != n:
                raise DataError("row count mismatch between labels and meta")
            if self.labels.min() < 0:
                raise DataError("negative class label")
            if self.num_classes is not None and self.labels.max() >= self.num_classes:
                raise DataError("label index out of range")
        if self.splits is not None:
            seen: set[int] = set()
            for name in SPLIT_NAMES:
                idx = self.splits.get(name, np.empty(0, np.int64))
                if idx.size and (idx.min() < 0 or idx.max() >= n):
                    raise DataError(f"split '{name}' index out of range [0, {n})")
                overlap = seen.intersection(idx.tolist())
                if overlap:
                    raise DataError(f"splits overlap at node {min(overlap)}")
                seen.update(idx.tolist())

    def degrees(self) -> np.ndarray:
        """Raw degree of each node (self-loops excluded by construction)."""
        deg = np.zeros(self.num_nodes, dtype=np.int64)
        if self.edges.size:
            np.add.at(deg, self.edges[:, 0], 1)
        return deg

    def graph_hash(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.num_nodes).encode())
        h.update(np.ascontiguousarray(self.edges, dtype=np.int64).tobytes())
        return h.hexdigest()

    def features_hash(self) -> str:
        return hashlib.sha256(
            np.ascontiguousarray(self.features, dtype=np.float32).tobytes()).hexdigest()


def _symmetrize(pairs: np.ndarray, warnings: list[str]) -> np.ndarray:
    """Dedup, drop self-loops, and store each undirected edge both ways."""
    if pairs.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    loops = pairs[:, 0] == pairs[:, 1]
    if loops.any():
        warnings.append(f"dropped {int(loops.sum())} self-loop edge(s)")
        pairs = pairs[~loops]
    both = np.concatenate([pairs, pairs[:, ::-1]])
    uniq = np.unique(both, axis=0)
    # Inputs may store each edge once or in both directions; only a count
    # beyond the fully symmetrized size indicates true duplicates.
    if len(pairs) > len(uniq):
        warnings.append(f"collapsed {len(pairs) - len(uniq)} duplicate edge(s)")
    return uniq.astype(np.int64)


def load_bundle(path: str | Path) -> GraphBundle:
    """Load and validate a bundle directory.

    Raises DataError on a missing file, an out-of-range index, a row count
    mismatch, or a non-finite feature value.
    """
    root = Path(path)
    meta_path = root / "meta.json"
    if not meta_path.exists():
        raise DataError(f"missing file: {meta_path}")
    meta = json.loads(meta_path.read_text())
    for key in ("num_nodes", "feature_dim", "dtype"):
        if key not in meta:
            raise DataError(f"meta.json missing key '{key}'")
    if meta["dtype"] != "f32":
        raise DataError(f"unsupported dtype {meta['dtype']!r}, expected 'f32'")
    n, d = int(meta["num_nodes"]), int(meta["feature_dim"])
    num_classes = meta.get("num_classes")
    num_classes = int(num_classes) if num_classes is not None else None

    edges_path = root / "edges.tsv"
    if not edges_path.exists():
        raise DataError(f"missing file: {edges_path}")
    if edges_path.stat().st_size > 0:
        try:
            pairs = np.loadtxt(edges_path, dtype=np.int64, ndmin=2)
        except ValueError as exc:
            raise DataError(f"edges.tsv is malformed: {exc}") from exc
        if pairs.shape[1] != 2:
            raise DataError("edges.tsv is malformed: expected two columns")
    else:
        pairs = np.empty((0, 2), dtype=np.int64)

    feat_path = root / "features.bin"
    if not feat_path.exists():
        raise DataError(f"missing file: {feat_path}")
    blob = np.fromfile(feat_path, dtype="<f4")
    if blob.size != n * d:
        raise DataError(
            f"row count mismatch: features.bin holds {blob.size} values, "
            f"meta implies {n}*{d}={n * d}")
    features = blob.reshape(n, d)

    labels = None
    labels_path = root / "labels.tsv"
    if labels_path.exists():
        labels = np.loadtxt(labels_path, dtype=np.int64, ndmin=1)

    splits = None
    splits_path = root / "splits.json"
    if splits_path.exists():
        raw_splits = json.loads(splits_path.read_text())
        splits = {name: np.asarray(raw_splits.get(name, []), dtype=np.int64)
                  for name in SPLIT_NAMES}

    warnings: list[str] = []
    bundle = GraphBundle(
        num_nodes=n,
        edges=_symmetrize(pairs, warnings),
        features=features,
        labels=labels,
        splits=splits,
        num_classes=num_classes,
        warnings=warnings,
    )
    bundle.validate()
    return bundle


def save_bundle(bundle: GraphBundle, path: str | Path) -> Path:
    """Write a bundle directory in the on-disk layout (directed edge entries)."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    meta = {
        "num_nodes": bundle.num_nodes,
        "feature_dim": bundle.feature_dim,
        "num_classes": bundle.num_classes,
        "dtype": "f32",
    }
    (root / "meta.json").write_text(json.dumps(meta, indent=1) + "\n")
    with open(root / "edges.tsv", "w") as f:
        for u, v in bundle.edges:
            f.write(f"{u}\t{v}\n")
    np.ascontiguousarray(bundle.features, dtype="<f4").tofile(root / "features.bin")
    if bundle.labels is not None:
        with open(root / "labels.tsv", "w") as f:
            f.write("\n".join(str(int(c)) for c in bundle.labels) + "\n")
    if bundle.splits is not None:
        payload = {k: [int(i) for i in v] for k, v in bundle.splits.items()}
        (root / "splits.json").write_text(json.dumps(payload) + "\n")
    return root


@dataclass
class SparseAdj:
    """Symmetrically normalized adjacency in CSR form.

    Stored values follow 1/sqrt(deg(i)*deg(j)) over the effective adjacency
    (the raw one, or raw plus identity when built with self-loops). The raw
    degree vector is kept for structure labels.
    """

    matrix: sp.csr_matrix        # float64 values
    self_loops: bool
    raw_degrees: np.ndarray      # (N,) int64, degrees before self-loops
    _f32: sp.csr_matrix | None = None

    @property
    def num_nodes(self) -> int:
        return self.matrix.shape[0]

    def as_dtype(self, dtype) -> sp.csr_matrix:
        if np.dtype(dtype) == np.float64:
            return self.matrix
        if self._f32 is None:
            self._f32 = self.matrix.astype(np.float32)
        return self._f32


def normalize_adjacency(bundle: GraphBundle, self_loops: bool = True) -> SparseAdj:
    """Build D^{-1/2} A D^{-1/2} over the effective (optionally self-looped) adjacency.

    Isolated nodes with self_loops=False produce all-zero rows; with
    self_loops=True they keep a unit diagonal entry.
    """
    n = bundle.num_nodes
    raw_deg = bundle.degrees()
    rows, cols = bundle.edges[:, 0], bundle.edges[:, 1]
    if self_loops:
        rows = np.concatenate([rows, np.arange(n)])
        cols = np.concatenate([cols, np.arange(n)])
        eff_deg = raw_deg + 1
    else:
        eff_deg = raw_deg
    dinv = np.zeros(n, dtype=np.float64)
    nz = eff_deg > 0
    dinv[nz] = 1.0 / np.sqrt(eff_deg[nz])
    vals = dinv[rows] * dinv[cols]
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    mat.sort_indices()
    return SparseAdj(matrix=mat, self_loops=self_loops, raw_degrees=raw_deg)


@dataclass
class StructureLabels:
    """Per-node relative degree and its binary thresholding at 1."""

    relative_degree: np.ndarray   # (N,) float64
    degree_label: np.ndarray      # (N,) uint8, 1 where relative_degree > 1


def relative_degrees(bundle: GraphBundle) -> StructureLabels:
    """Relative degree: mean over neighbors j of sqrt(deg_i / deg_j).

    Computed on raw degrees. Isolated nodes get the neutral value 1
    (empty neighbor sum), which thresholds to label 0.
    """
    deg = bundle.degrees().astype(np.float64)
    n = bundle.num_nodes
    rbar = np.ones(n, dtype=np.float64)
    if bundle.edges.size:
        src, dst = bundle.edges[:, 0], bundle.edges[:, 1]
        inv_sqrt_nbr = np.zeros(n, dtype=np.float64)
        np.add.at(inv_sqrt_nbr, src, 1.0 / np.sqrt(deg[dst]))
        nz = deg > 0
        rbar[nz] = inv_sqrt_nbr[nz] / np.sqrt(deg[nz])
    label = (rbar > 1.0).astype(np.uint8)
    return StructureLabels(relative_degree=rbar, degree_label=label)


def homophily_ratio(bundle: GraphBundle) -> float:
    """Fraction of (directed) edges whose endpoints share a label."""
    if bundle.labels is None:
        raise DataError("homophily ratio requires labels")
    if bundle.edges.size == 0:
        raise DataError("homophily ratio requires at least one edge")
    y = bundle.labels
    same = y[bundle.edges[:, 0]] == y[bundle.edges[:, 1]]
    return float(same.mean())
