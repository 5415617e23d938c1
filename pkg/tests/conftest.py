import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hopgd.graph import GraphBundle
from hopgd.synth import cora_desk


def make_bundle(num_nodes, undirected_edges, features=None, labels=None,
                splits=None, num_classes=None):
    """Build a validated in-memory bundle from an undirected edge list."""
    pairs = np.asarray(undirected_edges, dtype=np.int64).reshape(-1, 2)
    if pairs.size:
        edges = np.unique(np.concatenate([pairs, pairs[:, ::-1]]), axis=0)
    else:
        edges = np.empty((0, 2), dtype=np.int64)
    if features is None:
        features = np.eye(num_nodes, dtype=np.float32)
    bundle = GraphBundle(
        num_nodes=num_nodes, edges=edges,
        features=np.asarray(features, dtype=np.float32),
        labels=None if labels is None else np.asarray(labels, dtype=np.int64),
        splits=splits, num_classes=num_classes)
    bundle.validate()
    return bundle


def random_bundle(rng, num_nodes, edge_prob=0.15, dim=None):
    """Erdos-Renyi style bundle with random features."""
    dim = dim or max(2, num_nodes // 4)
    upper = np.triu(rng.random((num_nodes, num_nodes)) < edge_prob, k=1)
    r, c = np.nonzero(upper)
    edges = list(zip(r.tolist(), c.tolist()))
    feats = rng.normal(0, 1, (num_nodes, dim)).astype(np.float32)
    return make_bundle(num_nodes, edges, features=feats)


@pytest.fixture
def path3():
    """3-node path graph 0-1-2 with one-hot features."""
    return make_bundle(3, [(0, 1), (1, 2)])


@pytest.fixture
def star4():
    """4-node star: center 0, leaves 1..3."""
    return make_bundle(4, [(0, 1), (0, 2), (0, 3)])


@pytest.fixture(scope="session")
def cora_bundle():
    return cora_desk(seed=0)
