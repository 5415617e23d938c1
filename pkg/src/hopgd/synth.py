"""Deterministic synthetic graph bundles.

Two families:

  * stochastic block models with Gaussian block features, used by the
    hop-separation diagnostic and property tests (a homophilous and a
    heterophilous variant);
  * citation-style benchmarks that mirror the coarse statistics of the
    classic desk-scale datasets (node/edge counts, feature dimension,
    class count, homophily, degree skew, bag-of-words sparsity) so the
    whole pipeline can be exercised without any external download.

All draws derive from the given seed; the same call always produces the
same bundle byte-for-byte.
"""

from __future__ import annotations

import numpy as np

from . import rng as rng_streams
from .errors import DataError
from .graph import GraphBundle


def _split_indices(rng: np.random.Generator, per_class_train: int,
                   val_size: int, test_size: int,
                   y: np.ndarray, classes: int) -> dict[str, np.ndarray]:
    train = np.concatenate([
        rng.choice(np.nonzero(y == c)[0], per_class_train, replace=False)
        for c in range(classes)])
    rest = np.setdiff1d(np.arange(len(y)), train)
    rest = rng.permutation(rest)
    return {"train": np.sort(train),
            "val": np.sort(rest[:val_size]),
            "test": np.sort(rest[val_size:val_size + test_size])}


def sbm_bundle(num_nodes: int = 200, p_in: float = 0.1, p_out: float = 0.005,
               feature_dim: int = 16, noise: float = 1.0,
               seed: int = 0) -> GraphBundle:
    """Two-block SBM with Gaussian block-mean features.

    p_in > p_out gives a homophilous graph; swapping them gives the
    heterophilous mirror. Labels are the block ids.
    """
    rng = rng_streams.stream(seed, rng_streams.SYNTH, 10)
    half = num_nodes // 2
    blocks = np.repeat([0, 1], [half, num_nodes - half])
    prob = np.where(blocks[:, None] == blocks[None, :], p_in, p_out)
    upper = np.triu(rng.random((num_nodes, num_nodes)) < prob, k=1)
    r, c = np.nonzero(upper)
    pairs = np.stack([r, c], axis=1)
    edges = np.unique(np.concatenate([pairs, pairs[:, ::-1]]), axis=0)
    means = rng.normal(0.0, 1.0, (2, feature_dim))
    feats = (means[blocks] + noise * rng.normal(0.0, 1.0, (num_nodes, feature_dim)))
    tenth = num_nodes // 10
    order = rng.permutation(num_nodes)
    splits = {"train": np.sort(order[:tenth]),
              "val": np.sort(order[tenth:2 * tenth]),
              "test": np.sort(order[2 * tenth:])}
    bundle = GraphBundle(num_nodes=num_nodes, edges=edges.astype(np.int64),
                         features=feats.astype(np.float32),
                         labels=blocks.astype(np.int64), splits=splits,
                         num_classes=2)
    bundle.validate()
    return bundle


def _citation_edges(rng: np.random.Generator, y: np.ndarray, classes: int,
                    fracs: np.ndarray, num_undirected: int, homophily: float,
                    degree_skew: float = 2.5, communities_per_class: int = 2,
                    community_purity: float = 0.82,
                    cross_community: float = 0.08) -> np.ndarray:
    """Sample a fixed quota of same-class and cross-class undirected edges.

    Edges concentrate inside latent communities whose label purity is
    community_purity, so deep propagation collapses nodes onto mixed-label
    community means: per-hop class quality peaks at a small radius and
    degrades beyond it, like the real citation benchmarks. The same/cross
    class-edge quota is exact, so the measured label homophily hits the
    target regardless of the community layout. Endpoint propensities are
    Pareto-skewed (hub-heavy degree profile).
    """
    n = len(y)
    n_comm = classes * communities_per_class
    home = y * communities_per_class + rng.integers(0, communities_per_class, n)
    comm = np.where(rng.random(n) < community_purity, home,
                    rng.integers(0, n_comm, n))
    weight = rng.pareto(degree_skew, n) + 1.0

    def pool_weights(idx: np.ndarray) -> np.ndarray:
        w = weight[idx]
        return w / w.sum()

    by_class = [np.nonzero(y == c)[0] for c in range(classes)]
    for c, idx in enumerate(by_class):
        if len(idx) < 2:
            raise DataError(f"class {c} has fewer than 2 nodes")
    # candidate pools: (community, same-class) and (community, cross-class)
    comm_members = [np.nonzero(comm == g)[0] for g in range(n_comm)]
    n_same = int(round(homophily * num_undirected))
    n_diff = num_undirected - n_same
    if num_undirected < n:
        raise DataError("need at least one edge per node")
    edges: set[tuple[int, int]] = set()
    quota = {True: n_same, False: n_diff}

    def add_edge(u: int, v: int, same: bool) -> bool:
        key = (min(u, v), max(u, v))
        if u == v or key in edges:
            return False
        edges.add(key)
        quota[same] -= 1
        return True

    def draw_partner(u: int, same: bool) -> int:
        local = rng.random() >= cross_community
        if same:
            pool = comm_members[comm[u]] if local else by_class[y[u]]
            pool = pool[y[pool] == y[u]]
        else:
            pool = comm_members[comm[u]] if local else np.arange(n)
            pool = pool[y[pool] != y[u]]
        if pool.size == 0:
            pool = by_class[y[u]] if same else np.nonzero(y != y[u])[0]
        return int(rng.choice(pool, p=pool_weights(pool)))

    def draw_one(u: int | None = None) -> tuple[int, int, bool]:
        same = rng.random() < quota[True] / (quota[True] + quota[False])
        if u is None:
            u = int(rng.choice(n, p=pool_weights(np.arange(n))))
        return u, draw_partner(u, same), same

    # First pass guarantees minimum degree 1, spending the same/cross quota
    # proportionally so the target homophily stays exact.
    touched = np.zeros(n, dtype=bool)
    for u in rng.permutation(n):
        if touched[u]:
            continue
        while True:
            u0, v, same = draw_one(int(u))
            if add_edge(u0, v, same):
                touched[u0] = touched[v] = True
                break
    while quota[True] + quota[False] > 0:
        u, v, same = draw_one()
        if quota[same] > 0:
            add_edge(u, v, same)

    pairs = np.array(sorted(edges), dtype=np.int64)
    return np.unique(np.concatenate([pairs, pairs[:, ::-1]]), axis=0)


def _bag_of_words(rng: np.random.Generator, y: np.ndarray, dim: int,
                  classes: int, topic_alpha: float, signal: float,
                  words_per_doc: int) -> np.ndarray:
    """Binary bag-of-words: Zipf-popular vocabulary, one Dirichlet topic per
    class, documents drawn from a signal/background mixture."""
    ranks = rng.permutation(dim) + 1
    background = 1.0 / ranks**0.8
    background /= background.sum()
    topics = rng.dirichlet(topic_alpha * dim * background, size=classes)
    feats = np.zeros((len(y), dim), dtype=np.float32)
    for i in range(len(y)):
        mix = signal * topics[y[i]] + (1.0 - signal) * background
        count = max(2, int(rng.poisson(words_per_doc)))
        words = rng.choice(dim, size=min(count, dim), replace=False, p=mix)
        feats[i, words] = 1.0
    return feats


def citation_bundle(num_nodes: int, feature_dim: int, classes: int,
                    class_fracs: list[float], num_undirected: int,
                    homophily: float, topic_alpha: float, signal: float,
                    words_per_doc: int, per_class_train: int = 20,
                    val_size: int = 500, test_size: int = 1000,
                    communities_per_class: int = 2,
                    community_purity: float = 0.82,
                    cross_community: float = 0.08,
                    seed: int = 0) -> GraphBundle:
    rng = rng_streams.stream(seed, rng_streams.SYNTH, 20)
    fracs = np.asarray(class_fracs, dtype=np.float64)
    fracs = fracs / fracs.sum()
    y = rng.choice(classes, size=num_nodes, p=fracs)
    edges = _citation_edges(rng, y, classes, fracs, num_undirected, homophily,
                            communities_per_class=communities_per_class,
                            community_purity=community_purity,
                            cross_community=cross_community)
    feats = _bag_of_words(rng, y, feature_dim, classes, topic_alpha,
                          signal, words_per_doc)
    splits = _split_indices(rng, per_class_train, val_size, test_size, y, classes)
    bundle = GraphBundle(num_nodes=num_nodes, edges=edges, features=feats,
                         labels=y.astype(np.int64), splits=splits,
                         num_classes=classes)
    bundle.validate()
    return bundle


# Desk-scale stand-ins matching the published dataset statistics.
def cora_desk(seed: int = 0) -> GraphBundle:
    return citation_bundle(
        num_nodes=2708, feature_dim=1433, classes=7,
        class_fracs=[351, 217, 418, 818, 426, 298, 180],
        num_undirected=5278, homophily=0.81,
        topic_alpha=0.2, signal=0.33, words_per_doc=18, seed=seed)


def citeseer_desk(seed: int = 0) -> GraphBundle:
    return citation_bundle(
        num_nodes=3327, feature_dim=3703, classes=6,
        class_fracs=[596, 249, 701, 668, 590, 508],
        num_undirected=4552, homophily=0.74,
        topic_alpha=0.2, signal=0.5, words_per_doc=32, seed=seed)


DESK_BUNDLES = {"cora-desk": cora_desk, "citeseer-desk": citeseer_desk}


def make_desk_bundle(name: str, seed: int = 0) -> GraphBundle:
    if name in DESK_BUNDLES:
        return DESK_BUNDLES[name](seed)
    if name == "sbm-homophilous":
        return sbm_bundle(seed=seed)
    if name == "sbm-heterophilous":
        return sbm_bundle(p_in=0.005, p_out=0.1, seed=seed)
    raise DataError(
        f"unknown synthetic bundle '{name}'; expected one of "
        f"{sorted(DESK_BUNDLES) + ['sbm-homophilous', 'sbm-heterophilous']}")
