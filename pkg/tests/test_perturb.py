import numpy as np
import pytest

from conftest import make_bundle, random_bundle
from oracles import dense_hop_views, dense_normalized_adjacency

from hopgd.errors import ConfigError, StaleCacheError
from hopgd.graph import normalize_adjacency
from hopgd.perturb import (apply_mask, build_pool, corrupt, draw_mask,
                           load_pool, save_pool)
from hopgd.views import compute_manifest, propagate


def test_mask_extremes():
    rng = np.random.default_rng(0)
    all_kept = draw_mask(50, 0.0, rng)
    assert np.all(all_kept.mask == 1.0)
    all_dropped = draw_mask(50, 1.0, rng)
    assert np.all(all_dropped.mask == 0.0)


def test_mask_kept_fraction_large_dim():
    rng = np.random.default_rng(1)
    spec = draw_mask(100_000, 0.2, rng)
    assert abs(spec.mask.mean() - 0.8) < 0.01


def test_mask_probability_validated():
    rng = np.random.default_rng(0)
    with pytest.raises(ConfigError):
        draw_mask(4, -0.1, rng)
    with pytest.raises(ConfigError):
        draw_mask(4, 1.5, rng)


def test_apply_mask_identity_and_zero_column(path3):
    adj = normalize_adjacency(path3, True)
    views = propagate(adj, path3.features, 2)
    ones = draw_mask(3, 0.0, np.random.default_rng(0))
    unchanged = apply_mask(views, ones)
    for k in (1, 2):
        assert np.array_equal(unchanged.hop(k), views.hop(k))
    spec = ones
    spec.mask = np.array([0, 1, 1], dtype=np.float32)
    masked = apply_mask(views, spec)
    for k in (1, 2):
        col = masked.hop(k)[:, 0]
        assert np.all(col == 0.0)
        assert not np.signbit(col).any()      # exact +0.0, not -0.0


def test_apply_mask_equals_propagating_masked_features():
    rng = np.random.default_rng(3)
    bundle = random_bundle(rng, 30, dim=8)
    adj = normalize_adjacency(bundle, True)
    spec = draw_mask(8, 0.5, rng)
    cached = apply_mask(propagate(adj, bundle.features, 3), spec)
    masked_feats = bundle.features.copy()
    masked_feats[:, spec.mask == 0.0] = 0.0
    scratch = propagate(adj, masked_feats, 3)
    for k in range(1, 4):
        assert cached.hop(k).tobytes() == scratch.hop(k).tobytes()


def test_corrupt_preserves_row_multiset():
    rng = np.random.default_rng(5)
    bundle = random_bundle(rng, 25, dim=6)
    adj = normalize_adjacency(bundle, True)
    perm, _ = corrupt(adj, bundle.features, 2, rng)
    corrupted = bundle.features[perm]
    ours = np.sort(corrupted, axis=0)
    original = np.sort(bundle.features, axis=0)
    assert np.array_equal(ours, original)


def test_identity_permutation_degenerate(monkeypatch, path3):
    adj = normalize_adjacency(path3, True)

    class FixedRng:
        def permutation(self, n):
            return np.arange(n)

    _, neg = corrupt(adj, path3.features, 2, FixedRng())
    pos = propagate(adj, path3.features, 2)
    for k in (1, 2):
        assert np.array_equal(neg.hop(k), pos.hop(k))


def test_two_node_swap_with_identity_operator():
    bundle = make_bundle(2, [])          # no edges; self-loops make A_hat = I
    adj = normalize_adjacency(bundle, True)

    class SwapRng:
        def permutation(self, n):
            return np.array([1, 0])

    _, neg = corrupt(adj, bundle.features, 1, SwapRng())
    assert np.array_equal(neg.hop(1), bundle.features[[1, 0]])


def test_corrupted_views_match_dense_oracle():
    rng = np.random.default_rng(8)
    bundle = random_bundle(rng, 32, dim=5)
    undirected = {(min(u, v), max(u, v)) for u, v in bundle.edges}
    adj = normalize_adjacency(bundle, True)
    perm, neg = corrupt(adj, bundle.features, 3, rng)
    dense = dense_normalized_adjacency(32, undirected, True)
    oracle = dense_hop_views(dense, bundle.features[perm].astype(np.float64), 3)
    for k in range(1, 4):
        assert np.abs(neg.hop(k) - oracle[k - 1]).max() < 1e-5


def test_corruption_does_not_commute_with_propagation():
    rng = np.random.default_rng(10)
    bundle = random_bundle(rng, 20, dim=4, edge_prob=0.3)
    adj = normalize_adjacency(bundle, True)
    perm = rng.permutation(20)
    mat = adj.as_dtype(np.float32)
    corrupted_then_prop = mat @ bundle.features[perm]
    prop_then_corrupted = (mat @ bundle.features)[perm]
    assert np.linalg.norm(corrupted_then_prop - prop_then_corrupted) > 1e-3


def test_pool_reproducible_and_entries_independent(path3):
    rng = np.random.default_rng(0)
    bundle = random_bundle(rng, 40, dim=6)
    adj = normalize_adjacency(bundle, True)
    pool_a = build_pool(bundle, adj, 2, size=4, master_seed=123)
    pool_b = build_pool(bundle, adj, 2, size=4, master_seed=123)
    for pa, pb in zip(pool_a.perms, pool_b.perms):
        assert np.array_equal(pa, pb)
    assert not np.array_equal(pool_a.perms[0], pool_a.perms[1])
    assert pool_a.entry(0) is pool_a.entries[0]
    assert pool_a.entry(5) is pool_a.entries[1]     # cycles modulo pool size


def test_pool_roundtrip_and_staleness(tmp_path):
    rng = np.random.default_rng(2)
    bundle = random_bundle(rng, 15, dim=4)
    adj = normalize_adjacency(bundle, True)
    pool = build_pool(bundle, adj, 2, size=3, master_seed=7)
    save_pool(pool, tmp_path / "pool")
    gh, fh = bundle.graph_hash(), bundle.features_hash()
    expected = [compute_manifest(gh, fh, 2, True, i + 1) for i in range(3)]
    loaded = load_pool(tmp_path / "pool", expected)
    for orig, back in zip(pool.entries, loaded.entries):
        for k in (1, 2):
            assert orig.hop(k).tobytes() == back.hop(k).tobytes()
    for orig_perm, back_perm in zip(pool.perms, loaded.perms):
        assert np.array_equal(orig_perm, back_perm)
    wrong = [compute_manifest(gh, "0" * 64, 2, True, i + 1) for i in range(3)]
    with pytest.raises(StaleCacheError):
        load_pool(tmp_path / "pool", wrong)
