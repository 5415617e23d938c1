import numpy as np
import pytest

from conftest import random_bundle
from instances import make_instance
from oracles import composite_loss_loop, finite_difference_grads

from hopgd import rng as rng_streams
from hopgd.errors import DataError
from hopgd.graph import normalize_adjacency, relative_degrees
from hopgd.losses import (EpochBatch, LossWeights, assemble_epoch_batch,
                          backward, forward, hop_label, sagd_loss,
                          view_sample_counts)
from hopgd.nn import init_model
from hopgd.perturb import corrupt, draw_mask
from hopgd.views import propagate

LN2 = float(np.log(2.0))


def test_hop_label_thresholds():
    assert hop_label(1, 2) == 0.0 and hop_label(2, 2) == 1.0
    assert hop_label(3, 5) == 1.0            # 3 > 2.5
    assert hop_label(2, 5) == 0.0
    assert hop_label(1, 1) == 1.0            # moot: hop loss is off when K == 1
    with pytest.raises(DataError):
        hop_label(3, 2)


def test_hop_label_soft_mode():
    assert hop_label(1, 5, "soft") == 0.0
    assert hop_label(5, 5, "soft") == 1.0
    assert hop_label(3, 5, "soft") == pytest.approx(0.5)


def test_view_sample_counts():
    assert view_sample_counts(4, 2) == [2, 2]
    assert view_sample_counts(5, 2) == [3, 2]
    assert view_sample_counts(2708, 2) == [1354, 1354]
    assert sum(view_sample_counts(2708, 2)) == 2708


def _tiny_setup(seed=0, n=10, d=4, hops=2, dtype=np.float64):
    rng = np.random.default_rng(seed)
    bundle = random_bundle(rng, n, edge_prob=0.35, dim=d)
    adj = normalize_adjacency(bundle, True)
    feats = bundle.features.astype(dtype)
    pos = propagate(adj, feats, hops)
    _, neg = corrupt(adj, feats, hops, rng)
    labels = relative_degrees(bundle)
    batch = assemble_epoch_batch(pos, neg, labels, rng)
    model = init_model(d, 3, hops, rng_streams.stream(seed, 1),
                       rng_streams.stream(seed, 2), dtype=dtype)
    return bundle, batch, model, labels, pos, neg


def test_batch_structure_and_pairing():
    bundle, batch, model, labels, pos, neg = _tiny_setup(n=10, hops=2)
    assert batch.size == 20
    half = 10
    assert batch.y_group[:half].sum() == half
    assert batch.y_group[half:].sum() == 0
    # paired rows share node and hop
    assert np.array_equal(batch.node_idx[:half], batch.node_idx[half:])
    assert np.array_equal(batch.hop[:half], batch.hop[half:])
    # degree labels come from node position, identical across the pair
    assert np.array_equal(batch.y_degree[:half], batch.y_degree[half:])
    expected = labels.degree_label[batch.node_idx[:half]]
    assert np.array_equal(batch.y_degree[:half].astype(np.uint8), expected)
    # within a view, sampled nodes are distinct
    for k in (1, 2):
        nodes_k = batch.node_idx[:half][batch.hop[:half] == k]
        assert len(set(nodes_k.tolist())) == len(nodes_k)


def test_batch_rows_match_views():
    _, batch, _, _, pos, neg = _tiny_setup(n=8, hops=2)
    half = 8
    for j in range(half):
        k, node = int(batch.hop[j]), int(batch.node_idx[j])
        assert np.array_equal(batch.rows[j], pos.hop(k)[node])
        assert np.array_equal(batch.rows[half + j], neg.hop(k)[node])


def test_batch_needs_enough_nodes():
    bundle, _, _, labels, pos, neg = _tiny_setup(n=10, hops=2)
    with pytest.raises(DataError, match="at least"):
        assemble_epoch_batch(pos, neg, labels, np.random.default_rng(0),
                             active_hops=list(range(1, 12)))


def test_zeroed_projectors_give_log2_components():
    _, batch, model, *_ = _tiny_setup(hops=2)
    for name in ("gd", "deg", "hop"):
        w, b = model.head(name)
        w[:] = 0.0
        b[:] = 0.0
    weights = LossWeights(alpha=1.0, beta=0.01, gamma=0.05)
    parts = sagd_loss(batch, model, weights)
    assert parts.gd == pytest.approx(LN2, abs=1e-12)
    assert parts.hop == pytest.approx(LN2, abs=1e-12)
    assert parts.degree == pytest.approx(LN2, abs=1e-12)
    assert parts.total == pytest.approx(1.06 * LN2, abs=1e-12)
    assert parts.total == pytest.approx(0.7345, abs=5e-4)


def test_beta_gamma_zero_is_pure_group_discrimination():
    _, batch, model, *_ = _tiny_setup(hops=2)
    weights = LossWeights(alpha=0.7, beta=0.0, gamma=0.0)
    parts = sagd_loss(batch, model, weights)
    assert parts.total == pytest.approx(0.7 * parts.gd, abs=1e-15)
    assert parts.hop == 0.0


def test_hop_loss_disabled_when_single_hop():
    _, batch, model, *_ = _tiny_setup(hops=1)
    weights = LossWeights(alpha=1.0, beta=0.9, gamma=0.05)
    parts = sagd_loss(batch, model, weights)
    assert parts.hop == 0.0
    assert parts.total == pytest.approx(parts.gd + 0.05 * parts.degree, abs=1e-12)


def test_loss_decomposition_exact():
    for seed in range(5):
        model, batch, weights = make_instance(seed)
        parts = sagd_loss(batch, model, weights)
        recomposed = (weights.alpha * parts.gd + weights.beta * parts.hop
                      + weights.gamma * parts.degree)
        assert abs(parts.total - recomposed) < 1e-12


def test_matches_literal_scalar_loop_oracle():
    for seed in range(6):
        model, batch, weights = make_instance(seed, num_nodes=8, dim=4)
        parts = sagd_loss(batch, model, weights)
        total, l_gd, l_hop, l_deg = composite_loss_loop(
            model, batch.rows, batch.hop, batch.y_group, batch.y_degree,
            batch.y_hop, model.lam(), weights.alpha, weights.beta,
            weights.gamma, batch.hops)
        assert abs(parts.total - total) < 1e-10
        assert abs(parts.gd - l_gd) < 1e-10
        assert abs(parts.hop - l_hop) < 1e-10
        assert abs(parts.degree - l_deg) < 1e-10


def test_identity_corruption_paired_bce_floor():
    # with identity permutation and no masking, paired rows are identical,
    # so per-pair group-discrimination BCE is at least ln 2 by convexity
    rng = np.random.default_rng(3)
    bundle = random_bundle(rng, 12, edge_prob=0.3, dim=5)
    adj = normalize_adjacency(bundle, True)
    feats = bundle.features.astype(np.float64)
    pos = propagate(adj, feats, 2)

    class IdentityRng:
        def permutation(self, n):
            return np.arange(n)

    _, neg = corrupt(adj, feats, 2, IdentityRng())
    labels = relative_degrees(bundle)
    batch = assemble_epoch_batch(pos, neg, labels, rng)
    model = init_model(5, 4, 2, rng_streams.stream(9, 1),
                       rng_streams.stream(9, 2), dtype=np.float64)
    _, cache = forward(model, batch, LossWeights())
    z = cache["logits"]["gd"]
    half = batch.size // 2
    assert np.array_equal(z[:half], z[half:])
    per_pair = 0.5 * (np.logaddexp(0, -z[:half]) + np.logaddexp(0, z[half:]))
    assert per_pair.mean() >= 0.693146


def test_zero_weights_give_exactly_zero_gradients():
    model, batch, _ = make_instance(0)
    weights = LossWeights(alpha=0.0, beta=0.0, gamma=0.0)
    _, cache = forward(model, batch, weights)
    grads = backward(model, batch, cache)
    for name, grad in grads.items():
        assert np.all(grad == 0.0), name


def test_gradients_match_finite_differences():
    for seed in range(4):
        model, batch, weights = make_instance(seed)
        _, cache = forward(model, batch, weights)
        grads = backward(model, batch, cache)

        def loss_fn():
            return forward(model, batch, weights)[0].total

        fd = finite_difference_grads(loss_fn, model.params())
        for name in grads:
            ours, ref = grads[name], fd[name]
            err = np.abs(ours - ref) / np.maximum(1.0, np.abs(ref))
            assert err.max() < 1e-6, f"{name}: {err.max():.2e}"


def test_ascent_reduces_weight_on_perfectly_separating_view():
    # view 2 classifies the groups perfectly; the loss-maximizing step must
    # move weight away from it (verified against finite differences)
    rng = np.random.default_rng(0)
    d, hidden = 3, 4
    model = init_model(d, hidden, 2, rng_streams.stream(0, 1),
                       rng_streams.stream(0, 2), dtype=np.float64)
    direction = model.enc_w @ model.gd_w.sum(1)
    direction /= np.linalg.norm(direction)
    rows = np.array([rng.normal(0, 0.1, d), 3 * direction,
                     rng.normal(0, 0.1, d), -3 * direction])
    batch = EpochBatch(rows=rows, node_idx=np.array([0, 1, 0, 1]),
                       hop=np.array([1, 2, 1, 2]),
                       y_group=np.array([1.0, 1.0, 0.0, 0.0]),
                       y_degree=np.zeros(4), y_hop=np.array([0.0, 1.0, 0.0, 1.0]),
                       hops=2)
    weights = LossWeights(alpha=1.0, beta=0.0, gamma=0.0)
    parts, cache = forward(model, batch, weights)
    z = cache["logits"]["gd"]
    assert z[1] > 1.0 and z[3] < -1.0          # separating view, low loss
    grads = backward(model, batch, cache, need_theta=False)

    def loss_fn():
        return forward(model, batch, weights)[0].total

    fd = finite_difference_grads(loss_fn, {"lam_logits": model.lam_logits})
    err = np.abs(grads["lam_logits"] - fd["lam_logits"])
    assert err.max() < 1e-9
    assert grads["lam_logits"][1] < 0          # ascent decreases lambda_2
