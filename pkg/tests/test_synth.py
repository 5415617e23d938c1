import numpy as np

from hopgd.graph import homophily_ratio, save_bundle
from hopgd.synth import citeseer_desk, cora_desk, sbm_bundle


def test_cora_desk_matches_published_shape(cora_bundle):
    assert cora_bundle.num_nodes == 2708
    assert cora_bundle.feature_dim == 1433
    assert cora_bundle.num_classes == 7
    assert len(cora_bundle.edges) == 2 * 5278
    assert abs(homophily_ratio(cora_bundle) - 0.81) <= 0.01
    assert (cora_bundle.degrees() > 0).all()
    assert cora_bundle.splits["train"].size == 140       # 20 per class
    assert cora_bundle.splits["val"].size == 500
    assert cora_bundle.splits["test"].size == 1000


def test_citeseer_desk_matches_published_shape():
    bundle = citeseer_desk(seed=0)
    assert bundle.num_nodes == 3327
    assert bundle.feature_dim == 3703
    assert bundle.num_classes == 6
    assert abs(homophily_ratio(bundle) - 0.74) <= 0.01
    assert bundle.splits["train"].size == 120


def test_generation_deterministic(tmp_path):
    a = sbm_bundle(seed=7)
    b = sbm_bundle(seed=7)
    assert np.array_equal(a.edges, b.edges)
    assert a.features.tobytes() == b.features.tobytes()
    save_bundle(a, tmp_path / "a")
    save_bundle(b, tmp_path / "b")
    for name in ("meta.json", "edges.tsv", "features.bin", "labels.tsv",
                 "splits.json"):
        assert (tmp_path / "a" / name).read_bytes() == \
               (tmp_path / "b" / name).read_bytes()
    assert not np.array_equal(sbm_bundle(seed=8).edges, a.edges)


def test_sbm_homophily_regimes():
    homo = sbm_bundle(seed=0)
    hetero = sbm_bundle(p_in=0.005, p_out=0.1, seed=0)
    assert homophily_ratio(homo) > 0.8
    assert homophily_ratio(hetero) < 0.2


def test_features_are_sparse_binary_bags(cora_bundle):
    feats = cora_bundle.features
    assert set(np.unique(feats)).issubset({0.0, 1.0})
    words_per_row = feats.sum(axis=1)
    assert 5 < words_per_row.mean() < 40
