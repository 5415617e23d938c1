import json
import re

import numpy as np
import pytest

from hopgd.cli import main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A tiny bundle plus precomputed views, shared by the CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--name", "sbm-homophilous", "--seed", "3",
                 "--out", str(root / "bundle")]) == 0
    assert main(["precompute", "--bundle", str(root / "bundle"),
                 "--out", str(root / "views"),
                 "--hops", "2", "--pool_size", "2"]) == 0
    return root


def test_ingest_reports_and_writes_manifest(workdir, capsys):
    rc = main(["ingest", "--bundle", str(workdir / "bundle"),
               "--out", str(workdir / "ingest")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "num_nodes: 200" in out
    assert "0 warning(s)" in out
    manifest = json.loads((workdir / "ingest" / "run_manifest.json").read_text())
    assert manifest["command"] == "ingest"
    assert manifest["input_hashes"]["graph"]


def test_full_pipeline_through_cli(workdir, capsys):
    root = workdir
    rc = main(["train", "--bundle", str(root / "bundle"),
               "--views", str(root / "views"), "--out", str(root / "train"),
               "--hops", "2", "--pool_size", "2", "--hidden", "16",
               "--epochs", "6"])
    assert rc == 0
    assert (root / "train" / "model.ckpt").exists()
    assert (root / "train" / "metrics.jsonl").exists()
    assert (root / "train" / "train_curves.png").exists()
    assert (root / "train" / "run_manifest.json").exists()

    rc = main(["embed", "--ckpt", str(root / "train" / "model.ckpt"),
               "--views", str(root / "views"), "--bundle", str(root / "bundle"),
               "--out", str(root / "embed")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "sparse ops during inference: 0" in out

    rc = main(["probe", "--bundle", str(root / "bundle"),
               "--embeddings", str(root / "embed" / "embeddings.bin"),
               "--runs", "3", "--out", str(root / "probe")])
    assert rc == 0
    printed = capsys.readouterr().out.strip().splitlines()[-1]
    assert re.fullmatch(r"\d+\.\d±\d+\.\d", printed)
    assert (root / "probe" / "runs.tsv").read_text().startswith("run\taccuracy")

    rc = main(["diagnose", "--bundle", str(root / "bundle"),
               "--out", str(root / "diag"), "--max_hop", "3"])
    assert rc == 0
    report = json.loads((root / "diag" / "diagnostic.json").read_text())
    assert len(report["scores"]) == 4
    assert (root / "diag" / "separation.png").exists()


def test_embed_without_precompute_is_error(workdir, tmp_path, capsys):
    rc = main(["embed", "--ckpt", str(workdir / "train" / "model.ckpt"),
               "--views", str(tmp_path / "absent"),
               "--out", str(tmp_path / "e")])
    assert rc == 3
    assert "missing upstream artifact" in capsys.readouterr().err


def test_train_before_precompute_is_error(workdir, tmp_path, capsys):
    rc = main(["train", "--bundle", str(workdir / "bundle"),
               "--views", str(tmp_path / "never"),
               "--out", str(tmp_path / "t"), "--epochs", "2"])
    assert rc == 3
    assert "missing upstream artifact" in capsys.readouterr().err


def test_unknown_config_key_is_hard_error(workdir, tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("hidden = 16\nnot_a_key = 3\n")
    rc = main(["train", "--bundle", str(workdir / "bundle"),
               "--views", str(workdir / "views"), "--config", str(cfg),
               "--out", str(tmp_path / "t")])
    assert rc == 2
    assert "unknown key 'not_a_key'" in capsys.readouterr().err


def test_config_file_and_flag_precedence(workdir, tmp_path):
    cfg = tmp_path / "ok.cfg"
    cfg.write_text("# comment\nhidden = 8\nepochs = 3\npool_size = 2\n")
    out = tmp_path / "train"
    rc = main(["train", "--bundle", str(workdir / "bundle"),
               "--views", str(workdir / "views"), "--config", str(cfg),
               "--out", str(out), "--hidden", "16"])
    assert rc == 0
    manifest = json.loads((out / "run_manifest.json").read_text())
    assert manifest["config"]["hidden"] == 16       # flag beats file
    assert manifest["config"]["epochs"] == 3


def test_preset_values_resolved(workdir, tmp_path):
    out = tmp_path / "preset-run"
    rc = main(["train", "--bundle", str(workdir / "bundle"),
               "--views", str(workdir / "views"), "--preset", "cora",
               "--out", str(out), "--epochs", "2", "--pool_size", "2"])
    assert rc == 0
    manifest = json.loads((out / "run_manifest.json").read_text())
    assert manifest["config"]["hidden"] == 512
    assert manifest["config"]["hops"] == 2
    assert manifest["config"]["lr_theta"] == 1e-3
    assert manifest["config"]["alpha"] == 1.0
    assert manifest["config"]["beta"] == 0.01
    assert manifest["config"]["gamma"] == 0.05


def test_synth_outputs_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["synth", "--name", "sbm-heterophilous", "--seed", "5",
                     "--out", str(tmp_path / name)]) == 0
    for fname in ("edges.tsv", "features.bin", "labels.tsv", "splits.json"):
        assert (tmp_path / "a" / fname).read_bytes() == \
               (tmp_path / "b" / fname).read_bytes()


def test_stale_views_rejected(workdir, tmp_path, capsys):
    # re-synth the bundle with a different seed, then reuse old views
    assert main(["synth", "--name", "sbm-homophilous", "--seed", "99",
                 "--out", str(tmp_path / "bundle2")]) == 0
    rc = main(["train", "--bundle", str(tmp_path / "bundle2"),
               "--views", str(workdir / "views"), "--out", str(tmp_path / "t"),
               "--hops", "2", "--pool_size", "2", "--epochs", "2"])
    assert rc == 3
    assert "stale cache" in capsys.readouterr().err


def test_help_lists_config_keys(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["train", "--help"])
    assert excinfo.value.code == 0
    text = capsys.readouterr().out
    for key in ("--hidden", "--hops", "--p_m", "--lr_theta", "--lr_lambda",
                "--alpha", "--beta", "--gamma", "--pool_size", "--seed",
                "--self_loops", "--activation", "--hop_label_mode",
                "--lambda_mode", "--optim_mode", "--mask_negatives",
                "--threads"):
        assert key in text
    assert "default: 512" in text
