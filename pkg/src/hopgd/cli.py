"""Command-line interface.

Subcommands: synth, ingest, precompute, train, embed, probe, bench,
ablate, diagnose. Every flag shares its name with the config-file key it
overrides; every command writes a run manifest next to its outputs.

Exit codes: 0 ok, 2 config error, 3 data error, 4 numerical divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields
from pathlib import Path

from .config import PRESETS, TrainConfig, coerce, resolve_config
from .errors import ConfigError, DataError, DivergenceError, HopgdError

_CONFIG_DEFAULTS = {f.name: f.default for f in fields(TrainConfig)}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    for name, default in _CONFIG_DEFAULTS.items():
        if name == "preset":
            parser.add_argument("--preset", choices=sorted(PRESETS),
                                help="hyperparameter preset")
            continue
        parser.add_argument(f"--{name}", metavar="V",
                            help=f"config key (default: {default})")


def _add_common(parser: argparse.ArgumentParser, out_default: str) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--out", default=out_default, help="output directory")
    _add_config_flags(parser)


def _config_from_args(args: argparse.Namespace) -> TrainConfig:
    overrides = {name: getattr(args, name, None) for name in _CONFIG_DEFAULTS
                 if name != "preset" and getattr(args, name, None) is not None}
    return resolve_config(preset=args.preset or "", config_file=args.config,
                          overrides=overrides)


def _bundle_hashes(bundle) -> dict:
    return {"graph": bundle.graph_hash(), "features": bundle.features_hash()}


def _expected_manifests(bundle, cfg):
    from .views import compute_manifest
    gh, fh = bundle.graph_hash(), bundle.features_hash()
    views_manifest = compute_manifest(gh, fh, cfg.hops, cfg.self_loops, 0)
    pool_manifests = [compute_manifest(gh, fh, cfg.hops, cfg.self_loops, i + 1)
                      for i in range(cfg.pool_size)]
    return views_manifest, pool_manifests


def cmd_synth(args) -> int:
    from .graph import save_bundle
    from .manifest import write_manifest
    from .synth import make_desk_bundle

    seed = int(args.seed or 0)
    bundle = make_desk_bundle(args.name, seed=seed)
    out = Path(args.out)
    save_bundle(bundle, out)
    write_manifest(out, "synth", {"name": args.name, "seed": seed},
                   input_hashes=_bundle_hashes(bundle))
    print(f"wrote {args.name} bundle to {out}: "
          f"{bundle.num_nodes} nodes, {len(bundle.edges)} directed edges, "
          f"d={bundle.feature_dim}, classes={bundle.num_classes}")
    return 0


def cmd_ingest(args) -> int:
    from .graph import homophily_ratio, load_bundle
    from .manifest import write_manifest

    bundle = load_bundle(args.bundle)
    summary = {
        "num_nodes": bundle.num_nodes,
        "directed_edges": int(len(bundle.edges)),
        "feature_dim": bundle.feature_dim,
        "num_classes": bundle.num_classes,
        "has_labels": bundle.labels is not None,
        "has_splits": bundle.splits is not None,
        "isolated_nodes": int((bundle.degrees() == 0).sum()),
        "warnings": bundle.warnings,
    }
    if bundle.labels is not None and len(bundle.edges):
        summary["homophily"] = round(homophily_ratio(bundle), 4)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "ingest.json").write_text(json.dumps(summary, indent=1) + "\n")
    write_manifest(out, "ingest", {"bundle": str(args.bundle)},
                   input_hashes=_bundle_hashes(bundle))
    for key, value in summary.items():
        print(f"{key}: {value}")
    print(f"ok: bundle valid, {len(bundle.warnings)} warning(s)")
    return 0


def cmd_precompute(args) -> int:
    from .graph import load_bundle, normalize_adjacency
    from .manifest import write_manifest
    from .perturb import build_pool, save_pool
    from .views import build_views, save_views

    cfg = _config_from_args(args)
    bundle = load_bundle(args.bundle)
    adj = normalize_adjacency(bundle, cfg.self_loops)
    views = build_views(bundle, adj, cfg.hops)
    pool = build_pool(bundle, adj, cfg.hops, cfg.pool_size, cfg.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_views(views, out / "views.bin")
    save_pool(pool, out / "pool")
    write_manifest(out, "precompute", cfg.to_dict(),
                   input_hashes=_bundle_hashes(bundle),
                   extra={"view_manifest": views.manifest.hex()})
    print(f"wrote {cfg.hops}-hop views and {cfg.pool_size}-entry corruption "
          f"pool to {out}")
    return 0


def _load_precomputed(args, cfg, bundle):
    from .perturb import load_pool
    from .views import load_views

    views_dir = Path(args.views)
    views_path = views_dir / "views.bin"
    if not views_path.exists():
        raise DataError(f"missing upstream artifact: {views_path} "
                        "(run `hopgd precompute` first)")
    expected_views, expected_pool = _expected_manifests(bundle, cfg)
    views = load_views(views_path, expected_views)
    pool = load_pool(views_dir / "pool", expected_pool)
    return views, pool


def cmd_train(args) -> int:
    from .graph import load_bundle
    from .manifest import write_manifest
    from .plots import training_curves
    from .train import train

    cfg = _config_from_args(args)
    bundle = load_bundle(args.bundle)
    views, pool = _load_precomputed(args, cfg, bundle)
    out = Path(args.out)
    result = train(bundle, cfg, pos_views=views, pool=pool, out_dir=out)
    training_curves(result.metrics, out / "train_curves.png")
    write_manifest(out, "train", cfg.to_dict(),
                   input_hashes=_bundle_hashes(bundle),
                   extra={"view_manifest": views.manifest.hex()})
    last = result.metrics[-1]
    print(f"trained {cfg.epochs} epochs; final total loss {last['total']:.4f}, "
          f"lambda {last['lambda']}")
    print(f"checkpoint: {out / 'model.ckpt'}")
    return 0


def cmd_embed(args) -> int:
    from .counters import sparse_ops
    from .errors import StaleCacheError
    from .evaluation import infer, save_embeddings
    from .graph import load_bundle
    from .manifest import write_manifest
    from .nn import load_checkpoint
    from .views import load_views

    ckpt_path = Path(args.ckpt)
    model, sidecar = load_checkpoint(ckpt_path)
    views_path = Path(args.views) / "views.bin"
    if not views_path.exists():
        raise DataError(f"missing upstream artifact: {views_path} "
                        "(run `hopgd precompute` first)")
    views = load_views(views_path)
    recorded = sidecar.get("provenance", {}).get("view_manifest")
    if recorded and recorded != views.manifest.hex():
        raise StaleCacheError(
            "stale cache: checkpoint was trained on different views")
    bundle = load_bundle(args.bundle) if args.bundle else None
    if bundle is not None:
        recorded_graph = sidecar.get("provenance", {}).get("graph_hash")
        if recorded_graph and recorded_graph != bundle.graph_hash():
            raise StaleCacheError(
                "stale cache: checkpoint was trained on a different graph")

    before = sparse_ops.value
    emb = infer(model, views.hop(views.hops))
    delta = sparse_ops.value - before
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_embeddings(emb, out / "embeddings.bin", model=model,
                    view_manifest=views.manifest)
    write_manifest(out, "embed",
                   {"ckpt": str(ckpt_path), "views": str(args.views)},
                   input_hashes=_bundle_hashes(bundle) if bundle else {},
                   extra={"sparse_ops_delta": delta})
    print(f"embeddings: {out / 'embeddings.bin'} "
          f"({emb.shape[0]}x{emb.shape[1]}), sparse ops during inference: {delta}")
    return 0


def cmd_probe(args) -> int:
    from .evaluation import load_embeddings, probe
    from .graph import load_bundle
    from .manifest import write_manifest

    bundle = load_bundle(args.bundle)
    emb, _ = load_embeddings(Path(args.embeddings))
    runs = int(args.runs)
    mean, std, accs = probe(emb, bundle.labels, bundle.splits, runs=runs,
                            seed=int(args.seed or 0))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "probe.json").write_text(json.dumps(
        {"mean": mean, "std": std, "runs": accs}, indent=1) + "\n")
    with open(out / "runs.tsv", "w") as f:
        f.write("run\taccuracy\n")
        for i, acc in enumerate(accs):
            f.write(f"{i}\t{acc:.6f}\n")
    write_manifest(out, "probe",
                   {"embeddings": str(args.embeddings), "runs": runs},
                   input_hashes=_bundle_hashes(bundle))
    print(f"{100 * mean:.1f}±{100 * std:.1f}")
    return 0


def cmd_bench(args) -> int:
    from .bench import bench
    from .graph import load_bundle
    from .manifest import write_manifest
    from .plots import bench_bars

    cfg = _config_from_args(args)
    bundle = load_bundle(args.bundle)
    report = bench(bundle, cfg, reps=int(args.reps))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bench.json").write_text(json.dumps(report, indent=1) + "\n")
    bench_bars(report, out / "bench.png")
    write_manifest(out, "bench", cfg.to_dict(),
                   input_hashes=_bundle_hashes(bundle))
    for key in ("train_ms_per_epoch", "precompute_ms", "infer_ms",
                "gcn_forward_ms", "sparse_ops_infer", "gcn_over_infer"):
        print(f"{key}: {report[key]}")
    return 0


def cmd_ablate(args) -> int:
    from .graph import load_bundle
    from .manifest import write_manifest
    from .plots import ablation_bars
    from .train import ablation_suite

    cfg = _config_from_args(args)
    bundle = load_bundle(args.bundle)
    seeds = list(range(int(args.seeds)))
    rows = ablation_suite(bundle, cfg, seeds=seeds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "ablation.tsv", "w") as f:
        f.write("name\tmean\tstd\taccuracies\n")
        for row in rows:
            accs = ",".join(f"{a:.6f}" for a in row["accuracies"])
            f.write(f"{row['name']}\t{row['mean']:.6f}\t{row['std']:.6f}\t{accs}\n")
    ablation_bars(rows, out / "ablation.png")
    write_manifest(out, "ablate", cfg.to_dict(),
                   input_hashes=_bundle_hashes(bundle),
                   extra={"seeds": seeds})
    for row in rows:
        print(f"{row['name']}: {100 * row['mean']:.1f}±{100 * row['std']:.1f}")
    return 0


def cmd_diagnose(args) -> int:
    from .evaluation import hop_separation_diagnostic
    from .graph import load_bundle
    from .manifest import write_manifest
    from .plots import separation_curve

    bundle = load_bundle(args.bundle)
    report = hop_separation_diagnostic(
        bundle, k_max=int(args.max_hop),
        self_loops=coerce("self_loops", args.self_loops)
        if args.self_loops is not None else True,
        seed=int(args.seed or 0))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "diagnostic.json").write_text(
        json.dumps(report.to_dict(), indent=1) + "\n")
    separation_curve(report.scores, report.homophily or float("nan"),
                     out / "separation.png")
    write_manifest(out, "diagnose",
                   {"bundle": str(args.bundle), "max_hop": int(args.max_hop)},
                   input_hashes=_bundle_hashes(bundle))
    h = "n/a" if report.homophily is None else f"{report.homophily:.4f}"
    print(f"homophily: {h}")
    for k, s in report.scores:
        print(f"hop {k}: separation {s:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hopgd",
        description="Self-supervised node embeddings from precomputed "
                    "multi-hop views with group discrimination.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic bundle")
    p.add_argument("--name", required=True,
                   choices=["cora-desk", "citeseer-desk",
                            "sbm-homophilous", "sbm-heterophilous"])
    p.add_argument("--seed", help="generator seed (default: 0)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate a bundle directory")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", default="runs/ingest")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("precompute", help="build and cache views + corruption pool")
    p.add_argument("--bundle", required=True)
    _add_common(p, "runs/precompute")
    p.set_defaults(func=cmd_precompute)

    p = sub.add_parser("train", help="run the min-max training loop")
    p.add_argument("--bundle", required=True)
    p.add_argument("--views", required=True, help="precompute output directory")
    _add_common(p, "runs/train")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("embed", help="encode the cached last-hop view")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--views", required=True)
    p.add_argument("--bundle", help="optional, for provenance checking")
    p.add_argument("--out", default="runs/embed")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("probe", help="linear probe on saved embeddings")
    p.add_argument("--bundle", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--runs", default="10")
    p.add_argument("--seed", help="probe seed (default: 0)")
    p.add_argument("--out", default="runs/probe")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("bench", help="timing report")
    p.add_argument("--bundle", required=True)
    p.add_argument("--reps", default="20")
    _add_common(p, "runs/bench")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("ablate", help="run the six-row ablation grid")
    p.add_argument("--bundle", required=True)
    p.add_argument("--seeds", default="10", help="number of training seeds")
    _add_common(p, "runs/ablate")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("diagnose", help="homophily and hop-separation report")
    p.add_argument("--bundle", required=True)
    p.add_argument("--max_hop", default="4")
    p.add_argument("--seed", help="permutation seed (default: 0)")
    p.add_argument("--self_loops", help="config key (default: True)")
    p.add_argument("--out", default="runs/diagnose")
    p.set_defaults(func=cmd_diagnose)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = getattr(args, "threads", None)
    if threads:
        for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 4
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except HopgdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
