"""Two-step min-max training loop and the ablation grid.

Each epoch draws a fresh column mask, picks the next corruption-pool
entry, and samples one paired batch. The max step freezes the encoder and
heads and takes one Adam ascent step on the view-weight logits; the min
step recomputes the loss on the same batch under the updated weights and
descends everything else. Fixed-weight and pure-minimization modes cover
the ablation grid.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng as rng_streams
from .config import TrainConfig
from .errors import DivergenceError
from .graph import GraphBundle, StructureLabels, normalize_adjacency, relative_degrees
from .losses import LossWeights, assemble_epoch_batch, backward, forward
from .nn import Adam, ModelState, init_model, save_checkpoint
from .perturb import CorruptionPool, build_pool, draw_mask
from .views import ViewSet, build_views

THETA_PARAMS = ("enc_w", "enc_b", "slope", "gd_w", "gd_b",
                "deg_w", "deg_b", "hop_w", "hop_b")


@dataclass
class TrainResult:
    model: ModelState
    metrics: list[dict]
    pos_views: ViewSet
    labels: StructureLabels
    config: TrainConfig


def metrics_line(record: dict) -> str:
    return json.dumps(record, separators=(",", ":"))


def train(bundle: GraphBundle, cfg: TrainConfig,
          pos_views: ViewSet | None = None,
          pool: CorruptionPool | None = None,
          out_dir: str | Path | None = None,
          dtype=np.float32) -> TrainResult:
    """Run the full training loop; optionally persist checkpoint and metrics."""
    adj = None
    if pos_views is None or pool is None:
        adj = normalize_adjacency(bundle, cfg.self_loops)
    if pos_views is None:
        pos_views = build_views(bundle, adj, cfg.hops)
    if pool is None:
        pool = build_pool(bundle, adj, cfg.hops, cfg.pool_size, cfg.seed)
    labels = relative_degrees(bundle)

    model = init_model(
        dim=bundle.feature_dim, hidden=cfg.hidden, hops=cfg.hops,
        seed_stream=rng_streams.stream(cfg.seed, rng_streams.PARAM_INIT),
        lam_stream=rng_streams.stream(cfg.seed, rng_streams.LAMBDA_INIT),
        activation=cfg.activation, lambda_init=cfg.lambda_init, dtype=dtype)

    weights = LossWeights(alpha=cfg.alpha, beta=cfg.beta, gamma=cfg.gamma)
    opt_theta = Adam(cfg.lr_theta)
    opt_lam = Adam(cfg.effective_lr_lambda)
    mask_stream = rng_streams.stream(cfg.seed, rng_streams.MASK)
    sample_stream = rng_streams.stream(cfg.seed, rng_streams.SAMPLE)

    fixed_lam = None
    active_hops = None
    if cfg.lambda_mode == "fixed":
        fixed_lam = np.asarray(cfg.fixed_lambda(), dtype=dtype)
        active_hops = [k + 1 for k in range(cfg.hops) if fixed_lam[k] != 0]

    learnable = cfg.lambda_mode == "learnable"
    metrics: list[dict] = []
    sink = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        sink = open(out_dir / "metrics.jsonl", "w")

    start = time.perf_counter()
    try:
        for epoch in range(1, cfg.epochs + 1):
            mask = draw_mask(bundle.feature_dim, cfg.p_m, mask_stream)
            entry = pool.entry(epoch - 1)
            batch = assemble_epoch_batch(
                pos_views, entry, labels, sample_stream, mask=mask,
                mask_negatives=cfg.mask_negatives,
                hop_label_mode=cfg.hop_label_mode, active_hops=active_hops)

            if learnable and cfg.optim_mode == "minmax" and cfg.hops > 1:
                _, cache = forward(model, batch, weights)
                grads = backward(model, batch, cache,
                                 need_theta=False, need_lam=True)
                model.lam_logits = opt_lam.step(
                    "lam_logits", model.lam_logits, grads["lam_logits"],
                    ascend=True)

            parts, cache = forward(model, batch, weights, lam=fixed_lam)
            if not np.isfinite(parts.total):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}: {parts}")
            descend_lam = learnable and cfg.optim_mode == "min" and cfg.hops > 1
            grads = backward(model, batch, cache,
                             need_theta=True, need_lam=descend_lam)
            for name in THETA_PARAMS:
                if name in grads:
                    setattr(model, name, opt_theta.step(
                        name, getattr(model, name), grads[name]))
            if descend_lam:
                model.lam_logits = opt_lam.step(
                    "lam_logits", model.lam_logits, grads["lam_logits"])

            lam_now = fixed_lam if fixed_lam is not None else model.lam()
            record = {
                "epoch": epoch,
                "total": float(parts.total),
                "L_GD": float(parts.gd),
                "L_hop": float(parts.hop),
                "L_degree": float(parts.degree),
                "lambda": [float(v) for v in lam_now],
                "wall_ms": (time.perf_counter() - start) * 1e3,
            }
            metrics.append(record)
            if sink is not None:
                sink.write(metrics_line(record) + "\n")
    finally:
        if sink is not None:
            sink.close()

    model.check_finite()
    if out_dir is not None:
        save_checkpoint(
            model, out_dir / "model.ckpt",
            config=cfg.to_dict(),
            provenance={
                "graph_hash": bundle.graph_hash(),
                "features_hash": bundle.features_hash(),
                "view_manifest": pos_views.manifest.hex(),
            })
    return TrainResult(model=model, metrics=metrics, pos_views=pos_views,
                       labels=labels, config=cfg)


# The six ablation rows: fixed weight vectors, then learnable weights under
# pure minimization and under min-max, with and without the structure heads.
def ablation_rows(hops: int) -> list[dict]:
    last_only = ",".join(["0"] * (hops - 1) + ["1"])
    equal = ",".join(["1"] * hops)
    return [
        {"name": "fixed_last_hop", "lambda_mode": "fixed",
         "lambda_fixed": last_only, "structure": False},
        {"name": "fixed_equal", "lambda_mode": "fixed",
         "lambda_fixed": equal, "structure": False},
        {"name": "fixed_equal+structure", "lambda_mode": "fixed",
         "lambda_fixed": equal, "structure": True},
        {"name": "min_only", "lambda_mode": "learnable",
         "optim_mode": "min", "structure": False},
        {"name": "min_max", "lambda_mode": "learnable",
         "optim_mode": "minmax", "structure": False},
        {"name": "min_max+structure", "lambda_mode": "learnable",
         "optim_mode": "minmax", "structure": True},
    ]


def ablation_suite(bundle: GraphBundle, base_cfg: TrainConfig,
                   seeds: list[int] | None = None,
                   probe_runs: int = 1) -> list[dict]:
    """Train every ablation row over the seed list; report probe accuracy."""
    from dataclasses import replace

    from .evaluation import infer, probe

    seeds = list(seeds) if seeds is not None else list(range(10))
    adj = normalize_adjacency(bundle, base_cfg.self_loops)
    pos_views = build_views(bundle, adj, base_cfg.hops)
    results = []
    for row in ablation_rows(base_cfg.hops):
        cfg_kwargs = {k: v for k, v in row.items() if k not in ("name", "structure")}
        if not row["structure"]:
            cfg_kwargs.update(beta=0.0, gamma=0.0)
        accs = []
        for seed in seeds:
            cfg = replace(base_cfg, seed=seed, **cfg_kwargs)
            pool = build_pool(bundle, adj, cfg.hops, cfg.pool_size, seed)
            result = train(bundle, cfg, pos_views=pos_views, pool=pool)
            emb = infer(result.model, pos_views.hop(cfg.hops))
            acc, _, _ = probe(emb, bundle.labels, bundle.splits,
                              runs=probe_runs, seed=seed)
            accs.append(acc)
        results.append({
            "name": row["name"],
            "mean": float(np.mean(accs)),
            "std": float(np.std(accs)),
            "accuracies": [float(a) for a in accs],
        })
    return results
