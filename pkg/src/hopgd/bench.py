"""Timing harness: per-epoch training cost, inference cost, and a 2-layer
GCN-style forward pass as the reference the inference path is measured
against. Warmup iterations are excluded and medians over >= 20 repetitions
are reported, together with a machine descriptor.
"""

from __future__ import annotations

import os
import platform
import time
from dataclasses import replace

import numpy as np

from . import rng as rng_streams
from .config import TrainConfig
from .counters import sparse_ops
from .errors import DataError
from .evaluation import infer
from .graph import GraphBundle, SparseAdj, normalize_adjacency
from .nn import activate, xavier_uniform
from .train import train
from .views import build_views


def _median_ms(fn, reps: int, warmup: int) -> float:
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - t0) * 1e3)
    return float(np.median(samples))


def gcn_reference_forward(adj: SparseAdj, feats: np.ndarray, hidden: int,
                          rng: np.random.Generator,
                          slope: float = 0.25) -> np.ndarray:
    """Untrained 2-layer GCN-style stack: (SpMM, dense, rectifier) twice."""
    w1 = xavier_uniform(rng, (feats.shape[1], hidden), feats.dtype)
    w2 = xavier_uniform(rng, (hidden, hidden), feats.dtype)
    mat = adj.as_dtype(feats.dtype)
    h = mat @ feats
    sparse_ops.add(1)
    h = activate(h @ w1, slope, "prelu")
    h = mat @ h
    sparse_ops.add(1)
    return activate(h @ w2, slope, "prelu")


def machine_descriptor(threads: int = 0) -> dict:
    return {
        "platform": platform.platform(),
        "processor": platform.processor() or platform.machine(),
        "cpu_count": os.cpu_count(),
        "thread_cap": threads or os.cpu_count(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


def bench(bundle: GraphBundle, cfg: TrainConfig, reps: int = 20,
          warmup: int = 3, train_epochs: int | None = None) -> dict:
    """Produce the timing report; see keys below.

    train_ms_per_epoch comes from a short real training run (pool build
    excluded); infer_ms uses only the cached last-hop view, and the sparse
    op counter is sampled around it to certify the no-graph contract.
    """
    if reps < 1:
        raise DataError("bench requires reps >= 1")
    adj = normalize_adjacency(bundle, cfg.self_loops)

    t0 = time.perf_counter()
    pos_views = build_views(bundle, adj, cfg.hops)
    first_precompute_ms = (time.perf_counter() - t0) * 1e3
    precompute_ms = _median_ms(lambda: build_views(bundle, adj, cfg.hops),
                               reps=reps, warmup=0)

    epochs = train_epochs if train_epochs is not None else max(reps, 20) + warmup
    run_cfg = replace(cfg, epochs=epochs)
    result = train(bundle, run_cfg, pos_views=pos_views)
    walls = np.array([m["wall_ms"] for m in result.metrics])
    per_epoch = np.diff(np.concatenate([[0.0], walls]))
    train_ms = float(np.median(per_epoch[warmup:]))

    view_k = pos_views.hop(cfg.hops)
    before = sparse_ops.value
    infer_ms = _median_ms(lambda: infer(result.model, view_k),
                          reps=reps, warmup=warmup)
    sparse_ops_infer = sparse_ops.value - before

    gcn_rng = rng_streams.stream(cfg.seed, rng_streams.BENCH)
    before_gcn = sparse_ops.value
    gcn_ms = _median_ms(
        lambda: gcn_reference_forward(adj, bundle.features, cfg.hidden, gcn_rng),
        reps=reps, warmup=warmup)
    sparse_ops_gcn = (sparse_ops.value - before_gcn) // (reps + warmup)

    return {
        "train_ms_per_epoch": train_ms,
        "infer_ms": infer_ms,
        "gcn_forward_ms": gcn_ms,
        "precompute_ms": precompute_ms,
        "first_precompute_ms": first_precompute_ms,
        "sparse_ops_infer": int(sparse_ops_infer),
        "sparse_ops_gcn_forward": int(sparse_ops_gcn),
        "gcn_over_infer": gcn_ms / infer_ms if infer_ms > 0 else float("inf"),
        "reps": reps,
        "machine": machine_descriptor(cfg.threads),
    }
