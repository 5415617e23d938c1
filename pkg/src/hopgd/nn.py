"""Dense numerical core: encoder, heads, losses primitives, Adam, checkpoints.

Everything is plain numpy with hand-written gradients (verified against
central finite differences in the test suite). Training runs in f32; f64
exists for gradient checks and oracle comparisons only.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError

ACTIVATIONS = ("prelu", "relu", "identity")
PRELU_INIT_SLOPE = 0.25

# Checkpoint layout: magic, dims, then tensors in PARAM_ORDER (lambda last).
CKPT_MAGIC = b"SAGD1"
PARAM_ORDER = ("enc_w", "enc_b", "slope", "gd_w", "gd_b",
               "deg_w", "deg_b", "hop_w", "hop_b", "lam_logits")
HEAD_NAMES = ("gd", "deg", "hop")


def xavier_uniform(rng: np.random.Generator, shape: tuple[int, ...], dtype) -> np.ndarray:
    fan_in, fan_out = shape[0], shape[-1]
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def softmax(x: np.ndarray) -> np.ndarray:
    z = x - x.max()
    e = np.exp(z)
    return e / e.sum()


def activate(pre: np.ndarray, slope, mode: str) -> np.ndarray:
    if mode == "prelu":
        return np.where(pre > 0, pre, slope * pre)
    if mode == "relu":
        return np.maximum(pre, 0)
    if mode == "identity":
        return pre
    raise ConfigError(f"unknown activation {mode!r}")


def activate_grad(pre: np.ndarray, slope, mode: str) -> np.ndarray:
    if mode == "prelu":
        return np.where(pre > 0, 1.0, slope).astype(pre.dtype)
    if mode == "relu":
        return (pre > 0).astype(pre.dtype)
    if mode == "identity":
        return np.ones_like(pre)
    raise ConfigError(f"unknown activation {mode!r}")


def bce_with_logits(logits: np.ndarray, targets: np.ndarray) -> float:
    """Mean binary cross entropy in the stable max(z,0) - z*y + log1p(e^-|z|) form."""
    z = logits
    per = np.maximum(z, 0) - z * targets + np.log1p(np.exp(-np.abs(z)))
    return float(per.mean())


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class ModelState:
    """Encoder, three head projectors, and the view-weight logits."""

    enc_w: np.ndarray            # (d, hidden)
    enc_b: np.ndarray            # (hidden,)
    slope: np.ndarray            # (1,) learnable rectifier slope (prelu only)
    gd_w: np.ndarray             # (hidden, hidden)
    gd_b: np.ndarray
    deg_w: np.ndarray
    deg_b: np.ndarray
    hop_w: np.ndarray
    hop_b: np.ndarray
    lam_logits: np.ndarray       # (hops,)
    activation: str = "prelu"

    @property
    def dim(self) -> int:
        return self.enc_w.shape[0]

    @property
    def hidden(self) -> int:
        return self.enc_w.shape[1]

    @property
    def hops(self) -> int:
        return self.lam_logits.shape[0]

    @property
    def dtype(self):
        return self.enc_w.dtype

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_ORDER}

    def set_params(self, values: dict[str, np.ndarray]) -> None:
        for name, value in values.items():
            setattr(self, name, value)

    def lam(self) -> np.ndarray:
        return softmax(self.lam_logits)

    def head(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        return getattr(self, f"{name}_w"), getattr(self, f"{name}_b")

    def check_finite(self) -> None:
        for name, p in self.params().items():
            if not np.isfinite(p).all():
                raise DataError(f"non-finite parameter {name}")


def init_model(dim: int, hidden: int, hops: int, seed_stream: np.random.Generator,
               lam_stream: np.random.Generator, activation: str = "prelu",
               lambda_init: str = "xavier", dtype=np.float32) -> ModelState:
    if activation not in ACTIVATIONS:
        raise ConfigError(f"activation must be one of {ACTIVATIONS}")
    if lambda_init == "xavier":
        lam = xavier_uniform(lam_stream, (1, hops), dtype).ravel()
    elif lambda_init == "uniform":
        lam = np.zeros(hops, dtype=dtype)
    else:
        raise ConfigError(f"lambda_init must be 'xavier' or 'uniform', got {lambda_init!r}")
    def head():
        return (xavier_uniform(seed_stream, (hidden, hidden), dtype),
                np.zeros(hidden, dtype=dtype))
    gd_w, gd_b = head()
    deg_w, deg_b = head()
    hop_w, hop_b = head()
    return ModelState(
        enc_w=xavier_uniform(seed_stream, (dim, hidden), dtype),
        enc_b=np.zeros(hidden, dtype=dtype),
        slope=np.full(1, PRELU_INIT_SLOPE, dtype=dtype),
        gd_w=gd_w, gd_b=gd_b, deg_w=deg_w, deg_b=deg_b,
        hop_w=hop_w, hop_b=hop_b,
        lam_logits=lam, activation=activation)


def encode(model: ModelState, rows: np.ndarray) -> np.ndarray:
    """One-layer encoder: act(rows @ W + b)."""
    if rows.shape[1] != model.dim:
        raise DataError(f"encoder expects dim {model.dim}, got {rows.shape[1]}")
    pre = rows @ model.enc_w + model.enc_b
    out = activate(pre, model.slope[0], model.activation)
    if not np.isfinite(out).all():
        raise DataError("non-finite encoder output (divergence)")
    return out


def head_logits(model: ModelState, name: str, hidden_rows: np.ndarray) -> np.ndarray:
    """Scalar logit per row: summation over the head's projected vector."""
    w, b = model.head(name)
    # sum_j (H W + b)_j  ==  H @ W.sum(1) + b.sum()
    return hidden_rows @ w.sum(axis=1) + b.sum()


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0


class Adam:
    """Per-tensor Adam; ascend(g) is implemented as descend(-g) exactly."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8) -> None:
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state: dict[str, AdamState] = {}

    def step(self, name: str, param: np.ndarray, grad: np.ndarray,
             ascend: bool = False) -> np.ndarray:
        if grad.shape != param.shape:
            raise DataError(f"gradient shape {grad.shape} != param shape {param.shape}")
        if ascend:
            grad = -grad
        s = self.state.get(name)
        if s is None:
            s = AdamState(m=np.zeros_like(param), v=np.zeros_like(param))
            self.state[name] = s
        s.t += 1
        s.m = self.beta1 * s.m + (1.0 - self.beta1) * grad
        s.v = self.beta2 * s.v + (1.0 - self.beta2) * grad * grad
        m_hat = s.m / (1.0 - self.beta1 ** s.t)
        v_hat = s.v / (1.0 - self.beta2 ** s.t)
        return param - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def model_hash(model: ModelState) -> str:
    h = hashlib.sha256()
    for name in PARAM_ORDER:
        h.update(np.ascontiguousarray(getattr(model, name), dtype="<f4").tobytes())
    return h.hexdigest()


def save_checkpoint(model: ModelState, path: str | Path,
                    config: dict | None = None,
                    provenance: dict | None = None) -> Path:
    """Write the binary checkpoint plus a JSON sidecar (atomic rename)."""
    path = Path(path)
    header = struct.pack("<5s3I", CKPT_MAGIC, model.dim, model.hidden, model.hops)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as f:
        f.write(header)
        for name in PARAM_ORDER:
            f.write(np.ascontiguousarray(getattr(model, name), dtype="<f4").tobytes())
    tmp.replace(path)
    sidecar = {
        "activation": model.activation,
        "dim": model.dim, "hidden": model.hidden, "hops": model.hops,
        "config": config or {},
        "provenance": provenance or {},
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=1) + "\n")
    return path


def _param_shapes(dim: int, hidden: int, hops: int) -> dict[str, tuple[int, ...]]:
    return {
        "enc_w": (dim, hidden), "enc_b": (hidden,), "slope": (1,),
        "gd_w": (hidden, hidden), "gd_b": (hidden,),
        "deg_w": (hidden, hidden), "deg_b": (hidden,),
        "hop_w": (hidden, hidden), "hop_b": (hidden,),
        "lam_logits": (hops,),
    }


def load_checkpoint(path: str | Path) -> tuple[ModelState, dict]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing upstream artifact: {path}")
    blob = path.read_bytes()
    if len(blob) < 17 or blob[:5] != CKPT_MAGIC:
        raise DataError(f"corrupt checkpoint: {path}")
    _, dim, hidden, hops = struct.unpack_from("<5s3I", blob)
    sidecar_path = path.with_suffix(".json")
    sidecar = json.loads(sidecar_path.read_text()) if sidecar_path.exists() else {}
    shapes = _param_shapes(dim, hidden, hops)
    offset = 17
    values = {}
    for name in PARAM_ORDER:
        count = int(np.prod(shapes[name]))
        arr = np.frombuffer(blob, dtype="<f4", count=count, offset=offset)
        values[name] = arr.reshape(shapes[name]).copy()
        offset += count * 4
    if offset != len(blob):
        raise DataError(f"corrupt checkpoint (trailing bytes): {path}")
    model = ModelState(activation=sidecar.get("activation", "prelu"), **values)
    return model, sidecar
