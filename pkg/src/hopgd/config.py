"""Flat training configuration: presets, config files, and flag merging.

Precedence: built-in defaults < preset < config file < command-line flags.
Config files hold one `key = value` per line with `#` comments; keys are
identical to the CLI flag names. Unknown keys are a hard error.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, asdict
from pathlib import Path

from .errors import ConfigError


@dataclass
class TrainConfig:
    preset: str = ""
    hops: int = 2
    hidden: int = 512
    p_m: float = 0.2
    epochs: int = 500
    lr_theta: float = 1e-3
    lr_lambda: float | None = None      # None inherits lr_theta
    alpha: float = 1.0
    beta: float = 0.01
    gamma: float = 0.05
    pool_size: int = 8
    seed: int = 0
    self_loops: bool = True
    activation: str = "prelu"
    hop_label_mode: str = "binary"
    lambda_mode: str = "learnable"      # learnable | fixed
    lambda_fixed: str = ""              # comma floats, used when lambda_mode=fixed
    optim_mode: str = "minmax"          # minmax | min
    lambda_init: str = "xavier"
    mask_negatives: bool = False
    threads: int = 0                    # 0 = machine default

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.hops < 1:
            raise ConfigError(f"hops must be >= 1, got {self.hops}")
        if self.lr_theta <= 0:
            raise ConfigError(f"lr_theta must be positive, got {self.lr_theta}")
        if self.lambda_mode not in ("learnable", "fixed"):
            raise ConfigError(f"lambda_mode must be learnable|fixed, got {self.lambda_mode!r}")
        if self.optim_mode not in ("minmax", "min"):
            raise ConfigError(f"optim_mode must be minmax|min, got {self.optim_mode!r}")
        if self.lambda_mode == "fixed" and not self.lambda_fixed:
            raise ConfigError("lambda_mode=fixed requires lambda_fixed")

    @property
    def effective_lr_lambda(self) -> float:
        return self.lr_theta if self.lr_lambda is None else self.lr_lambda

    def fixed_lambda(self) -> list[float]:
        try:
            vec = [float(x) for x in self.lambda_fixed.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad lambda_fixed {self.lambda_fixed!r}") from exc
        if len(vec) != self.hops:
            raise ConfigError(
                f"lambda_fixed has {len(vec)} entries, hops is {self.hops}")
        if all(v == 0 for v in vec):
            raise ConfigError("lambda_fixed must have a nonzero entry")
        return vec

    def to_dict(self) -> dict:
        return asdict(self)


# Per-dataset presets: hidden size, hop order, learning rate, and loss
# weights as published; epoch counts are this implementation's defaults.
PRESETS: dict[str, dict] = {
    "cora": dict(hidden=512, hops=2, lr_theta=1e-3,
                 alpha=1.0, beta=0.01, gamma=0.05, epochs=500),
    "citeseer": dict(hidden=1024, hops=1, lr_theta=5e-4,
                     alpha=1.0, beta=0.01, gamma=0.05, epochs=500),
    "pubmed": dict(hidden=1024, hops=2, lr_theta=1e-3,
                   alpha=1.0, beta=0.01, gamma=0.05, epochs=500),
    "computers": dict(hidden=1024, hops=2, lr_theta=5e-4,
                      alpha=1.0, beta=0.01, gamma=0.05, epochs=1000),
    "photo": dict(hidden=512, hops=2, lr_theta=1e-4,
                  alpha=1.0, beta=0.01, gamma=0.02, epochs=1000),
    "arxiv-desk": dict(hidden=1500, hops=3, lr_theta=5e-5,
                       alpha=1.0, beta=0.01, gamma=0.05, epochs=500),
}

_FIELD_TYPES = {f.name: f.type for f in fields(TrainConfig)}
_BOOL_TRUE = ("1", "true", "yes", "on")
_BOOL_FALSE = ("0", "false", "no", "off")


def coerce(key: str, value) -> object:
    """Parse a string value to the declared field type."""
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown key '{key}'")
    if not isinstance(value, str):
        return value
    ftype = _FIELD_TYPES[key]
    text = value.strip()
    if ftype == "bool":
        low = text.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ConfigError(f"bad boolean for '{key}': {value!r}")
    if ftype == "int":
        try:
            return int(text)
        except ValueError as exc:
            raise ConfigError(f"bad integer for '{key}': {value!r}") from exc
    if ftype.startswith("float"):
        if text.lower() == "none" and "None" in ftype:
            return None
        try:
            return float(text)
        except ValueError as exc:
            raise ConfigError(f"bad number for '{key}': {value!r}") from exc
    return text


def parse_config_file(path: str | Path) -> dict:
    """Read a `key = value` file; '#' starts a comment."""
    out: dict[str, object] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        out[key] = coerce(key, value)
    return out


def resolve_config(preset: str = "", config_file: str | Path | None = None,
                   overrides: dict | None = None) -> TrainConfig:
    """Merge defaults, preset, file, and flag overrides into one config."""
    merged: dict[str, object] = {}
    if preset:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset '{preset}', expected one of {sorted(PRESETS)}")
        merged.update(PRESETS[preset])
        merged["preset"] = preset
    if config_file is not None:
        file_values = parse_config_file(config_file)
        if "preset" in file_values and file_values["preset"]:
            name = str(file_values["preset"])
            if name not in PRESETS:
                raise ConfigError(f"unknown preset '{name}'")
            base = dict(PRESETS[name])
            base.update({k: v for k, v in file_values.items() if k != "preset"})
            file_values = base
            file_values["preset"] = name
        merged.update(file_values)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        merged[key] = coerce(key, value)
    return TrainConfig(**merged)
