"""Run manifests: enough resolved state to reproduce any CLI output."""

from __future__ import annotations

import json
import time
from pathlib import Path

from . import __version__


def write_manifest(out_dir: str | Path, command: str, config: dict,
                   input_hashes: dict | None = None,
                   extra: dict | None = None) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "tool": "hopgd",
        "version": __version__,
        "command": command,
        "timestamp_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "config": config,
        "input_hashes": input_hashes or {},
    }
    if extra:
        payload.update(extra)
    path = out_dir / "run_manifest.json"
    path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    return path
