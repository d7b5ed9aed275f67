"""Run manifests: inputs, parameters, seed and output hashes per command.

A manifest makes any CLI run exactly repeatable: feeding the recorded
parameters and seed back through the same tool version reproduces the
primary outputs byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, command: str, params: dict, inputs: list, outputs: list, seed: int) -> Path:
    from . import __version__

    out_dir = Path(out_dir)
    manifest = {
        "tool": "radiotwin",
        "version": __version__,
        "command": command,
        "seed": seed,
        "parameters": params,
        "inputs": [
            {"path": str(p), "sha256": sha256_file(p)} for p in inputs if Path(p).exists()
        ],
        "outputs": [
            {"path": str(p), "sha256": sha256_file(p)} for p in outputs if Path(p).exists()
        ],
    }
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_json(path, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
