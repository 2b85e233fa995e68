"""Artifact emission: full-precision CSV/JSON plus a manifest per file."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__

FLOAT_FMT = "%.17g"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_default)


def _default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serializable: {type(o)}")


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def write_manifest(path: Path, config: dict, tolerances: dict | None = None):
    manifest = {
        "file": path.name,
        "config_sha256": config_hash(config),
        "code_version": __version__,
        "tolerances": tolerances or {},
    }
    mpath = path.with_suffix(path.suffix + ".manifest.json")
    mpath.write_text(json.dumps(manifest, indent=2, default=_default) + "\n")


def write_json(path: Path, obj, config: dict, tolerances: dict | None = None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, default=_default) + "\n")
    write_manifest(path, config, tolerances)


def write_csv(path: Path, header: list, rows, config: dict,
              tolerances: dict | None = None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(FLOAT_FMT % v if isinstance(v, float) else str(v)
                              for v in row) + "\n")
    write_manifest(path, config, tolerances)


def field_rows(values: np.ndarray, N: int):
    """(t1, t2, re, im) rows for a complex scalar grid field."""
    rows = []
    for j in range(N):
        for k in range(N):
            v = complex(values[j, k])
            rows.append((j / N, k / N, float(v.real), float(v.imag)))
    return rows
