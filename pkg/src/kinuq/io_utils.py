"""Artifact plumbing: CSV/JSON writers, checksums and run manifests.

All floats are written with repr-faithful precision so that a fixed seed
gives byte-identical artifacts across runs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def write_csv(path, columns: dict) -> Path:
    """Write named columns (equal length) as a headered CSV."""
    path = Path(path)
    names = list(columns)
    cols = [np.atleast_1d(np.asarray(columns[k])) for k in names]
    lengths = {len(c) for c in cols}
    if len(lengths) != 1:
        raise ValueError(f"column lengths differ: { {n: len(c) for n, c in zip(names, cols)} }")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path) -> dict:
    """Read a headered CSV back into float columns (non-numeric kept as str)."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        names = next(r)
        rows = list(r)
    out = {}
    for i, name in enumerate(names):
        vals = [row[i] for row in rows]
        try:
            out[name] = np.array([float(v) for v in vals])
        except ValueError:
            out[name] = np.array(vals)
    return out


def write_json(path, obj) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config: dict) -> str:
    """Stable hash of a JSON-serializable config."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class RunManifest:
    """Record of one runner invocation: config identity, seeds, timings and
    a checksummed list of every emitted file."""

    scenario: str
    config_hash: str
    master_seed: int
    code_version: str
    phase_seconds: dict = field(default_factory=dict)
    phase_seeds: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    def add_file(self, path):
        path = Path(path)
        self.files.append({"name": path.name, "sha256": sha256_file(path)})

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "config_hash": self.config_hash,
            "master_seed": self.master_seed,
            "code_version": self.code_version,
            "phase_seconds": self.phase_seconds,
            "phase_seeds": self.phase_seeds,
            "files": self.files,
        }

    def save(self, path):
        return write_json(path, self.to_dict())


class PhaseTimer:
    """Context manager collecting wall-clock per named phase into a manifest."""

    def __init__(self, manifest: RunManifest, name: str):
        self.manifest = manifest
        self.name = name

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.manifest.phase_seconds[self.name] = round(time.perf_counter() - self.t0, 4)
        return False
