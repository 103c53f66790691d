"""CSV artifacts and run manifests.

All numeric output uses 17 significant digits (full float64 round-trip),
``.`` decimal separators, and LF line endings, so artifact bodies can be
compared byte for byte across runs and tools.  Every output directory
gets a ``manifest.json`` recording the scenario, seed, grid, package
versions, and a sha256 per file; the manifest timestamp is the only
field allowed to differ between identical runs.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

import numpy as np


def format_number(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> Path:
    """Write columns (all the same length) under a one-line header."""
    path = Path(path)
    lengths = {len(c) for c in columns}
    if len(lengths) != 1:
        raise ValueError("columns must have equal length")
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(format_number(v) for v in row) + "\n")
    return path


def read_csv(path: Path) -> dict[str, np.ndarray]:
    """Read a CSV written by write_csv back into named float columns."""
    with open(path, "r", newline="\n") as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError(f"{path}: empty CSV")
        names = header.split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if any(len(r) != len(names) for r in rows):
        raise ValueError(f"{path}: ragged rows")
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(names)))
    return {name: data[:, i] for i, name in enumerate(names)}


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    return digest.hexdigest()


def write_manifest(out_dir: Path, payload: dict, files: list[Path]) -> Path:
    """Write manifest.json with per-file checksums next to the artifacts."""
    import nmqsd

    out_dir = Path(out_dir)
    manifest = dict(payload)
    manifest["versions"] = {
        "nmqsd": nmqsd.__version__,
        "numpy": np.__version__,
    }
    manifest["files"] = {Path(f).name: sha256_of(f) for f in sorted(files)}
    manifest["created"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    path = out_dir / "manifest.json"
    with open(path, "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
