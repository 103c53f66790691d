"""CSV schemas produced by the nmqsd CLI.

The plotting tool never recomputes physics: it renders exactly what the
primary tool wrote, including any reference columns.  Readers validate
headers up front and report missing or unexpected columns by name.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

#: required columns per schema; extra columns are allowed where noted
SCHEMAS = {
    "lambda": {"required": ["t", "re_lambda", "im_lambda", "abs_lambda"],
               "optional": ["re_ref", "im_ref", "abs_ref"]},
    "spectrum": {"required": ["n", "lambda"], "optional": ["lambda_ref"]},
    "covariance": {"required": ["t", "s", "re_C", "im_C", "stderr"], "optional": []},
    "kernel": {"required": ["t", "s", "re_K", "im_K"], "optional": []},
    "rho": {"required": ["t", "i", "j", "re_rho", "im_rho", "stderr"], "optional": []},
    "residuals": {"required": ["kind", "t", "value", "threshold"], "optional": []},
}


class SchemaError(ValueError):
    """Input file does not match the documented artifact schema."""


def read_table(path: Path, schema: str) -> dict[str, np.ndarray]:
    """Read a CSV and validate its header against a named schema."""
    spec = SCHEMAS[schema]
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file not found")
    with open(path, "r", newline="") as fh:
        header_line = fh.readline().strip()
        if not header_line:
            raise SchemaError(f"{path}: empty CSV (no header)")
        names = header_line.split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]

    missing = [c for c in spec["required"] if c not in names]
    unknown = [c for c in names if c not in spec["required"] + spec["optional"]]
    if missing or unknown:
        parts = []
        if missing:
            parts.append(f"missing columns {missing}")
        if unknown:
            parts.append(f"unexpected columns {unknown}")
        raise SchemaError(f"{path}: schema {schema!r} mismatch: " + "; ".join(parts))
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    if any(len(r) != len(names) for r in rows):
        raise SchemaError(f"{path}: ragged rows")

    numeric = {}
    for i, name in enumerate(names):
        column = [r[i] for r in rows]
        if name == "kind":
            numeric[name] = np.array(column)
        else:
            try:
                numeric[name] = np.array(column, dtype=float)
            except ValueError as exc:
                raise SchemaError(f"{path}: column {name!r} is not numeric: {exc}") from None
    return numeric


def square_from_pairs(ts: np.ndarray, ss: np.ndarray, values: np.ndarray):
    """Reshape (t, s, value) triples back into a square matrix."""
    times = np.unique(ts)
    n = times.size
    if ts.size != n * n:
        raise SchemaError(f"pairwise table is not a full {n}x{n} grid")
    matrix = np.full((n, n), np.nan)
    t_idx = np.searchsorted(times, ts)
    s_idx = np.searchsorted(times, ss)
    matrix[t_idx, s_idx] = values
    if np.any(np.isnan(matrix)):
        raise SchemaError("pairwise table has holes")
    return times, matrix
