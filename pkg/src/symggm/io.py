"""Plain-text readers and writers: CSV data, JSON reports, DOT graphs, run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
import re
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .coloring import ColoringScheme
from .exceptions import DataError

__all__ = [
    "read_data_csv",
    "write_json",
    "write_csv",
    "write_matrix_csv",
    "to_dot",
    "parse_dot",
    "file_sha256",
    "config_hash",
    "build_manifest",
]


def _to_builtin(obj):
    if isinstance(obj, dict):
        return {str(k): _to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_builtin(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None if np.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_data_csv(path, header: bool | None = None) -> tuple[np.ndarray, list[str] | None]:
    """Read an ``n x p`` numeric CSV.

    ``header=None`` treats the first row as column names when any field in
    it is not a number.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(x.strip() for x in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    if not rows:
        raise DataError(f"{path} is empty")
    names = None
    if header or (header is None and not all(_is_number(x) for x in rows[0])):
        names = [x.strip() for x in rows[0]]
        rows = rows[1:]
    width = len(rows[0]) if rows else 0
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DataError(f"{path}: row {i + 1} has {len(r)} fields, expected {width}")
    try:
        X = np.array([[float(x) for x in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric entry ({exc})") from None
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError(f"{path} has no data rows")
    return X, names


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_to_builtin(obj), indent=2) + "\n")
    return path


def write_csv(path, rows: list[dict], fieldnames=None) -> Path:
    """Write dict rows; columns default to the union of keys in first-seen order."""
    path = Path(path)
    if fieldnames is None:
        fieldnames = []
        for r in rows:
            fieldnames += [k for k in r if k not in fieldnames]
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(r.get(k, "")) for k in fieldnames})
    return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_matrix_csv(path, M: np.ndarray, labels=None) -> Path:
    M = np.asarray(M, dtype=float)
    labels = list(labels) if labels is not None else [str(i + 1) for i in range(M.shape[0])]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([""] + labels)
        for lab, row in zip(labels, M):
            w.writerow([lab] + [repr(float(x)) for x in row])
    return Path(path)


def _labels(scheme: ColoringScheme) -> list[str]:
    return [scheme.vertex_label(j) for j in range(scheme.p)]


def to_dot(scheme: ColoringScheme, params, name: str = "G") -> str:
    """Undirected DOT graph of the nonzero edge classes.

    Every vertex is listed with its vertex class; every pair in a nonzero
    edge class becomes an edge carrying the class number (1-based) and value.
    """
    labels = _labels(scheme)
    edge = np.asarray(params.edge)
    lines = [f"graph {name} {{"]
    for j in range(scheme.p):
        m = int(scheme.vertex_class_of[j])
        lines.append(f'  "{labels[j]}" [vclass={m + 1}];')
    for s, cls in enumerate(scheme.edge_classes):
        if edge[s] == 0:
            continue
        for i, j in cls:
            lines.append(
                f'  "{labels[i]}" -- "{labels[j]}" [eclass={s + 1}, label="{edge[s]:.6g}"];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"


_EDGE_RE = re.compile(r'"([^"]+)"\s*--\s*"([^"]+)"\s*\[eclass=(\d+)')


def parse_dot(text: str) -> list[tuple[str, str, int]]:
    """Edges ``(u, v, edge_class)`` from DOT written by :func:`to_dot` (class 0-based)."""
    return [(u, v, int(c) - 1) for u, v, c in _EDGE_RE.findall(text)]


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config: dict) -> str:
    blob = json.dumps(_to_builtin(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def build_manifest(command: str, config: dict, inputs: dict | None = None,
                   outputs: list | None = None, seed=None) -> dict:
    """Record of one run.  Outputs of identical manifests (up to timestamps) are identical."""
    from . import __version__

    inputs = {k: v for k, v in (inputs or {}).items() if v is not None}
    return {
        "command": command,
        "tool_version": __version__,
        "seed": seed,
        "config": _to_builtin(config),
        "config_hash": config_hash(config),
        "inputs": {k: {"path": str(v), "sha256": file_sha256(v)} for k, v in inputs.items()},
        "outputs": sorted(str(o) for o in (outputs or [])),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
