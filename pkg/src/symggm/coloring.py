"""Vertex and edge colorings of an undirected graph on ``p`` vertices.

A coloring partitions the vertices into classes that share a diagonal
parameter and groups unordered vertex pairs into classes that share an
off-diagonal parameter.  Pairs that belong to no edge class are structural
zeros.

Indices are 0-based inside the library; the JSON format uses 1-based
indices::

    {"p": 3,
     "vertex_classes": [[1], [2, 3]],
     "edge_classes": [[[1, 2], [1, 3]]],
     "labels": ["a", "b", "c"]}          # optional
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import ColoringError

__all__ = [
    "ColoringScheme",
    "validate_coloring",
    "load_coloring",
    "atomic_coloring",
    "edge_generator",
    "vertex_generator",
    "structural_zero_indicator",
]


Pair = tuple[int, int]


@dataclass(frozen=True, eq=False)
class ColoringScheme:
    """Validated vertex/edge coloring.

    Use :func:`validate_coloring` to build one from user input; the
    constructor assumes its arguments are already consistent.

    Attributes
    ----------
    p : int
        Number of vertices.
    vertex_classes : tuple of tuple of int
        Disjoint, nonempty vertex sets covering ``range(p)``.
    edge_classes : tuple of tuple of (int, int)
        Disjoint, nonempty sets of pairs ``(i, j)`` with ``i < j``.
    labels : tuple of str, optional
        Vertex names used in reports and DOT output.
    """

    p: int
    vertex_classes: tuple[tuple[int, ...], ...]
    edge_classes: tuple[tuple[Pair, ...], ...]
    labels: tuple[str, ...] | None = field(default=None)

    @property
    def n_vertex_classes(self) -> int:
        return len(self.vertex_classes)

    @property
    def n_edge_classes(self) -> int:
        return len(self.edge_classes)

    @cached_property
    def vertex_class_of(self) -> np.ndarray:
        """Length-``p`` array mapping each vertex to its class index."""
        out = np.empty(self.p, dtype=int)
        for m, cls in enumerate(self.vertex_classes):
            out[list(cls)] = m
        return out

    @cached_property
    def edge_class_of(self) -> np.ndarray:
        """``p x p`` symmetric array of edge-class indices, ``-1`` off the edge set."""
        out = np.full((self.p, self.p), -1, dtype=int)
        for s, cls in enumerate(self.edge_classes):
            for i, j in cls:
                out[i, j] = out[j, i] = s
        return out

    @cached_property
    def structural_zeros(self) -> tuple[Pair, ...]:
        iu, ju = np.triu_indices(self.p, k=1)
        mask = self.edge_class_of[iu, ju] < 0
        return tuple((int(i), int(j)) for i, j in zip(iu[mask], ju[mask]))

    @cached_property
    def vertex_sizes(self) -> np.ndarray:
        return np.array([len(c) for c in self.vertex_classes], dtype=int)

    @cached_property
    def edge_sizes(self) -> np.ndarray:
        return np.array([len(c) for c in self.edge_classes], dtype=int)

    @cached_property
    def edge_generators(self) -> np.ndarray:
        """Dense stack of edge generators, shape ``(l, p, p)``."""
        T = np.zeros((self.n_edge_classes, self.p, self.p))
        for s, cls in enumerate(self.edge_classes):
            idx = np.asarray(cls, dtype=int).reshape(-1, 2)
            T[s, idx[:, 0], idx[:, 1]] = 1.0
            T[s, idx[:, 1], idx[:, 0]] = 1.0
        T.setflags(write=False)
        return T

    def vertex_label(self, j: int) -> str:
        return self.labels[j] if self.labels is not None else str(j + 1)

    def permuted(self, perm: Sequence[int]) -> "ColoringScheme":
        """Relabel vertices: old vertex ``perm[k]`` becomes new vertex ``k``."""
        perm = list(perm)
        new_of_old = {old: new for new, old in enumerate(perm)}
        vc = tuple(tuple(sorted(new_of_old[v] for v in cls)) for cls in self.vertex_classes)
        ec = tuple(
            tuple(sorted(tuple(sorted((new_of_old[i], new_of_old[j]))) for i, j in cls))
            for cls in self.edge_classes
        )
        labels = None if self.labels is None else tuple(self.labels[o] for o in perm)
        return ColoringScheme(self.p, vc, ec, labels)

    def to_dict(self) -> dict:
        """JSON-ready dict with 1-based indices."""
        out = {
            "p": self.p,
            "vertex_classes": [[v + 1 for v in cls] for cls in self.vertex_classes],
            "edge_classes": [[[i + 1, j + 1] for i, j in cls] for cls in self.edge_classes],
        }
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out


def validate_coloring(raw: dict, p: int | None = None) -> ColoringScheme:
    """Build a :class:`ColoringScheme` from a parsed JSON description.

    Parameters
    ----------
    raw : dict
        Mapping with ``vertex_classes`` (lists of 1-based vertex indices),
        ``edge_classes`` (lists of 1-based ``[i, j]`` pairs) and optionally
        ``p`` and ``labels``.  Vertices may also be given by label when
        ``labels`` is present.
    p : int, optional
        Expected vertex count; must agree with ``raw["p"]`` if both are given.

    Raises
    ------
    ColoringError
        On overlapping classes, out-of-range indices, self-loops, empty
        classes or a vertex partition that does not cover all vertices.
    """
    if not isinstance(raw, dict):
        raise ColoringError("coloring must be a JSON object")
    raw_p = raw.get("p")
    if p is None and raw_p is None:
        raise ColoringError("vertex count 'p' is missing")
    if p is not None and raw_p is not None and int(raw_p) != int(p):
        raise ColoringError(f"coloring declares p={raw_p} but data has p={p}")
    p = int(p if p is not None else raw_p)
    if p < 1:
        raise ColoringError(f"p must be positive, got {p}")

    labels = raw.get("labels")
    if labels is not None:
        labels = tuple(str(x) for x in labels)
        if len(labels) != p:
            raise ColoringError(f"expected {p} labels, got {len(labels)}")
        if len(set(labels)) != p:
            raise ColoringError("vertex labels must be unique")
    lookup = {lab: k for k, lab in enumerate(labels)} if labels else {}

    def vertex(x, where: str) -> int:
        if isinstance(x, str) and x in lookup:
            return lookup[x]
        try:
            v = int(x)
        except (TypeError, ValueError):
            raise ColoringError(f"{where}: unknown vertex {x!r}") from None
        if isinstance(x, float) and not float(x).is_integer():
            raise ColoringError(f"{where}: non-integer vertex index {x!r}")
        if not 1 <= v <= p:
            raise ColoringError(f"{where}: vertex index {v} outside 1..{p}")
        return v - 1

    vclasses = []
    owner: dict[int, int] = {}
    for m, cls in enumerate(raw.get("vertex_classes", [])):
        where = f"vertex class {m + 1}"
        if not cls:
            raise ColoringError(f"{where} is empty")
        members = []
        for x in cls:
            v = vertex(x, where)
            if v in owner:
                raise ColoringError(
                    f"{where}: vertex {v + 1} already belongs to vertex class {owner[v] + 1}"
                )
            owner[v] = m
            members.append(v)
        vclasses.append(tuple(sorted(members)))
    missing = sorted(set(range(p)) - owner.keys())
    if missing:
        raise ColoringError(
            f"vertex classes do not cover vertices {[v + 1 for v in missing]}"
        )

    eclasses = []
    pair_owner: dict[Pair, int] = {}
    for s, cls in enumerate(raw.get("edge_classes", [])):
        where = f"edge class {s + 1}"
        if not cls:
            raise ColoringError(f"{where} is empty")
        members = []
        for pair in cls:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ColoringError(f"{where}: edge {pair!r} is not a pair")
            i, j = vertex(pair[0], where), vertex(pair[1], where)
            if i == j:
                raise ColoringError(f"{where}: self-loop on vertex {i + 1}")
            key = (min(i, j), max(i, j))
            if key in pair_owner:
                raise ColoringError(
                    f"{where}: edge ({key[0] + 1},{key[1] + 1}) already in edge class "
                    f"{pair_owner[key] + 1}"
                )
            pair_owner[key] = s
            members.append(key)
        eclasses.append(tuple(sorted(members)))

    return ColoringScheme(p, tuple(vclasses), tuple(eclasses), labels)


def load_coloring(path, p: int | None = None) -> ColoringScheme:
    """Read and validate a coloring JSON file."""
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ColoringError(f"{path}: invalid JSON ({exc})") from None
    return validate_coloring(raw, p)


def atomic_coloring(p: int, labels=None) -> ColoringScheme:
    """Every vertex and every pair in its own class (the unconstrained model)."""
    pairs = [(i, j) for i in range(p) for j in range(i + 1, p)]
    return ColoringScheme(
        p,
        tuple((v,) for v in range(p)),
        tuple((pr,) for pr in pairs),
        None if labels is None else tuple(labels),
    )


def edge_generator(scheme: ColoringScheme, s: int) -> np.ndarray:
    """Symmetric 0/1 indicator of edge class ``s`` (0-based)."""
    if not 0 <= s < scheme.n_edge_classes:
        raise IndexError(f"edge class {s} out of range 0..{scheme.n_edge_classes - 1}")
    return np.array(scheme.edge_generators[s])


def vertex_generator(scheme: ColoringScheme, m: int) -> np.ndarray:
    """Diagonal 0/1 indicator of vertex class ``m`` (0-based)."""
    if not 0 <= m < scheme.n_vertex_classes:
        raise IndexError(f"vertex class {m} out of range 0..{scheme.n_vertex_classes - 1}")
    return np.diag((scheme.vertex_class_of == m).astype(float))


def structural_zero_indicator(scheme: ColoringScheme) -> np.ndarray:
    """Symmetric 0/1 indicator of the pairs fixed at zero."""
    Z = (scheme.edge_class_of < 0).astype(float)
    np.fill_diagonal(Z, 0.0)
    return Z
