"""Graph files to structure vectors.

Two extraction modes exist because two different things can be under
attack: a single node's connections (one adjacency-matrix row, excluding
the diagonal entry) or the whole graph (the upper triangle, flattened
row by row). Both orderings are fixed here and nowhere else; the inverse
reconstruction lives next to the forward map so round-trip tests keep
them honest.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .bitspace import StructureVector

__all__ = [
    "Graph",
    "GraphFormatError",
    "graph_from_upper_triangle",
    "load_graph",
    "load_labels",
    "neighbor_order",
    "structure_vector_for_graph",
    "structure_vector_for_node",
    "upper_triangle_pairs",
]


class GraphFormatError(ValueError):
    """Input file problem; the message carries the file and line."""


@dataclass(frozen=True)
class Graph:
    num_nodes: int
    edges: Tuple[Tuple[int, int], ...]
    labels: Optional[Dict[int, int]] = None
    _edge_set: FrozenSet[Tuple[int, int]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.num_nodes < 1:
            raise ValueError("graph needs at least one node")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < self.num_nodes and 0 <= v < self.num_nodes):
                raise ValueError(f"edge ({u}, {v}) endpoint out of range")
            if u > v:
                raise ValueError(f"edge ({u}, {v}) not stored as a sorted pair")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
        object.__setattr__(self, "_edge_set", frozenset(seen))
        if self.labels is not None:
            for node, label in self.labels.items():
                if not 0 <= node < self.num_nodes:
                    raise ValueError(f"label for out-of-range node {node}")
                if label < 0:
                    raise ValueError(f"negative label {label} for node {node}")

    @classmethod
    def from_edges(
        cls,
        num_nodes: int,
        edges: Sequence[Tuple[int, int]],
        labels: Optional[Dict[int, int]] = None,
    ) -> "Graph":
        normalized = sorted({(min(u, v), max(u, v)) for u, v in edges})
        return cls(num_nodes=num_nodes, edges=tuple(normalized), labels=labels)

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self._edge_set

    def degree(self, u: int) -> int:
        return sum(1 for a, b in self.edges if a == u or b == u)


def load_labels(path: str) -> Dict[int, int]:
    """Node labels from an "id label" per-line file; '#' starts a comment."""
    labels: Dict[int, int] = {}
    try:
        handle = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise GraphFormatError(f"{path}: cannot open labels file: {exc}") from exc
    with handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphFormatError(
                    f"{path}:{lineno}: expected 'id label', got {raw.strip()!r}"
                )
            try:
                node, label = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise GraphFormatError(
                    f"{path}:{lineno}: non-integer field in {raw.strip()!r}"
                ) from exc
            if node in labels:
                raise GraphFormatError(f"{path}:{lineno}: duplicate label for node {node}")
            labels[node] = label
    return labels


def load_graph(path: str) -> Graph:
    """Whitespace edge list, one "u v" per line.

    Comments start with '#'. Two comment directives are understood:
    "# nodes N" pins the node count (otherwise it is max endpoint + 1)
    and "# labels FILE" pulls per-node labels from FILE, resolved
    relative to the graph file. Reversed and repeated edges collapse to
    one.
    """
    declared_nodes: Optional[int] = None
    labels_file: Optional[str] = None
    pairs: List[Tuple[int, int]] = []
    try:
        handle = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise GraphFormatError(f"{path}: cannot open graph file: {exc}") from exc
    with handle:
        for lineno, raw in enumerate(handle, start=1):
            stripped = raw.strip()
            if stripped.startswith("#"):
                tokens = stripped[1:].split()
                if len(tokens) == 2 and tokens[0] == "nodes":
                    try:
                        declared_nodes = int(tokens[1])
                    except ValueError as exc:
                        raise GraphFormatError(
                            f"{path}:{lineno}: bad node count {tokens[1]!r}"
                        ) from exc
                    if declared_nodes < 1:
                        raise GraphFormatError(
                            f"{path}:{lineno}: node count must be positive"
                        )
                elif len(tokens) == 2 and tokens[0] == "labels":
                    labels_file = tokens[1]
                continue
            line = stripped.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphFormatError(
                    f"{path}:{lineno}: expected 'u v', got {raw.strip()!r}"
                )
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise GraphFormatError(
                    f"{path}:{lineno}: non-integer endpoint in {raw.strip()!r}"
                ) from exc
            if u < 0 or v < 0:
                raise GraphFormatError(f"{path}:{lineno}: negative node id")
            if u == v:
                raise GraphFormatError(f"{path}:{lineno}: self-loop at node {u}")
            if declared_nodes is not None and (
                u >= declared_nodes or v >= declared_nodes
            ):
                raise GraphFormatError(
                    f"{path}:{lineno}: endpoint beyond declared node count "
                    f"{declared_nodes}"
                )
            pairs.append((min(u, v), max(u, v)))

    if declared_nodes is None:
        if not pairs:
            raise GraphFormatError(f"{path}: no edges and no '# nodes N' directive")
        declared_nodes = max(max(p) for p in pairs) + 1

    labels: Optional[Dict[int, int]] = None
    if labels_file is not None:
        resolved = os.path.join(os.path.dirname(os.path.abspath(path)), labels_file)
        labels = load_labels(resolved)
        for node in labels:
            if node >= declared_nodes:
                raise GraphFormatError(
                    f"{resolved}: label for node {node} outside graph of "
                    f"{declared_nodes} nodes"
                )

    return Graph(
        num_nodes=declared_nodes, edges=tuple(sorted(set(pairs))), labels=labels
    )


def neighbor_order(g: Graph, u: int) -> List[int]:
    """All nodes except u, ascending: the coordinate order of u's row vector."""
    if not 0 <= u < g.num_nodes:
        raise ValueError(f"node {u} outside graph of {g.num_nodes} nodes")
    return [v for v in range(g.num_nodes) if v != u]


def structure_vector_for_node(g: Graph, u: int) -> StructureVector:
    """Row u of the adjacency matrix without its diagonal entry."""
    if g.num_nodes < 2:
        raise ValueError("node task needs at least two nodes")
    order = neighbor_order(g, u)
    bits = 0
    for j, v in enumerate(order):
        if g.has_edge(u, v):
            bits |= 1 << j
    return StructureVector(bits, g.num_nodes - 1)


def upper_triangle_pairs(num_nodes: int) -> List[Tuple[int, int]]:
    """Pairs (i, j) with i < j in the fixed flattening order."""
    return [(i, j) for i in range(num_nodes) for j in range(i + 1, num_nodes)]


def _pair_index(i: int, j: int, num_nodes: int) -> int:
    # row-major upper triangle: rows 0..i-1 contribute (V-1) + ... + (V-i)
    return i * (2 * num_nodes - i - 1) // 2 + (j - i - 1)


def structure_vector_for_graph(g: Graph) -> StructureVector:
    """The whole upper triangle as one vector."""
    if g.num_nodes < 2:
        raise ValueError("graph task needs at least two nodes")
    n = g.num_nodes * (g.num_nodes - 1) // 2
    bits = 0
    for u, v in g.edges:
        bits |= 1 << _pair_index(u, v, g.num_nodes)
    return StructureVector(bits, n)


def graph_from_upper_triangle(
    vec: StructureVector, num_nodes: int, labels: Optional[Dict[int, int]] = None
) -> Graph:
    """Inverse of structure_vector_for_graph."""
    expected = num_nodes * (num_nodes - 1) // 2
    if vec.n != expected:
        raise ValueError(
            f"vector dimension {vec.n} does not match {num_nodes} nodes "
            f"(expected {expected})"
        )
    edges = [
        pair
        for idx, pair in enumerate(upper_triangle_pairs(num_nodes))
        if vec.bit(idx)
    ]
    return Graph(num_nodes=num_nodes, edges=tuple(edges), labels=labels)
