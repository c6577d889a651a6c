"""Undirected weighted graph model and connectivity checks.

Nodes are 1-based. Edges are canonical ``(i, j)`` pairs with ``i < j``,
stored in lexicographic order; that ordering is the global tie-break used
by every ranking built downstream, so it must never change.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import AbstractSet, Mapping, Tuple

EdgeId = Tuple[int, int]

log = logging.getLogger(__name__)


def canonical_edge(i: int, j: int) -> EdgeId:
    """Return the (low, high) form of a link between two nodes."""
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    """Averaging network with positive link gains.

    Connectivity is checked at construction but only logged as a warning:
    the dynamics stay well-defined on disconnected graphs, and adversary
    action may disconnect the graph mid-run anyway.
    """

    node_count: int
    edges: Tuple[Tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        n = self.node_count
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ValueError(f"node count must be a positive integer, got {n!r}")
        canon = []
        seen: set[EdgeId] = set()
        for entry in self.edges:
            i, j, w = int(entry[0]), int(entry[1]), float(entry[2])
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            i, j = canonical_edge(i, j)
            if not (1 <= i < j <= n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            if not w > 0.0:
                raise ValueError(f"edge ({i}, {j}) has nonpositive weight {w}")
            seen.add((i, j))
            canon.append((i, j, w))
        canon.sort()
        object.__setattr__(self, "edges", tuple(canon))
        object.__setattr__(self, "_edge_ids", tuple((i, j) for i, j, _ in canon))
        object.__setattr__(self, "_weights", {(i, j): w for i, j, w in canon})
        if not is_connected(self):
            log.warning(
                "graph with n=%d, m=%d is disconnected at load", n, len(canon)
            )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def edge_ids(self) -> Tuple[EdgeId, ...]:
        return self._edge_ids  # type: ignore[attr-defined]

    @property
    def weights(self) -> Mapping[EdgeId, float]:
        return self._weights  # type: ignore[attr-defined]

    def weight(self, edge: EdgeId) -> float:
        return self._weights[edge]  # type: ignore[attr-defined]

    def has_edge(self, edge: EdgeId) -> bool:
        return edge in self._weights  # type: ignore[attr-defined]


def is_connected(g: Graph, removed: AbstractSet[EdgeId] = frozenset()) -> bool:
    """True iff ``g`` minus the ``removed`` edges spans all nodes.

    Union-find over the surviving edge list; ``removed`` must be a subset
    of the graph's edges.
    """
    for edge in removed:
        if not g.has_edge(edge):
            raise ValueError(f"removed edge {edge} is not an edge of the graph")
    parent = list(range(g.node_count + 1))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    components = g.node_count
    for i, j in g.edge_ids:
        if (i, j) in removed:
            continue
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            components -= 1
    return components == 1
