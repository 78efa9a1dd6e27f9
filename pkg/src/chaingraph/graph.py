"""Labeled undirected graphs over network units.

The graph is the skeleton of the outcome block: nodes are units
(e.g. justices), edges are pairwise interactions. Edges are unordered
label pairs stored once in lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def canonical_edge(u: str, v: str) -> tuple[str, str]:
    """Return the unordered pair (u, v) in lexicographic order."""
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class NetworkGraph:
    """Undirected graph with string node labels and no self-loops.

    ``node_labels`` fixes the node order used by every vector quantity
    (outcomes, fields, treatments) downstream.
    """

    node_labels: tuple[str, ...]
    edges: frozenset[tuple[str, str]] = field(default_factory=frozenset)

    def __post_init__(self):
        labels = tuple(self.node_labels)
        if len(labels) < 1:
            raise ValueError("graph needs at least one node")
        if len(set(labels)) != len(labels):
            raise ValueError("node labels must be unique")
        object.__setattr__(self, "node_labels", labels)
        label_set = set(labels)
        canon = set()
        for e in self.edges:
            u, v = e
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if u not in label_set or v not in label_set:
                raise ValueError(f"edge {e!r} references unknown label")
            canon.add(canonical_edge(u, v))
        object.__setattr__(self, "edges", frozenset(canon))

    @property
    def n(self) -> int:
        return len(self.node_labels)

    def index(self, label: str) -> int:
        try:
            return self.node_labels.index(label)
        except ValueError:
            raise KeyError(f"unknown node label {label!r}") from None

    def edge_list(self) -> list[tuple[str, str]]:
        """Edges in a deterministic (sorted) order; fixes the edge
        indexing used by parameter vectors."""
        return sorted(self.edges)

    def edge_index_pairs(self) -> list[tuple[int, int]]:
        """Edge endpoints as node indices, aligned with edge_list()."""
        idx = {lab: i for i, lab in enumerate(self.node_labels)}
        return [(idx[u], idx[v]) for u, v in self.edge_list()]

    def has_edge(self, u: str, v: str) -> bool:
        return canonical_edge(u, v) in self.edges

    def neighbors(self, label: str) -> list[str]:
        self.index(label)
        out = []
        for u, v in self.edges:
            if u == label:
                out.append(v)
            elif v == label:
                out.append(u)
        return sorted(out)

    def nonadjacent_pairs(self) -> list[tuple[str, str]]:
        """Unordered pairs of distinct nodes that do not share an edge."""
        labs = self.node_labels
        return [
            (labs[i], labs[j])
            for i in range(len(labs))
            for j in range(i + 1, len(labs))
            if not self.has_edge(labs[i], labs[j])
        ]

    def relabel(self, mapping: dict[str, str]) -> "NetworkGraph":
        """Graph with every label renamed through ``mapping``."""
        new_labels = tuple(mapping[l] for l in self.node_labels)
        new_edges = frozenset(
            canonical_edge(mapping[u], mapping[v]) for u, v in self.edges
        )
        return NetworkGraph(new_labels, new_edges)


def complete_graph(labels: tuple[str, ...] | list[str]) -> NetworkGraph:
    labels = tuple(labels)
    edges = frozenset(
        canonical_edge(labels[i], labels[j])
        for i in range(len(labels))
        for j in range(i + 1, len(labels))
    )
    return NetworkGraph(labels, edges)
