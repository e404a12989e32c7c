"""Arrival-ordered directed graphs with one categorical node attribute.

Node ids are dense integers assigned in arrival order, so the id doubles as
the arrival index. Edges point from the newer node to the older one (a
citation). Adjacency is kept in both directions so walks and metrics can
traverse either way. A finished graph is never mutated by the rest of the
package and can be shared freely across threads or worker processes.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from math import ceil

__all__ = [
    "TemporalAttributedDigraph",
    "GraphSnapshot",
    "IngestStats",
    "GraphFileError",
    "weakly_connected_components",
    "bfs_seed_subgraph",
    "induced_subgraph",
    "pair_seed_graph",
    "read_graph",
    "write_graph",
]

NODE_FILE = "nodes.tsv"
EDGE_FILE = "edges.tsv"


class GraphFileError(ValueError):
    """Raised when a node or edge table cannot be parsed."""


@dataclass
class IngestStats:
    """Per-load counters for malformed but tolerated input rows."""

    duplicate_edges: int = 0
    self_loops: int = 0
    temporal_violations: int = 0


class TemporalAttributedDigraph:
    """Directed graph whose nodes arrive one at a time.

    Invariants maintained here: node ids are contiguous ``0..n-1``, there are
    no self loops and no duplicate edges, and out/in adjacency stay mutually
    consistent. Edges from newer to older nodes are the normal case; ingested
    files may violate that, which is counted in :attr:`ingest_stats` rather
    than rejected.
    """

    def __init__(self, attributed: bool | None = None):
        self._epochs: list[int] = []
        self._attrs: list[str | None] = []
        self._out: list[list[int]] = []
        self._in: list[list[int]] = []
        self._edge_keys: set[int] = set()
        self._edge_count = 0
        # one bucket per attribute value (None holds unattributed nodes)
        self._nodes_by_attr: dict[str | None, list[int]] = {}
        self._explicit_attributed = attributed
        self._any_attr = False
        self.ingest_stats = IngestStats()

    # -- construction ------------------------------------------------------

    def add_node(self, epoch: int, attribute: str | None = None) -> int:
        """Append a node, returning its dense id (== arrival index)."""
        node = len(self._epochs)
        self._epochs.append(int(epoch))
        self._attrs.append(attribute)
        self._out.append([])
        self._in.append([])
        self._nodes_by_attr.setdefault(attribute, []).append(node)
        if attribute is not None:
            self._any_attr = True
        return node

    def add_edge(self, src: int, dst: int) -> bool:
        """Insert edge src->dst; False (no-op) if it already exists."""
        n = len(self._epochs)
        if not (0 <= src < n and 0 <= dst < n):
            raise ValueError(f"unknown node id in edge ({src}, {dst})")
        if src == dst:
            raise ValueError(f"self-loop rejected at node {src}")
        key = (src << 32) | dst
        if key in self._edge_keys:
            return False
        self._edge_keys.add(key)
        self._out[src].append(dst)
        self._in[dst].append(src)
        self._edge_count += 1
        return True

    def copy(self) -> "TemporalAttributedDigraph":
        g = TemporalAttributedDigraph(attributed=self._explicit_attributed)
        g._epochs = list(self._epochs)
        g._attrs = list(self._attrs)
        g._out = [list(a) for a in self._out]
        g._in = [list(a) for a in self._in]
        g._edge_keys = set(self._edge_keys)
        g._edge_count = self._edge_count
        g._nodes_by_attr = {k: list(v) for k, v in self._nodes_by_attr.items()}
        g._any_attr = self._any_attr
        return g

    # -- inspection --------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self._epochs)

    @property
    def edge_count(self) -> int:
        return self._edge_count

    @property
    def attributed(self) -> bool:
        """Whether the node table carries an attribute column."""
        if self._explicit_attributed is not None:
            return self._explicit_attributed
        return self._any_attr

    def epoch(self, node: int) -> int:
        return self._epochs[node]

    def attribute(self, node: int) -> str | None:
        return self._attrs[node]

    @property
    def epochs(self) -> list[int]:
        return self._epochs

    @property
    def attributes(self) -> list[str | None]:
        return self._attrs

    def out_neighbors(self, node: int) -> list[int]:
        """Targets cited by ``node``. The returned list must not be mutated."""
        return self._out[node]

    def in_neighbors(self, node: int) -> list[int]:
        """Nodes citing ``node``. The returned list must not be mutated."""
        return self._in[node]

    def out_degree(self, node: int) -> int:
        return len(self._out[node])

    def in_degree(self, node: int) -> int:
        return len(self._in[node])

    def has_edge(self, src: int, dst: int) -> bool:
        return ((src << 32) | dst) in self._edge_keys

    def edges(self):
        """Iterate (src, dst) pairs grouped by source."""
        for src, targets in enumerate(self._out):
            for dst in targets:
                yield src, dst

    def nodes_with_attribute(self, attribute: str | None) -> list[int]:
        """All nodes carrying ``attribute``, in arrival order."""
        return self._nodes_by_attr.get(attribute, [])

    def attribute_pools(self) -> dict[str | None, list[int]]:
        """Node id pools keyed by attribute value; must not be mutated."""
        return self._nodes_by_attr

    def attribute_counts(self) -> dict[str | None, int]:
        return {k: len(v) for k, v in self._nodes_by_attr.items()}

    def snapshot_at(self, cutoff: int) -> "GraphSnapshot":
        """View of the graph restricted to nodes with id <= cutoff."""
        return GraphSnapshot(self, cutoff)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (
            f"<TemporalAttributedDigraph n={self.node_count} "
            f"e={self.edge_count} attributed={self.attributed}>"
        )


class GraphSnapshot:
    """Read-only view of the first ``cutoff + 1`` nodes of a graph.

    Because edges normally point backward in time, out-neighborhoods are
    usually unchanged by the cutoff; both directions are filtered anyway so
    ingested graphs with temporal violations stay consistent.
    """

    def __init__(self, parent: TemporalAttributedDigraph, cutoff: int):
        self.parent = parent
        self.cutoff = cutoff

    @property
    def node_count(self) -> int:
        return min(self.cutoff + 1, self.parent.node_count)

    @property
    def edge_count(self) -> int:
        c = self.cutoff
        total = 0
        for src in range(self.node_count):
            for dst in self.parent.out_neighbors(src):
                if dst <= c:
                    total += 1
        return total

    def contains(self, node: int) -> bool:
        return 0 <= node < self.node_count

    def out_neighbors(self, node: int) -> list[int]:
        c = self.cutoff
        return [v for v in self.parent.out_neighbors(node) if v <= c]

    def in_neighbors(self, node: int) -> list[int]:
        c = self.cutoff
        return [v for v in self.parent.in_neighbors(node) if v <= c]

    def undirected_neighbors(self, node: int) -> list[int]:
        return self.out_neighbors(node) + self.in_neighbors(node)


def weakly_connected_components(graph: TemporalAttributedDigraph) -> list[list[int]]:
    """Partition node ids into components, ignoring edge direction.

    Components are ordered by their oldest member; members in arrival order.
    """
    n = graph.node_count
    labels = [-1] * n
    components: list[list[int]] = []
    for start in range(n):
        if labels[start] >= 0:
            continue
        comp_id = len(components)
        members = [start]
        labels[start] = comp_id
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in graph.out_neighbors(u):
                if labels[v] < 0:
                    labels[v] = comp_id
                    members.append(v)
                    queue.append(v)
            for v in graph.in_neighbors(u):
                if labels[v] < 0:
                    labels[v] = comp_id
                    members.append(v)
                    queue.append(v)
        members.sort()
        components.append(members)
    return components


def induced_subgraph(
    graph: TemporalAttributedDigraph, nodes
) -> TemporalAttributedDigraph:
    """Subgraph on ``nodes`` with ids remapped densely in arrival order."""
    kept = sorted(set(nodes))
    remap = {old: new for new, old in enumerate(kept)}
    sub = TemporalAttributedDigraph(
        attributed=graph._explicit_attributed  # noqa: SLF001 - same module family
    )
    for old in kept:
        sub.add_node(graph.epoch(old), graph.attribute(old))
    for old in kept:
        for dst in graph.out_neighbors(old):
            if dst in remap:
                sub.add_edge(remap[old], remap[dst])
    return sub


def bfs_seed_subgraph(
    graph: TemporalAttributedDigraph, start: int = 0, fraction: float = 0.001
) -> TemporalAttributedDigraph:
    """Small weakly connected subgraph found by undirected BFS from ``start``.

    The search halts after visiting ``ceil(fraction * n)`` nodes and the
    subgraph induced on the visited set is returned. ``start`` is normally 0,
    the oldest node. Neighbor ties are broken by adjacency insertion order,
    so the result is deterministic.
    """
    if graph.node_count == 0:
        raise ValueError("cannot seed from an empty graph")
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    budget = ceil(fraction * graph.node_count)
    visited = [start]
    seen = {start}
    queue = deque([start])
    while queue and len(visited) < budget:
        u = queue.popleft()
        for v in graph.out_neighbors(u):
            if v not in seen:
                seen.add(v)
                visited.append(v)
                queue.append(v)
                if len(visited) >= budget:
                    break
        if len(visited) >= budget:
            break
        for v in graph.in_neighbors(u):
            if v not in seen:
                seen.add(v)
                visited.append(v)
                queue.append(v)
                if len(visited) >= budget:
                    break
    return induced_subgraph(graph, visited)


def pair_seed_graph(
    epoch: int = 0, attributes: tuple[str | None, str | None] = (None, None)
) -> TemporalAttributedDigraph:
    """Minimal weakly connected starting graph: two nodes, one edge 1 -> 0."""
    g = TemporalAttributedDigraph()
    g.add_node(epoch, attributes[0])
    g.add_node(epoch, attributes[1])
    g.add_edge(1, 0)
    return g


# -- file I/O ---------------------------------------------------------------
#
# Node table: UTF-8 TSV, header ``node_id<TAB>epoch<TAB>attribute``; the
# attribute column is optional and an empty field means "missing". Edge list:
# header ``src<TAB>dst``. Rows are sorted on write so a load/save round trip
# is byte identical.


def _check_label(label: str | None) -> str:
    if label is None:
        return ""
    if "\t" in label or "\n" in label:
        raise ValueError(f"attribute label contains tab/newline: {label!r}")
    return label


def write_graph(graph: TemporalAttributedDigraph, directory: str | os.PathLike) -> None:
    """Write ``nodes.tsv`` and ``edges.tsv`` into ``directory``."""
    os.makedirs(directory, exist_ok=True)
    node_path = os.path.join(directory, NODE_FILE)
    edge_path = os.path.join(directory, EDGE_FILE)
    attributed = graph.attributed
    with open(node_path, "w", encoding="utf-8", newline="\n") as fh:
        if attributed:
            fh.write("node_id\tepoch\tattribute\n")
            for node in range(graph.node_count):
                label = _check_label(graph.attribute(node))
                fh.write(f"{node}\t{graph.epoch(node)}\t{label}\n")
        else:
            fh.write("node_id\tepoch\n")
            for node in range(graph.node_count):
                fh.write(f"{node}\t{graph.epoch(node)}\n")
    edges = sorted(graph.edges())
    with open(edge_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("src\tdst\n")
        for src, dst in edges:
            fh.write(f"{src}\t{dst}\n")


def read_graph(directory: str | os.PathLike) -> TemporalAttributedDigraph:
    """Load a graph written by :func:`write_graph` (or compatible files).

    Duplicate edges and self loops are dropped, edges pointing forward in
    time are kept; all three are counted in ``graph.ingest_stats``.
    """
    node_path = os.path.join(directory, NODE_FILE)
    edge_path = os.path.join(directory, EDGE_FILE)

    with open(node_path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        cols = header.split("\t")
        if cols[:2] != ["node_id", "epoch"] or len(cols) > 3:
            raise GraphFileError(f"{node_path}:1: bad header {header!r}")
        attributed = len(cols) == 3 and cols[2] == "attribute"
        if len(cols) == 3 and not attributed:
            raise GraphFileError(f"{node_path}:1: bad header {header!r}")
        graph = TemporalAttributedDigraph(attributed=attributed)
        expected_cols = 3 if attributed else 2
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != expected_cols:
                raise GraphFileError(
                    f"{node_path}:{lineno}: expected {expected_cols} fields, "
                    f"got {len(parts)}"
                )
            try:
                node_id = int(parts[0])
                epoch = int(parts[1])
            except ValueError as exc:
                raise GraphFileError(f"{node_path}:{lineno}: {exc}") from None
            if node_id != graph.node_count:
                raise GraphFileError(
                    f"{node_path}:{lineno}: node ids must be dense and "
                    f"ascending (expected {graph.node_count}, got {node_id})"
                )
            attr = parts[2] if attributed and parts[2] != "" else None
            graph.add_node(epoch, attr)

    stats = graph.ingest_stats
    with open(edge_path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header.split("\t") != ["src", "dst"]:
            raise GraphFileError(f"{edge_path}:1: bad header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise GraphFileError(
                    f"{edge_path}:{lineno}: expected 2 fields, got {len(parts)}"
                )
            try:
                src, dst = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise GraphFileError(f"{edge_path}:{lineno}: {exc}") from None
            if not (0 <= src < graph.node_count and 0 <= dst < graph.node_count):
                raise GraphFileError(
                    f"{edge_path}:{lineno}: edge ({src}, {dst}) references "
                    "an unknown node"
                )
            if src == dst:
                stats.self_loops += 1
                continue
            if src < dst:
                stats.temporal_violations += 1
            if not graph.add_edge(src, dst):
                stats.duplicate_edges += 1
    return graph
