"""Structural and mixing measurements for arrival-ordered digraphs.

Conventions used throughout:

* The neighborhood behind local clustering is the in-neighborhood, and the
  coefficient counts directed edges among ordered pairs of in-neighbors:
  ``C_i = |{(a, b): a -> i, b -> i, a -> b}| / (k_i * (k_i - 1))``.
  Nodes with in-degree below 2 have no coefficient and are excluded from
  distributions and curves.
* Attribute assortativity is the ratio of observed to maximum modularity of
  the edge mixing matrix; edges with an unattributed endpoint are ignored.
* Path-based measures (effective diameter, path length, proximity) treat
  edges as undirected.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .graph import GraphSnapshot, TemporalAttributedDigraph

__all__ = [
    "MixingMatrix",
    "DegreeClusteringCurve",
    "LognormalFit",
    "in_degrees",
    "out_degrees",
    "local_clustering",
    "local_clustering_values",
    "mean_local_clustering",
    "ks_statistic",
    "wre",
    "global_assortativity",
    "local_assortativity",
    "local_assortativity_values",
    "effective_diameter",
    "sampled_distances",
    "mean_path_length",
    "dpl_exponent",
    "densification_series",
    "lognormal_fit",
    "proximity_statistic",
    "mean_proximity",
    "permutation_test_one_sided",
]


def in_degrees(graph: TemporalAttributedDigraph) -> np.ndarray:
    n = graph.node_count
    return np.fromiter((graph.in_degree(v) for v in range(n)), np.int64, count=n)


def out_degrees(graph: TemporalAttributedDigraph) -> np.ndarray:
    n = graph.node_count
    return np.fromiter((graph.out_degree(v) for v in range(n)), np.int64, count=n)


def _csr_adjacency(graph: TemporalAttributedDigraph) -> sparse.csr_matrix:
    n = graph.node_count
    e = graph.edge_count
    src = np.empty(e, dtype=np.int64)
    dst = np.empty(e, dtype=np.int64)
    i = 0
    for s, d in graph.edges():
        src[i] = s
        dst[i] = d
        i += 1
    data = np.ones(e, dtype=np.int32)
    return sparse.csr_matrix((data, (src, dst)), shape=(n, n))


# -- clustering ---------------------------------------------------------------


def local_clustering(graph: TemporalAttributedDigraph, node: int) -> float | None:
    """Directed clustering of ``node``'s in-neighborhood; None if undefined."""
    nbrs = graph.in_neighbors(node)
    k = len(nbrs)
    if k < 2:
        return None
    nset = set(nbrs)
    among = 0
    for a in nbrs:
        for v in graph.out_neighbors(a):
            if v in nset:
                among += 1
    return among / (k * (k - 1))


def local_clustering_values(
    graph: TemporalAttributedDigraph,
) -> tuple[np.ndarray, np.ndarray]:
    """(node ids, coefficients) for every node with in-degree >= 2.

    Vectorized: with adjacency A, the directed-edge count among in-neighbors
    of i is ``sum_a A[a,i] * (A @ A)[a,i]``.
    """
    k = in_degrees(graph)
    if graph.edge_count == 0 or not np.any(k >= 2):
        return np.empty(0, dtype=np.int64), np.empty(0)
    adj = _csr_adjacency(graph)
    two_paths = adj @ adj
    among = np.asarray(adj.multiply(two_paths).sum(axis=0)).ravel()
    nodes = np.nonzero(k >= 2)[0]
    kk = k[nodes].astype(np.float64)
    values = among[nodes] / (kk * (kk - 1.0))
    return nodes, values


def mean_local_clustering(graph: TemporalAttributedDigraph) -> float:
    """Mean coefficient over the nodes where it is defined."""
    _, values = local_clustering_values(graph)
    if values.size == 0:
        raise ValueError("no node has in-degree >= 2")
    return float(values.mean())


@dataclass
class DegreeClusteringCurve:
    """Mean local clustering conditioned on in-degree."""

    degrees: np.ndarray  # ascending in-degrees with at least one defined node
    counts: np.ndarray  # number of nodes per degree bin
    mean_clustering: np.ndarray

    @classmethod
    def from_graph(cls, graph: TemporalAttributedDigraph) -> "DegreeClusteringCurve":
        nodes, values = local_clustering_values(graph)
        if nodes.size == 0:
            return cls(np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0))
        k = in_degrees(graph)[nodes]
        degrees, inverse, counts = np.unique(k, return_inverse=True, return_counts=True)
        sums = np.zeros(degrees.size)
        np.add.at(sums, inverse, values)
        return cls(degrees, counts, sums / counts)

    def as_dict(self) -> dict[int, tuple[int, float]]:
        return {
            int(d): (int(n), float(c))
            for d, n, c in zip(self.degrees, self.counts, self.mean_clustering)
        }


def wre(observed: DegreeClusteringCurve, model: DegreeClusteringCurve) -> float:
    """Node-count-weighted relative error between two degree-clustering curves.

    Weights are the observed node counts over bins with positive observed
    clustering; degrees the model never produces count as zero clustering
    (maximal penalty for that bin).
    """
    mask = observed.mean_clustering > 0.0
    if not np.any(mask):
        raise ValueError("observed curve has no bins with positive clustering")
    degrees = observed.degrees[mask]
    c_obs = observed.mean_clustering[mask]
    weights = observed.counts[mask].astype(np.float64)
    weights /= weights.sum()
    model_map = {int(d): float(c) for d, c in zip(model.degrees, model.mean_clustering)}
    c_model = np.array([model_map.get(int(d), 0.0) for d in degrees])
    return float(np.sum(weights * np.abs(c_obs - c_model) / c_obs))


# -- distribution comparison --------------------------------------------------


def ks_statistic(sample_a, sample_b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic: sup |ECDF_a - ECDF_b|."""
    a = np.sort(np.asarray(sample_a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(sample_b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("KS statistic needs two nonempty samples")
    xs = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, xs, side="right") / a.size
    cdf_b = np.searchsorted(b, xs, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


def lognormal_fit(in_degree_sample) -> "LognormalFit":
    """Maximum-likelihood lognormal parameters of the positive degrees.

    Zero in-degrees are dropped (their log is undefined); mu and sigma are
    the mean and population standard deviation of log degree.
    """
    degrees = np.asarray(in_degree_sample, dtype=np.float64).ravel()
    positive = degrees[degrees >= 1.0]
    if positive.size < 2:
        raise ValueError("need at least 2 positive in-degrees")
    logs = np.log(positive)
    return LognormalFit(float(logs.mean()), float(logs.std()))


@dataclass(frozen=True)
class LognormalFit:
    mu: float
    sigma: float


# -- attribute mixing ---------------------------------------------------------


@dataclass
class MixingMatrix:
    """Edge fractions by (source attribute, target attribute).

    Built from the edges whose two endpoints both carry an attribute; entries
    sum to 1.
    """

    labels: list[str]
    matrix: np.ndarray

    @classmethod
    def from_graph(cls, graph: TemporalAttributedDigraph) -> "MixingMatrix":
        counts: dict[tuple[str, str], int] = {}
        attrs = graph.attributes
        for src, dst in graph.edges():
            a, b = attrs[src], attrs[dst]
            if a is None or b is None:
                continue
            counts[(a, b)] = counts.get((a, b), 0) + 1
        if not counts:
            raise ValueError("no edges with attributes on both endpoints")
        labels = sorted({a for a, _ in counts} | {b for _, b in counts})
        index = {label: i for i, label in enumerate(labels)}
        matrix = np.zeros((len(labels), len(labels)))
        for (a, b), c in counts.items():
            matrix[index[a], index[b]] = c
        matrix /= matrix.sum()
        return cls(labels, matrix)

    @property
    def row_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    @property
    def same_fraction(self) -> float:
        return float(np.trace(self.matrix))

    @property
    def null_term(self) -> float:
        """Expected same-attribute fraction under random rewiring."""
        return float(self.row_sums @ self.col_sums)


def global_assortativity(graph: TemporalAttributedDigraph) -> float:
    """Attribute assortativity: observed over maximum modularity."""
    mixing = MixingMatrix.from_graph(graph)
    null = mixing.null_term
    if abs(1.0 - null) < 1e-12:
        raise ValueError("assortativity undefined: a single attribute class")
    return (mixing.same_fraction - null) / (1.0 - null)


def _undirected_sets(graph, node):
    return set(graph.out_neighbors(node)) | set(graph.in_neighbors(node))


def _same_attribute_fraction(graph, node) -> float | None:
    """Fraction of ``node``'s incident edges whose other endpoint shares its
    attribute; endpoints without an attribute are ignored."""
    attr = graph.attribute(node)
    if attr is None:
        return None
    same = 0
    total = 0
    for v in graph.out_neighbors(node):
        other = graph.attribute(v)
        if other is None:
            continue
        total += 1
        same += other == attr
    for v in graph.in_neighbors(node):
        other = graph.attribute(v)
        if other is None:
            continue
        total += 1
        same += other == attr
    if total == 0:
        return None
    return same / total


def local_assortativity(
    graph: TemporalAttributedDigraph,
    node: int,
    mixing: MixingMatrix | None = None,
) -> float | None:
    """Assortativity concentrated on ``node``'s two-hop neighborhood.

    The observed term averages, uniformly over the nodes within undirected
    distance 2 of ``node`` (excluding the node itself), each node's fraction
    of same-attribute incident edges; the null term comes from the global
    mixing matrix. Returns None when the neighborhood has no usable node.
    """
    if mixing is None:
        mixing = MixingMatrix.from_graph(graph)
    null = mixing.null_term
    if abs(1.0 - null) < 1e-12:
        raise ValueError("assortativity undefined: a single attribute class")
    one_hop = _undirected_sets(graph, node)
    two_hop = set(one_hop)
    for v in one_hop:
        two_hop |= _undirected_sets(graph, v)
    two_hop.discard(node)
    if not two_hop:
        return None
    fractions = [_same_attribute_fraction(graph, v) for v in sorted(two_hop)]
    fractions = [f for f in fractions if f is not None]
    if not fractions:
        return None
    observed = sum(fractions) / len(fractions)
    return (observed - null) / (1.0 - null)


def local_assortativity_values(
    graph: TemporalAttributedDigraph,
    nodes=None,
) -> np.ndarray:
    """Local assortativity over ``nodes`` (default: all), skipping undefined."""
    mixing = MixingMatrix.from_graph(graph)
    if nodes is None:
        nodes = range(graph.node_count)
    values = []
    for node in nodes:
        r = local_assortativity(graph, node, mixing)
        if r is not None:
            values.append(r)
    return np.asarray(values)


# -- path-based measures --------------------------------------------------------

_SOURCE_BATCH = 32


def sampled_distances(
    graph: TemporalAttributedDigraph, sample_size: int, rng_seed: int = 0
) -> np.ndarray:
    """Finite undirected distances from sampled source nodes to all others.

    Uses every node as a source when the graph has at most ``sample_size``
    nodes (exact mode). Deterministic for a fixed seed.
    """
    n = graph.node_count
    if n == 0:
        raise ValueError("empty graph")
    if sample_size < 1:
        raise ValueError("sample_size must be >= 1")
    if n <= sample_size:
        sources = np.arange(n)
    else:
        sources = np.sort(
            np.random.default_rng(rng_seed).choice(n, size=sample_size, replace=False)
        )
    adj = _csr_adjacency(graph)
    collected = []
    for start in range(0, sources.size, _SOURCE_BATCH):
        batch = sources[start : start + _SOURCE_BATCH]
        dist = sparse.csgraph.dijkstra(
            adj, directed=False, unweighted=True, indices=batch
        )
        finite = dist[np.isfinite(dist) & (dist > 0)]
        collected.append(finite)
    return np.concatenate(collected) if collected else np.empty(0)


def effective_diameter(
    graph: TemporalAttributedDigraph, sample_size: int = 100, rng_seed: int = 0
) -> float:
    """90th percentile of the pairwise undirected distance distribution.

    The percentile takes the smallest observed distance at or above the cut,
    so a census of {1 x 100, 2 x 4950} gives exactly 2. Exact when the graph
    has at most ``sample_size`` nodes, otherwise estimated from BFS over the
    sampled sources.
    """
    distances = sampled_distances(graph, sample_size, rng_seed)
    if distances.size == 0:
        raise ValueError("no finite distances: graph too small or edgeless")
    return float(np.percentile(distances, 90, method="higher"))


def mean_path_length(
    graph: TemporalAttributedDigraph, sample_size: int = 100, rng_seed: int = 0
) -> float:
    """Mean undirected distance over the sampled source-target pairs."""
    distances = sampled_distances(graph, sample_size, rng_seed)
    if distances.size == 0:
        raise ValueError("no finite distances: graph too small or edgeless")
    return float(distances.mean())


# -- densification ---------------------------------------------------------------


def densification_series(
    graph: TemporalAttributedDigraph, num_snapshots: int = 10
) -> list[tuple[int, int]]:
    """(node count, edge count) at evenly spaced arrival cutoffs.

    An edge is in a snapshot when both endpoints are; counting the later
    endpoint handles ingested edges that point forward in time.
    """
    n = graph.node_count
    if n < 2:
        raise ValueError("graph too small for snapshots")
    num_snapshots = min(num_snapshots, n)
    newer = np.fromiter(
        (max(s, d) for s, d in graph.edges()), np.int64, count=graph.edge_count
    )
    newer.sort()
    cutoffs = np.unique(np.linspace(n / num_snapshots, n, num_snapshots).astype(int) - 1)
    series = []
    for cutoff in cutoffs:
        edges = int(np.searchsorted(newer, cutoff, side="right"))
        series.append((int(cutoff) + 1, edges))
    return series


def dpl_exponent(snapshots) -> float:
    """Least-squares slope of log edges against log nodes."""
    pairs = [(float(n), float(e)) for n, e in snapshots]
    pairs = [(n, e) for n, e in pairs if n > 0 and e > 0]
    if len(pairs) < 3:
        raise ValueError("need at least 3 snapshots with positive counts")
    log_n = np.log([n for n, _ in pairs])
    log_e = np.log([e for _, e in pairs])
    slope, _ = np.polyfit(log_n, log_e, 1)
    return float(slope)


# -- proximity of a node's targets ------------------------------------------------


def _snapshot_distances_from(
    snapshot: GraphSnapshot, source: int, wanted: set[int]
) -> dict[int, int]:
    """BFS distances from ``source`` to the ``wanted`` nodes, undirected,
    inside the snapshot; stops early once all are found."""
    found: dict[int, int] = {}
    remaining = set(wanted)
    remaining.discard(source)
    if not remaining:
        return found
    dist = {source: 0}
    queue = deque([source])
    while queue and remaining:
        u = queue.popleft()
        d = dist[u] + 1
        for v in snapshot.undirected_neighbors(u):
            if v not in dist:
                dist[v] = d
                if v in remaining:
                    found[v] = d
                    remaining.discard(v)
                queue.append(v)
    return found


def proximity_statistic(graph: TemporalAttributedDigraph, node: int) -> float | None:
    """How close together a node's targets were just before it arrived.

    Mean undirected distance over unordered pairs of the node's out-neighbors,
    measured in the snapshot of nodes that arrived earlier. A pair in
    different components contributes 1 + the largest finite distance seen
    among the node's own pairs; if no pair is connected the statistic is
    undefined (None). Nodes with out-degree < 2 have no statistic (None).
    """
    targets = sorted(set(graph.out_neighbors(node)))
    if len(targets) < 2:
        return None
    snapshot = graph.snapshot_at(node - 1)
    targets = [t for t in targets if snapshot.contains(t)]
    if len(targets) < 2:
        return None
    finite: list[int] = []
    unreachable_pairs = 0
    target_set = set(targets)
    for i, a in enumerate(targets):
        wanted = set(targets[i + 1 :])
        found = _snapshot_distances_from(snapshot, a, wanted)
        finite.extend(found.values())
        unreachable_pairs += len(wanted) - len(found)
    if not finite:
        return None
    total = sum(finite) + unreachable_pairs * (1 + max(finite))
    return total / (len(finite) + unreachable_pairs)


def mean_proximity(
    graph: TemporalAttributedDigraph, sample_size: int = 200, rng_seed: int = 0
) -> float:
    """Mean proximity statistic over sampled nodes with out-degree >= 2."""
    eligible = [
        v
        for v in range(graph.node_count)
        if graph.out_degree(v) >= 2 and v >= 1
    ]
    if not eligible:
        raise ValueError("no node has out-degree >= 2")
    if len(eligible) > sample_size:
        eligible = random.Random(rng_seed).sample(eligible, sample_size)
    values = [proximity_statistic(graph, v) for v in eligible]
    values = [v for v in values if v is not None]
    if not values:
        raise ValueError("proximity undefined for every sampled node")
    return sum(values) / len(values)


# -- significance --------------------------------------------------------------------


def permutation_test_one_sided(
    sample_a, sample_b, n_perm: int = 10_000, rng_seed: int = 0
) -> float:
    """One-sided permutation test of H1: mean(a) < mean(b).

    Labels are shuffled ``n_perm`` times; the p-value is the add-one-smoothed
    fraction of permutations whose mean difference is at least as extreme as
    the observed one.
    """
    a = np.asarray(sample_a, dtype=np.float64).ravel()
    b = np.asarray(sample_b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    if n_perm < 100:
        raise ValueError("n_perm must be >= 100")
    observed = b.mean() - a.mean()
    pooled = np.concatenate([a, b])
    rng = np.random.default_rng(rng_seed)
    hits = 0
    chunk = max(1, min(n_perm, 50_000_000 // max(1, pooled.size)))
    done = 0
    while done < n_perm:
        take = min(chunk, n_perm - done)
        mat = np.tile(pooled, (take, 1))
        rng.permuted(mat, axis=1, out=mat)
        diffs = mat[:, a.size :].mean(axis=1) - mat[:, : a.size].mean(axis=1)
        hits += int(np.count_nonzero(diffs >= observed - 1e-12))
        done += take
    return (1 + hits) / (1 + n_perm)
