"""Random-walk growth of attributed directed networks.

Each arriving node picks a seed among existing nodes (biased toward or away
from its own attribute value), then explores the network with a random walk
that teleports back to the seed with probability ``p_jump`` and otherwise
follows an outgoing edge with probability ``p_out`` or an incoming edge with
probability ``1 - p_out``. Every visited node that is not yet linked is
offered a link: acceptance probability is ``p_same`` when the attribute
values match, ``p_diff`` when they differ, or a single ``p_link`` when the
network is unattributed. The walk ends once the node's edge budget is spent.

Growth is strictly sequential within a run (every step depends on the graph
so far) and deterministic for a fixed seed; independent runs can execute in
parallel freely.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from .graph import TemporalAttributedDigraph, weakly_connected_components
from .schedule import GrowthSchedule, realize_out_degree

__all__ = [
    "WalkParams",
    "GrowthStats",
    "select_seed",
    "random_walk_attach",
    "grow",
    "walk_distance_samples",
]

# A walk that takes this many times m_target steps without spending its
# budget is cut short and the remaining links are forced (see GrowthStats).
MAX_STEPS_PER_LINK = 10_000


@dataclass(frozen=True)
class WalkParams:
    """Model probabilities; either (p_same, p_diff) or p_link must be given.

    The unattributed variant (p_link) behaves like the attributed one with
    p_same == p_diff == p_link and uniform seed selection.
    """

    p_jump: float
    p_out: float
    p_same: float | None = None
    p_diff: float | None = None
    p_link: float | None = None

    def __post_init__(self):
        pair_given = self.p_same is not None or self.p_diff is not None
        if pair_given and (self.p_same is None or self.p_diff is None):
            raise ValueError("p_same and p_diff must be given together")
        if pair_given == (self.p_link is not None):
            raise ValueError("give either (p_same, p_diff) or p_link, not both")
        for name in ("p_jump", "p_out", "p_same", "p_diff", "p_link"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")

    @property
    def attributed(self) -> bool:
        return self.p_same is not None

    def to_dict(self) -> dict[str, float]:
        if self.attributed:
            return {
                "p_same": self.p_same,
                "p_diff": self.p_diff,
                "p_jump": self.p_jump,
                "p_out": self.p_out,
            }
        return {"p_link": self.p_link, "p_jump": self.p_jump, "p_out": self.p_out}

    @classmethod
    def from_dict(cls, payload: dict) -> "WalkParams":
        known = {"p_same", "p_diff", "p_link", "p_jump", "p_out"}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown walk parameters: {sorted(unknown)}")
        return cls(**payload)


@dataclass
class GrowthStats:
    """Counters for the rare safeguard paths taken during a run."""

    steps: int = 0
    forced_link_events: int = 0  # walks cut short, budget filled by force
    truncated_nodes: int = 0  # nodes whose budget exceeded reachable nodes
    missing_links: int = 0  # total shortfall across truncated nodes


def select_seed(
    graph: TemporalAttributedDigraph,
    attribute: str | None,
    p_same: float,
    p_diff: float,
    rng: random.Random,
) -> int:
    """Pick a walk seed biased by attribute similarity.

    With probability ``p_same / (p_same + p_diff)`` the seed is drawn
    uniformly from nodes sharing ``attribute``, otherwise uniformly from the
    rest. An empty pool falls back to the other one.
    """
    n = graph.node_count
    if n == 0:
        raise ValueError("cannot select a seed in an empty graph")
    total = p_same + p_diff
    if total <= 0.0:
        raise ValueError("p_same + p_diff must be positive")
    same_pool = graph.nodes_with_attribute(attribute)
    n_same = len(same_pool)
    n_diff = n - n_same
    want_same = rng.random() * total < p_same
    if (want_same and n_same > 0) or n_diff == 0:
        if n_same == 0:
            raise ValueError("graph has no nodes to seed from")
        return same_pool[int(rng.random() * n_same)]
    # uniform over every node whose attribute differs
    k = int(rng.random() * n_diff)
    for label, pool in graph.attribute_pools().items():
        if label == attribute:
            continue
        if k < len(pool):
            return pool[k]
        k -= len(pool)
    raise AssertionError("unreachable: different-attribute pool miscounted")


def _force_remaining_links(graph, new_node, seed, linked, linked_set, m_target, rng):
    """Fill the remaining budget with uniform draws from the unlinked part of
    the seed's weak component. Returns the number of links still missing."""
    reachable = []
    seen = {seed, new_node}
    queue = deque([seed])
    while queue:
        u = queue.popleft()
        if u != new_node and u not in linked_set:
            reachable.append(u)
        for v in graph.out_neighbors(u):
            if v not in seen:
                seen.add(v)
                queue.append(v)
        for v in graph.in_neighbors(u):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    # the seed itself may be unlinked and is collected above
    need = m_target - len(linked)
    if len(reachable) <= need:
        extras = reachable
    else:
        extras = rng.sample(reachable, need)
    for v in extras:
        linked_set.add(v)
        linked.append(v)
    return m_target - len(linked)


def random_walk_attach(
    graph: TemporalAttributedDigraph,
    new_node: int,
    seed: int,
    params: WalkParams,
    m_target: int,
    rng: random.Random,
    stats: GrowthStats | None = None,
) -> list[int]:
    """Walk from ``seed`` and return the distinct nodes linked to.

    ``new_node`` must already exist in the graph with no edges; its edges are
    inserted by the caller. The seed counts as the first visited node. The
    returned list has ``m_target`` entries unless fewer nodes were reachable,
    in which case the shortfall is counted in ``stats``.
    """
    if m_target < 1:
        raise ValueError(f"m_target must be >= 1, got {m_target}")
    if graph.out_degree(new_node) or graph.in_degree(new_node):
        raise ValueError(f"node {new_node} is already connected")

    if params.attributed:
        p_same, p_diff = params.p_same, params.p_diff
    else:
        p_same = p_diff = params.p_link
    p_jump, p_out = params.p_jump, params.p_out
    attr = graph.attribute(new_node)
    attrs = graph.attributes
    out_adj, in_adj = graph._out, graph._in  # noqa: SLF001 - hot path
    rnd = rng.random

    linked: list[int] = []
    linked_set: set[int] = set()
    existing = graph.node_count - 1  # everything but the new node

    if m_target >= existing:
        # budget can at best consume the whole component; skip the walk
        missing = _force_remaining_links(
            graph, new_node, seed, linked, linked_set, m_target, rng
        )
        if stats is not None and missing > 0:
            stats.truncated_nodes += 1
            stats.missing_links += missing
        return linked

    current = seed
    steps_left = MAX_STEPS_PER_LINK * m_target
    while True:
        if current not in linked_set:
            p = p_same if attrs[current] == attr else p_diff
            if rnd() < p:
                linked_set.add(current)
                linked.append(current)
                if len(linked) >= m_target:
                    break
        steps_left -= 1
        if steps_left <= 0:
            missing = _force_remaining_links(
                graph, new_node, seed, linked, linked_set, m_target, rng
            )
            if stats is not None:
                stats.forced_link_events += 1
                if missing > 0:
                    stats.truncated_nodes += 1
                    stats.missing_links += missing
            break
        if rnd() < p_jump:
            current = seed
            continue
        neighbors = out_adj[current] if rnd() < p_out else in_adj[current]
        if not neighbors:
            # dead end: try the other direction, else restart at the seed
            neighbors = in_adj[current] if neighbors is out_adj[current] else out_adj[current]
            if not neighbors:
                current = seed
                continue
        current = neighbors[int(rnd() * len(neighbors))]
    return linked


def grow(
    initial: TemporalAttributedDigraph,
    schedule: GrowthSchedule,
    params: WalkParams,
    rng_seed: int,
) -> TemporalAttributedDigraph:
    """Grow a network by attaching one node per schedule step.

    The initial graph must be nonempty and weakly connected (arriving nodes
    only ever reach the component their seed is in). Realized out-degree
    targets are stochastically rounded from the schedule and clamped to at
    least 1 so the result stays connected. The grown graph carries a
    ``growth_stats`` attribute with safeguard counters.
    """
    if initial.node_count == 0:
        raise ValueError("initial graph is empty")
    if len(weakly_connected_components(initial)) != 1:
        raise ValueError("initial graph must be weakly connected")

    graph = initial.copy()
    rng = random.Random(rng_seed)
    stats = GrowthStats(steps=schedule.steps)
    attributed = params.attributed
    for t in range(schedule.steps):
        epoch = schedule.epoch(t)
        attr = schedule.sample_attribute(epoch, rng) if attributed else None
        m_t = max(1, realize_out_degree(schedule.m(t), rng))
        if attributed:
            seed = select_seed(graph, attr, params.p_same, params.p_diff, rng)
        else:
            seed = int(rng.random() * graph.node_count)
        node = graph.add_node(epoch, attr)
        for v in random_walk_attach(graph, node, seed, params, m_t, rng, stats):
            graph.add_edge(node, v)
    graph.growth_stats = stats
    return graph


def walk_distance_samples(
    graph: TemporalAttributedDigraph,
    seed: int,
    params: WalkParams,
    steps: int,
    rng: random.Random,
):
    """Simulate a non-linking walk and record, per visited node, how far the
    walker is from its seed: both the step count since it last left the seed
    and the true undirected graph distance. Used to check the teleport
    geometry (step offsets are geometric(p_jump); graph distance can only be
    smaller).
    """
    dist = {seed: 0}
    queue = deque([seed])
    while queue:
        u = queue.popleft()
        d = dist[u] + 1
        for v in graph.out_neighbors(u):
            if v not in dist:
                dist[v] = d
                queue.append(v)
        for v in graph.in_neighbors(u):
            if v not in dist:
                dist[v] = d
                queue.append(v)

    p_jump, p_out = params.p_jump, params.p_out
    out_adj, in_adj = graph._out, graph._in  # noqa: SLF001
    rnd = rng.random
    offsets = []
    graph_distances = []
    current = seed
    offset = 0
    for _ in range(steps):
        offsets.append(offset)
        graph_distances.append(dist[current])
        if rnd() < p_jump:
            current = seed
            offset = 0
            continue
        neighbors = out_adj[current] if rnd() < p_out else in_adj[current]
        if not neighbors:
            neighbors = in_adj[current] if neighbors is out_adj[current] else out_adj[current]
            if not neighbors:
                current = seed
                offset = 0
                continue
        current = neighbors[int(rnd() * len(neighbors))]
        offset += 1
    return offsets, graph_distances
