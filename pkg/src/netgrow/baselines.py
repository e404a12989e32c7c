"""Reference growth models and null models.

All scheduled baselines consume the same :class:`~netgrow.schedule.GrowthSchedule`
as the random-walk model, so cross-model comparisons hold the out-degree
sequence and attribute stream fixed. The forest-fire model is the exception:
its out-degree is emergent, so only the schedule's length, epochs and
attribute stream are used.

Preferential attachment draws are exact, implemented with cited-node lists
(one entry per edge end) so a uniform element is a degree-proportional draw;
attribute-weighted variants keep one list per attribute class.
"""

from __future__ import annotations

import random
from collections import deque
from math import log

from .graph import TemporalAttributedDigraph
from .schedule import GrowthSchedule, realize_out_degree

__all__ = [
    "grow_uniform",
    "grow_dms",
    "grow_hk",
    "grow_san",
    "grow_ka",
    "grow_rw_mu",
    "grow_forest_fire",
    "configuration_rewire",
]

MAX_WALK_STEPS_PER_LINK = 10_000
_REJECTION_CAP = 200


def _check_initial(initial: TemporalAttributedDigraph) -> None:
    if initial.node_count == 0:
        raise ValueError("initial graph is empty")


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")


def _sample_attr(schedule: GrowthSchedule, epoch: int, rng) -> str | None:
    return schedule.sample_attribute(epoch, rng)


def _undirected_reachable(graph, start, exclude):
    """Nodes reachable from ``start`` ignoring direction, minus ``exclude``."""
    seen = {start}
    order = [] if start in exclude else [start]
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in graph.out_neighbors(u):
            if v not in seen:
                seen.add(v)
                if v not in exclude:
                    order.append(v)
                queue.append(v)
        for v in graph.in_neighbors(u):
            if v not in seen:
                seen.add(v)
                if v not in exclude:
                    order.append(v)
                queue.append(v)
    return order


def grow_uniform(
    initial: TemporalAttributedDigraph, schedule: GrowthSchedule, rng_seed: int
) -> TemporalAttributedDigraph:
    """Null model: each arrival links to m(t) distinct uniform existing nodes."""
    _check_initial(initial)
    graph = initial.copy()
    rng = random.Random(rng_seed)
    for t in range(schedule.steps):
        epoch = schedule.epoch(t)
        attr = _sample_attr(schedule, epoch, rng)
        existing = graph.node_count
        m_t = max(1, realize_out_degree(schedule.m(t), rng))
        if m_t > existing:
            raise ValueError(
                f"step {t}: target out-degree {m_t} exceeds {existing} existing nodes"
            )
        targets = rng.sample(range(existing), m_t)
        node = graph.add_node(epoch, attr)
        for v in targets:
            graph.add_edge(node, v)
    return graph


class _CitedList:
    """Degree-proportional sampler: one entry per in-edge end."""

    def __init__(self, graph):
        self.entries = [dst for _, dst in graph.edges()]

    def extend(self, targets):
        self.entries.extend(targets)

    def draw(self, rng, existing, attractiveness):
        """One draw with probability proportional to in-degree + attractiveness;
        uniform fallback when total mass is zero."""
        edge_mass = len(self.entries)
        total = edge_mass + attractiveness * existing
        if total <= 0.0:
            return int(rng.random() * existing)
        if rng.random() * total < edge_mass:
            return self.entries[int(rng.random() * edge_mass)]
        return int(rng.random() * existing)


def _distinct_preferential(rng, cited, existing, attractiveness, m, chosen):
    """Fill ``chosen`` up to m distinct targets via rejection sampling, with an
    exact cumulative-weight fallback if rejection stalls (m near existing)."""
    attempts = _REJECTION_CAP * max(1, m)
    while len(chosen) < m and attempts:
        v = cited.draw(rng, existing, attractiveness)
        if v not in chosen:
            chosen.append(v)
        attempts -= 1
    if len(chosen) < m:
        taken = set(chosen)
        degrees = [0] * existing
        for v in cited.entries:
            degrees[v] += 1
        pool = [v for v in range(existing) if v not in taken]
        while len(chosen) < m and pool:
            weights = [degrees[v] + attractiveness for v in pool]
            total = sum(weights)
            if total <= 0.0:
                idx = int(rng.random() * len(pool))
            else:
                r = rng.random() * total
                idx = 0
                for idx, w in enumerate(weights):  # noqa: B007
                    r -= w
                    if r < 0:
                        break
            chosen.append(pool.pop(idx))
    return chosen


def grow_dms(
    initial: TemporalAttributedDigraph,
    schedule: GrowthSchedule,
    attractiveness: float,
    rng_seed: int,
) -> TemporalAttributedDigraph:
    """Preferential attachment: link probability ∝ in-degree + attractiveness."""
    _check_initial(initial)
    if attractiveness < 0:
        raise ValueError(f"attractiveness must be >= 0, got {attractiveness}")
    graph = initial.copy()
    rng = random.Random(rng_seed)
    cited = _CitedList(graph)
    for t in range(schedule.steps):
        epoch = schedule.epoch(t)
        attr = _sample_attr(schedule, epoch, rng)
        existing = graph.node_count
        m_t = min(max(1, realize_out_degree(schedule.m(t), rng)), existing)
        targets = _distinct_preferential(
            rng, cited, existing, attractiveness, m_t, []
        )
        node = graph.add_node(epoch, attr)
        for v in targets:
            graph.add_edge(node, v)
        cited.extend(targets)
    return graph


def _triangle_candidates(graph, prev_target, chosen):
    taken = set(chosen)
    return [
        v
        for v in graph.out_neighbors(prev_target) + graph.in_neighbors(prev_target)
        if v not in taken
    ]


def grow_hk(
    initial: TemporalAttributedDigraph,
    schedule: GrowthSchedule,
    p_triangle: float,
    rng_seed: int,
) -> TemporalAttributedDigraph:
    """Preferential attachment with triangle closing.

    The first link of each arrival is degree-proportional; each later link
    closes a triangle with probability ``p_triangle`` by picking a uniform
    node from the undirected 1-hop neighborhood of the previous target,
    falling back to a preferential draw when that neighborhood is exhausted.
    """
    _check_initial(initial)
    _check_prob("p_triangle", p_triangle)
    graph = initial.copy()
    rng = random.Random(rng_seed)
    cited = _CitedList(graph)
    for t in range(schedule.steps):
        epoch = schedule.epoch(t)
        attr = _sample_attr(schedule, epoch, rng)
        existing = graph.node_count
        m_t = min(max(1, realize_out_degree(schedule.m(t), rng)), existing)
        chosen: list[int] = []
        _distinct_preferential(rng, cited, existing, 0.0, 1, chosen)
        while len(chosen) < m_t:
            picked = False
            if rng.random() < p_triangle:
                cands = _triangle_candidates(graph, chosen[-1], chosen)
                if cands:
                    chosen.append(cands[int(rng.random() * len(cands))])
                    picked = True
            if not picked:
                _distinct_preferential(
                    rng, cited, existing, 0.0, len(chosen) + 1, chosen
                )
        node = graph.add_node(epoch, attr)
        for v in chosen:
            graph.add_edge(node, v)
        cited.extend(chosen)
    return graph


class _ClassCitedLists:
    """Degree-proportional sampling with a per-class similarity multiplier."""

    def __init__(self, graph):
        self.by_class: dict[str | None, list[int]] = {}
        for _, dst in graph.edges():
            self.by_class.setdefault(graph.attribute(dst), []).append(dst)

    def extend(self, graph, targets):
        for v in targets:
            self.by_class.setdefault(graph.attribute(v), []).append(v)

    def draw(self, graph, rng, attr, similarity):
        """One draw ∝ in-degree × similarity(attr, class). Falls back to a
        similarity-weighted uniform node when all weighted degrees are zero,
        then to a plain uniform node."""
        pools = graph.attribute_pools()
        classes = list(pools.keys())
        sims = [1.0 if c == attr else similarity for c in classes]
        masses = [
            s * len(self.by_class.get(c, ())) for c, s in zip(classes, sims)
        ]
        total = sum(masses)
        if total > 0.0:
            r = rng.random() * total
            for c, mass in zip(classes, masses):
                r -= mass
                if r < 0:
                    entries = self.by_class[c]
                    return entries[int(rng.random() * len(entries))]
        node_masses = [s * len(pools[c]) for c, s in zip(classes, sims)]
        total = sum(node_masses)
        if total > 0.0:
            r = rng.random() * total
            for c, mass in zip(classes, node_masses):
                r -= mass
                if r < 0:
                    pool = pools[c]
                    return pool[int(rng.random() * len(pool))]
        return int(rng.random() * graph.node_count)


def _distinct_class_preferential(graph, rng, lists, attr, similarity, m, chosen):
    attempts = _REJECTION_CAP * max(1, m)
    while len(chosen) < m and attempts:
        v = lists.draw(graph, rng, attr, similarity)
        if v not in chosen:
            chosen.append(v)
        attempts -= 1
    if len(chosen) < m:
        taken = set(chosen)
        pool = [v for v in range(graph.node_count) if v not in taken]
        while len(chosen) < m and pool:
            sims = [
                1.0 if graph.attribute(v) == attr else similarity for v in pool
            ]
            weights = [graph.in_degree(v) * s for v, s in zip(pool, sims)]
            if sum(weights) <= 0.0:
                weights = sims  # same fallback tiers as the rejection sampler
            total = sum(weights)
            if total <= 0.0:
                idx = int(rng.random() * len(pool))
            else:
                r = rng.random() * total
                idx = 0
                for idx, w in enumerate(weights):  # noqa: B007
                    r -= w
                    if r < 0:
                        break
            chosen.append(pool.pop(idx))
    return chosen


def grow_ka(
    initial: TemporalAttributedDigraph,
    schedule: GrowthSchedule,
    similarity: float,
    rng_seed: int,
) -> TemporalAttributedDigraph:
    """Fitness attachment: weight ∝ in-degree × attribute similarity.

    Similarity is 1 for equal attribute values and ``similarity`` otherwise;
    with ``similarity == 1`` the model reduces to plain degree-proportional
    attachment.
    """
    _check_initial(initial)
    _check_prob("similarity", similarity)
    graph = initial.copy()
    rng = random.Random(rng_seed)
    lists = _ClassCitedLists(graph)
    for t in range(schedule.steps):
        epoch = schedule.epoch(t)
        attr = _sample_attr(schedule, epoch, rng)
        existing = graph.node_count
        m_t = min(max(1, realize_out_degree(schedule.m(t), rng)), existing)
        chosen = _distinct_class_preferential(
            graph, rng, lists, attr, similarity, m_t, []
        )
        node = graph.add_node(epoch, attr)
        for v in chosen:
            graph.add_edge(node, v)
        lists.extend(graph, chosen)
    return graph


def grow_san(
    initial: TemporalAttributedDigraph,
    schedule: GrowthSchedule,
    p_triangle: float,
    similarity: float,
    rng_seed: int,
) -> TemporalAttributedDigraph:
    """Attribute-augmented preferential attachment with triangle closing.

    Like :func:`grow_hk`, but both the preferential weights and the triangle
    candidates are multiplied by attribute similarity.
    """
    _check_initial(initial)
    _check_prob("p_triangle", p_triangle)
    _check_prob("similarity", similarity)
    graph = initial.copy()
    rng = random.Random(rng_seed)
    lists = _ClassCitedLists(graph)
    for t in range(schedule.steps):
        epoch = schedule.epoch(t)
        attr = _sample_attr(schedule, epoch, rng)
        existing = graph.node_count
        m_t = min(max(1, realize_out_degree(schedule.m(t), rng)), existing)
        chosen: list[int] = []
        _distinct_class_preferential(graph, rng, lists, attr, similarity, 1, chosen)
        while len(chosen) < m_t:
            picked = False
            if rng.random() < p_triangle:
                cands = _triangle_candidates(graph, chosen[-1], chosen)
                if cands:
                    weights = [
                        1.0 if graph.attribute(v) == attr else similarity
                        for v in cands
                    ]
                    total = sum(weights)
                    if total > 0.0:
                        r = rng.random() * total
                        for v, w in zip(cands, weights):
                            r -= w
                            if r < 0:
                                chosen.append(v)
                                picked = True
                                break
            if not picked:
                _distinct_class_preferential(
                    graph, rng, lists, attr, similarity, len(chosen) + 1, chosen
                )
        node = graph.add_node(epoch, attr)
        for v in chosen:
            graph.add_edge(node, v)
        lists.extend(graph, chosen)
    return graph


def grow_rw_mu(
    initial: TemporalAttributedDigraph,
    schedule: GrowthSchedule,
    mu: float,
    rng_seed: int,
) -> TemporalAttributedDigraph:
    """Direction-agnostic random walk model.

    Each arrival starts at a uniform existing node, walks on the undirected
    skeleton, and links to every visited unlinked node with probability
    ``mu`` until its budget is spent. ``mu == 0`` would never terminate and
    is rejected.
    """
    _check_initial(initial)
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"mu must be in (0, 1], got {mu}")
    graph = initial.copy()
    rng = random.Random(rng_seed)
    rnd = rng.random
    for t in range(schedule.steps):
        epoch = schedule.epoch(t)
        attr = _sample_attr(schedule, epoch, rng)
        existing = graph.node_count
        m_t = max(1, realize_out_degree(schedule.m(t), rng))
        linked: list[int] = []
        linked_set: set[int] = set()
        start = int(rnd() * existing)
        current = start
        steps_left = MAX_WALK_STEPS_PER_LINK * m_t
        budget = min(m_t, existing)
        while True:
            if current not in linked_set and rnd() < mu:
                linked_set.add(current)
                linked.append(current)
                if len(linked) >= budget:
                    break
            steps_left -= 1
            if steps_left <= 0:
                extras = _undirected_reachable(graph, start, linked_set)
                need = budget - len(linked)
                if len(extras) > need:
                    extras = rng.sample(extras, need)
                linked.extend(extras)
                break
            neighbors = graph.out_neighbors(current) + graph.in_neighbors(current)
            if not neighbors:
                current = int(rnd() * existing)
                continue
            current = neighbors[int(rnd() * len(neighbors))]
        node = graph.add_node(epoch, attr)
        for v in linked:
            graph.add_edge(node, v)
    return graph


def _burn_count(rng, p: float, cap: int) -> int:
    """Geometric number of neighbors to burn, mean p / (1 - p), capped."""
    if p <= 0.0 or cap <= 0:
        return 0
    if p >= 1.0:
        return cap
    u = rng.random()
    if u <= 0.0:
        return cap
    return min(cap, int(log(u) / log(p)))


def grow_forest_fire(
    initial: TemporalAttributedDigraph,
    schedule: GrowthSchedule,
    p_forward: float,
    p_backward: float,
    rng_seed: int,
) -> TemporalAttributedDigraph:
    """Recursive burning model; links to every burned node.

    Each arrival picks a uniform ambassador and burns outward: a burned node
    ignites a geometric number of its unburned out-neighbors (parameter
    ``p_forward``) and in-neighbors (``p_backward``). The arrival links to
    all burned nodes, so its out-degree is emergent; the schedule only
    supplies the number of steps, epochs and attributes. The burn is capped
    at the existing graph size.
    """
    _check_initial(initial)
    _check_prob("p_forward", p_forward)
    _check_prob("p_backward", p_backward)
    graph = initial.copy()
    rng = random.Random(rng_seed)
    for t in range(schedule.steps):
        epoch = schedule.epoch(t)
        attr = _sample_attr(schedule, epoch, rng)
        existing = graph.node_count
        ambassador = int(rng.random() * existing)
        burned = {ambassador}
        order = [ambassador]
        queue = deque([ambassador])
        while queue and len(burned) < existing:
            w = queue.popleft()
            for neighbors, p in (
                (graph.out_neighbors(w), p_forward),
                (graph.in_neighbors(w), p_backward),
            ):
                cands = [v for v in neighbors if v not in burned]
                take = _burn_count(rng, p, len(cands))
                picks = cands if take >= len(cands) else rng.sample(cands, take)
                for v in picks:
                    if len(burned) >= existing:
                        break
                    burned.add(v)
                    order.append(v)
                    queue.append(v)
        node = graph.add_node(epoch, attr)
        for v in order:
            graph.add_edge(node, v)
    return graph


def configuration_rewire(
    graph: TemporalAttributedDigraph, rng_seed: int
) -> TemporalAttributedDigraph:
    """Degree-preserving null model via double-edge swaps.

    Attempts ``10 * |E|`` swaps of edge targets; a swap is skipped when it
    would create a self-loop or duplicate. In- and out-degree sequences are
    preserved exactly. Edges may end up pointing forward in time; the result
    is a structural null model, not a temporal one.
    """
    if graph.edge_count < 2:
        raise ValueError("need at least 2 edges to rewire")
    rng = random.Random(rng_seed)
    edges = list(graph.edges())
    keys = {(src << 32) | dst for src, dst in edges}
    n_edges = len(edges)
    for _ in range(10 * n_edges):
        i = int(rng.random() * n_edges)
        j = int(rng.random() * n_edges)
        if i == j:
            continue
        a, b = edges[i]
        c, d = edges[j]
        if a == d or c == b or b == d:
            continue
        new_i = (a << 32) | d
        new_j = (c << 32) | b
        if new_i in keys or new_j in keys:
            continue
        keys.discard((a << 32) | b)
        keys.discard((c << 32) | d)
        keys.add(new_i)
        keys.add(new_j)
        edges[i] = (a, d)
        edges[j] = (c, b)
    rewired = TemporalAttributedDigraph(attributed=graph.attributed or None)
    for node in range(graph.node_count):
        rewired.add_node(graph.epoch(node), graph.attribute(node))
    for src, dst in edges:
        rewired.add_edge(src, dst)
    return rewired
