import random

import pytest

from netgrow.graph import TemporalAttributedDigraph


def make_temporal_graph(
    rng: random.Random,
    n: int,
    max_out: int = 3,
    labels: tuple[str, ...] | None = None,
    missing_attr_prob: float = 0.0,
    epochs_per_step: int = 5,
) -> TemporalAttributedDigraph:
    """Random arrival-ordered digraph: node i links to up to max_out older nodes."""
    g = TemporalAttributedDigraph(attributed=labels is not None or None)
    for i in range(n):
        attr = None
        if labels is not None and rng.random() >= missing_attr_prob:
            attr = rng.choice(labels)
        g.add_node(i // epochs_per_step, attr)
        if i == 0:
            continue
        out = rng.randint(1, min(i, max_out))
        for dst in rng.sample(range(i), out):
            g.add_edge(i, dst)
    return g


def path_graph(n: int) -> TemporalAttributedDigraph:
    """0 <- 1 <- 2 ... each node cites its predecessor."""
    g = TemporalAttributedDigraph()
    g.add_node(0)
    for i in range(1, n):
        g.add_node(i)
        g.add_edge(i, i - 1)
    return g


def star_graph(leaves: int) -> TemporalAttributedDigraph:
    g = TemporalAttributedDigraph()
    g.add_node(0)
    for i in range(1, leaves + 1):
        g.add_node(i)
        g.add_edge(i, 0)
    return g


def complete_temporal_graph(n: int) -> TemporalAttributedDigraph:
    g = TemporalAttributedDigraph()
    for i in range(n):
        g.add_node(i)
        for j in range(i):
            g.add_edge(i, j)
    return g


@pytest.fixture
def rng():
    return random.Random(12345)
