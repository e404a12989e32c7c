import random

import numpy as np
import pytest
from scipy import stats

from netgrow.graph import (
    TemporalAttributedDigraph,
    pair_seed_graph,
    weakly_connected_components,
)
from netgrow.metrics import in_degrees
from netgrow.schedule import GrowthSchedule
from netgrow.walk import (
    WalkParams,
    grow,
    random_walk_attach,
    select_seed,
    walk_distance_samples,
)

from conftest import make_temporal_graph
from oracles import geometric_pmf


def two_class_graph(n_per_class: int) -> TemporalAttributedDigraph:
    g = TemporalAttributedDigraph()
    for i in range(2 * n_per_class):
        g.add_node(0, "x" if i % 2 == 0 else "y")
        if i:
            g.add_edge(i, i - 1)
    return g


class TestWalkParams:
    def test_requires_exactly_one_variant(self):
        with pytest.raises(ValueError):
            WalkParams(p_jump=0.1, p_out=0.5)
        with pytest.raises(ValueError):
            WalkParams(p_jump=0.1, p_out=0.5, p_same=0.5, p_diff=0.5, p_link=0.5)
        with pytest.raises(ValueError):
            WalkParams(p_jump=0.1, p_out=0.5, p_same=0.5)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            WalkParams(p_jump=1.5, p_out=0.5, p_link=0.5)

    def test_dict_round_trip(self):
        p = WalkParams(p_jump=0.25, p_out=0.8, p_same=0.6, p_diff=0.1)
        assert WalkParams.from_dict(p.to_dict()) == p
        assert p.attributed
        with pytest.raises(ValueError):
            WalkParams.from_dict({"p_link": 0.5, "p_jump": 0.1, "p_out": 0.5, "x": 1})


class TestSelectSeed:
    def test_pure_same_class(self):
        g = two_class_graph(10)
        rng = random.Random(0)
        for _ in range(200):
            seed = select_seed(g, "x", 0.8, 0.0, rng)
            assert g.attribute(seed) == "x"

    def test_branch_probability_half(self):
        # 50/50 class split, p_same == p_diff: same-class fraction 0.5 +- 0.02
        g = two_class_graph(50)
        rng = random.Random(42)
        same = sum(
            g.attribute(select_seed(g, "x", 0.5, 0.5, rng)) == "x"
            for _ in range(10_000)
        )
        assert abs(same / 10_000 - 0.5) < 0.02

    def test_empty_class_fallback(self):
        g = TemporalAttributedDigraph()
        for _ in range(5):
            g.add_node(0, "only")
        rng = random.Random(1)
        for _ in range(50):
            assert g.attribute(select_seed(g, "only", 0.2, 0.8, rng)) == "only"

    def test_zero_probabilities_rejected(self):
        g = two_class_graph(2)
        with pytest.raises(ValueError):
            select_seed(g, "x", 0.0, 0.0, random.Random(0))

    def test_empty_graph_rejected(self):
        with pytest.raises(ValueError):
            select_seed(TemporalAttributedDigraph(), "x", 1.0, 0.0, random.Random(0))

    def test_diff_class_is_uniform_over_other_labels(self):
        g = TemporalAttributedDigraph()
        for label, count in (("a", 2), ("b", 4), ("c", 4)):
            for _ in range(count):
                g.add_node(0, label)
        rng = random.Random(9)
        picks = [select_seed(g, "a", 0.0, 1.0, rng) for _ in range(8000)]
        labels = [g.attribute(v) for v in picks]
        assert labels.count("a") == 0
        assert abs(labels.count("b") / 8000 - 0.5) < 0.03


class TestRandomWalkAttach:
    def test_degenerate_jump_only(self):
        g = pair_seed_graph()
        node = g.add_node(1)
        params = WalkParams(p_jump=1.0, p_out=0.5, p_link=1.0)
        assert random_walk_attach(g, node, 1, params, 1, random.Random(0)) == [1]

    def test_deterministic_outward_walk(self):
        # directed path seed -> a -> b, everything deterministic
        g = TemporalAttributedDigraph()
        for _ in range(3):
            g.add_node(0)
        g.add_edge(1, 0)
        g.add_edge(2, 1)
        node = g.add_node(1)
        params = WalkParams(p_jump=0.0, p_out=1.0, p_link=1.0)
        links = random_walk_attach(g, node, 2, params, 3, random.Random(5))
        assert links == [2, 1, 0]

    def test_m_target_validation(self):
        g = pair_seed_graph()
        node = g.add_node(1)
        params = WalkParams(p_jump=0.5, p_out=0.5, p_link=0.5)
        with pytest.raises(ValueError):
            random_walk_attach(g, node, 0, params, 0, random.Random(0))

    def test_connected_node_rejected(self):
        g = pair_seed_graph()
        params = WalkParams(p_jump=0.5, p_out=0.5, p_link=0.5)
        with pytest.raises(ValueError):
            random_walk_attach(g, 1, 0, params, 1, random.Random(0))

    def test_budget_beyond_component_truncates_loudly(self):
        from netgrow.walk import GrowthStats

        g = pair_seed_graph()
        node = g.add_node(1)
        params = WalkParams(p_jump=0.2, p_out=0.5, p_link=0.5)
        stats = GrowthStats()
        links = random_walk_attach(g, node, 0, params, 5, random.Random(0), stats)
        assert sorted(links) == [0, 1]
        assert stats.truncated_nodes == 1
        assert stats.missing_links == 3


class TestJumpBackGeometry:
    def test_step_offsets_match_geometric(self, rng):
        graph = make_temporal_graph(random.Random(2), 500, max_out=3)
        params = WalkParams(p_jump=0.5, p_out=0.5, p_link=0.5)
        offsets, _ = walk_distance_samples(graph, 0, params, 100_000, random.Random(11))
        k_max = 40
        observed = np.bincount(np.minimum(offsets, k_max), minlength=k_max + 1)
        observed = observed / observed.sum()
        expected = geometric_pmf(0.5, k_max)
        tv = 0.5 * np.abs(observed - expected).sum()
        assert tv < 0.02

    def test_graph_distance_dominated_by_offsets(self):
        graph = make_temporal_graph(random.Random(3), 500, max_out=3)
        params = WalkParams(p_jump=0.4, p_out=0.6, p_link=0.5)
        offsets, distances = walk_distance_samples(
            graph, 0, params, 50_000, random.Random(4)
        )
        offsets = np.asarray(offsets)
        distances = np.asarray(distances)
        assert np.all(distances <= offsets)
        # stochastic dominance: P(distance >= k) <= P(geometric >= k) + noise
        for k in range(1, 20):
            assert (distances >= k).mean() <= (1 - 0.4) ** k + 0.01


class TestGrow:
    def make_initial(self, n=4):
        g = TemporalAttributedDigraph()
        for i in range(n):
            g.add_node(0)
            if i:
                g.add_edge(i, i - 1)
        return g

    def test_edge_conservation(self):
        initial = self.make_initial(4)
        schedule = GrowthSchedule.constant(1000, 3.0)
        params = WalkParams(p_jump=0.25, p_out=0.7, p_link=0.5)
        g = grow(initial, schedule, params, 123)
        assert g.edge_count == initial.edge_count + 3000
        assert g.growth_stats.missing_links == 0

    def test_determinism(self):
        initial = self.make_initial(4)
        schedule = GrowthSchedule.constant(
            300, 2.0, attr_dist={"a": 0.5, "b": 0.5}
        )
        params = WalkParams(p_jump=0.3, p_out=0.6, p_same=0.7, p_diff=0.2)
        g1 = grow(initial, schedule, params, 9)
        g2 = grow(initial, schedule, params, 9)
        assert list(g1.edges()) == list(g2.edges())
        assert g1.attributes == g2.attributes
        assert g1.epochs == g2.epochs

    def test_weak_connectivity_preserved(self):
        g = grow(
            self.make_initial(3),
            GrowthSchedule.constant(400, 2.0),
            WalkParams(p_jump=0.5, p_out=0.3, p_link=0.4),
            77,
        )
        assert len(weakly_connected_components(g)) == 1

    def test_temporal_direction_and_no_duplicates(self):
        g = grow(
            self.make_initial(3),
            GrowthSchedule.constant(500, 2.5),
            WalkParams(p_jump=0.2, p_out=0.9, p_link=0.6),
            5,
        )
        edges = list(g.edges())
        assert len(edges) == len(set(edges)) == g.edge_count
        assert all(src > dst for src, dst in edges)

    def test_disconnected_initial_rejected(self):
        g = TemporalAttributedDigraph()
        for _ in range(4):
            g.add_node(0)
        g.add_edge(1, 0)
        g.add_edge(3, 2)
        with pytest.raises(ValueError):
            grow(
                g,
                GrowthSchedule.constant(10, 1.0),
                WalkParams(p_jump=0.5, p_out=0.5, p_link=0.5),
                0,
            )

    def test_empty_initial_rejected(self):
        with pytest.raises(ValueError):
            grow(
                TemporalAttributedDigraph(),
                GrowthSchedule.constant(10, 1.0),
                WalkParams(p_jump=0.5, p_out=0.5, p_link=0.5),
                0,
            )

    def test_attribute_stream_sampled_from_schedule(self):
        initial = self.make_initial(2)
        schedule = GrowthSchedule.constant(600, 2.0, attr_dist={"a": 0.3, "b": 0.7})
        params = WalkParams(p_jump=0.3, p_out=0.5, p_same=0.5, p_diff=0.5)
        g = grow(initial, schedule, params, 21)
        labels = [g.attribute(v) for v in range(2, g.node_count)]
        assert abs(labels.count("a") / len(labels) - 0.3) < 0.06

    def test_unseen_labels_appear_later(self):
        # labels can crop up mid-stream; seeding falls back across classes
        initial = self.make_initial(2)
        schedule = GrowthSchedule(
            [1.0] * 200,
            [0] * 100 + [1] * 100,
            {0: {"a": 1.0}, 1: {"b": 1.0}},
        )
        params = WalkParams(p_jump=0.3, p_out=0.5, p_same=0.9, p_diff=0.1)
        g = grow(initial, schedule, params, 3)
        assert "b" in {g.attribute(v) for v in range(g.node_count)}
        assert len(weakly_connected_components(g)) == 1


class TestVariantEquivalence:
    def test_attributed_matches_unattributed_distribution(self):
        # single attribute class, p_same == p_diff == p_link: the two code
        # paths must produce the same in-degree distribution
        initial = TemporalAttributedDigraph()
        initial.add_node(0, "only")
        initial.add_node(0, "only")
        initial.add_edge(1, 0)
        schedule = GrowthSchedule.constant(150, 2.0, attr_dist={"only": 1.0})
        attributed = WalkParams(p_jump=0.3, p_out=0.7, p_same=0.5, p_diff=0.5)
        unattributed = WalkParams(p_jump=0.3, p_out=0.7, p_link=0.5)
        pooled_a: list[int] = []
        pooled_u: list[int] = []
        for run in range(50):
            ga = grow(initial, schedule, attributed, 1000 + run)
            gu = grow(initial, schedule, unattributed, 2000 + run)
            pooled_a.extend(in_degrees(ga).tolist())
            pooled_u.extend(in_degrees(gu).tolist())
        p_value = stats.ks_2samp(pooled_a, pooled_u).pvalue
        assert p_value > 0.01
