import math
import random

import pytest
from scipy import stats

from netgrow.baselines import (
    configuration_rewire,
    grow_dms,
    grow_forest_fire,
    grow_hk,
    grow_ka,
    grow_rw_mu,
    grow_san,
    grow_uniform,
)
from netgrow.graph import TemporalAttributedDigraph, pair_seed_graph
from netgrow.metrics import (
    global_assortativity,
    in_degrees,
    mean_local_clustering,
    mean_proximity,
)
from netgrow.schedule import GrowthSchedule
from netgrow.walk import WalkParams, grow

from conftest import make_temporal_graph


def chain_initial(n=4, label=None):
    g = TemporalAttributedDigraph()
    for i in range(n):
        g.add_node(0, label)
        if i:
            g.add_edge(i, i - 1)
    return g


def two_class_initial():
    """Two disconnected single-class components: a-a edge and b-b edge."""
    g = TemporalAttributedDigraph()
    g.add_node(0, "a")
    g.add_node(0, "a")
    g.add_node(0, "b")
    g.add_node(0, "b")
    g.add_edge(1, 0)
    g.add_edge(3, 2)
    return g


class TestUniform:
    def test_tree_growth(self):
        g = grow_uniform(chain_initial(3), GrowthSchedule.constant(100, 1.0), 0)
        assert g.edge_count == 2 + 100
        assert all(g.out_degree(v) == 1 for v in range(3, g.node_count))

    def test_budget_exceeds_existing(self):
        with pytest.raises(ValueError):
            grow_uniform(pair_seed_graph(), GrowthSchedule.constant(5, 5.0), 0)

    def test_early_cohort_indegree_matches_harmonic_sum(self):
        # E[in-degree of an initial node] = sum_t m / n(t)
        n0, steps, m = 100, 9900, 5.0
        initial = chain_initial(n0)
        g = grow_uniform(initial, GrowthSchedule.constant(steps, m), 3)
        expected = sum(m / (n0 + t) for t in range(steps))
        expected += (n0 - 1) / n0  # in-degrees the chain itself contributes
        cohort = in_degrees(g)[:n0].mean()
        assert math.isclose(cohort, expected, rel_tol=0.05)

    def test_proximity_uniform_exceeds_walk_model(self):
        initial = chain_initial(4)
        schedule = GrowthSchedule.constant(3000, 3.0)
        uni = grow_uniform(initial, schedule, 11)
        walked = grow(
            initial, schedule, WalkParams(p_jump=0.3, p_out=0.7, p_link=0.7), 11
        )
        prox_uniform = mean_proximity(uni, sample_size=150, rng_seed=1)
        prox_walk = mean_proximity(walked, sample_size=150, rng_seed=1)
        assert prox_uniform > prox_walk


class TestDms:
    def test_negative_attractiveness_rejected(self):
        with pytest.raises(ValueError):
            grow_dms(pair_seed_graph(), GrowthSchedule.constant(1, 1.0), -1.0, 0)

    def test_single_draw_distribution(self):
        # in-degrees (3, 1, 0, 0, 0), attractiveness 1: masses (4, 2, 1, 1, 1)
        base = TemporalAttributedDigraph()
        for _ in range(5):
            base.add_node(0)
        base.add_edge(2, 0)
        base.add_edge(3, 0)
        base.add_edge(4, 0)
        base.add_edge(4, 1)
        schedule = GrowthSchedule.constant(1, 1.0)
        counts = [0] * 5
        trials = 4000
        for s in range(trials):
            g = grow_dms(base, schedule, 1.0, s)
            counts[g.out_neighbors(5)[0]] += 1
        assert counts[0] / trials == pytest.approx(4 / 9, abs=0.03)
        assert counts[1] / trials == pytest.approx(2 / 9, abs=0.025)
        # conditioned on picking one of the two cited nodes: 2/3 vs 1/3
        assert counts[0] / (counts[0] + counts[1]) == pytest.approx(2 / 3, abs=0.03)

    def test_huge_attractiveness_is_uniform(self):
        initial = chain_initial(4)
        schedule = GrowthSchedule.constant(300, 2.0)
        pooled_dms: list[int] = []
        pooled_uni: list[int] = []
        for s in range(20):
            pooled_dms.extend(in_degrees(grow_dms(initial, schedule, 1e9, s)).tolist())
            pooled_uni.extend(
                in_degrees(grow_uniform(initial, schedule, 500 + s)).tolist()
            )
        assert stats.ks_2samp(pooled_dms, pooled_uni).pvalue > 0.01

    def test_zero_mass_uniform_fallback(self):
        base = TemporalAttributedDigraph()
        base.add_node(0)
        base.add_node(0)  # no edges at all, attractiveness 0
        g = grow_dms(base, GrowthSchedule.constant(50, 1.0), 0.0, 7)
        assert g.edge_count == 50

    def test_heavier_tail_than_uniform(self):
        initial = chain_initial(4)
        schedule = GrowthSchedule.constant(4000, 3.0)
        dms_max = in_degrees(grow_dms(initial, schedule, 0.5, 1)).max()
        uni_max = in_degrees(grow_uniform(initial, schedule, 1)).max()
        assert dms_max > uni_max


class TestHk:
    def test_no_triangles_without_closing(self):
        g = grow_hk(chain_initial(4), GrowthSchedule.constant(10_000, 2.0), 0.0, 5)
        assert mean_local_clustering(g) < 0.01

    def test_always_closing_links_neighbors(self):
        g = grow_hk(chain_initial(4), GrowthSchedule.constant(500, 2.0), 1.0, 8)
        undirected = {frozenset(e) for e in g.edges()}
        for v in range(4, g.node_count):
            targets = g.out_neighbors(v)
            if len(targets) == 2:
                assert frozenset(targets) in undirected

    def test_clustering_monotone_in_triangle_probability(self):
        initial = chain_initial(4)
        schedule = GrowthSchedule.constant(1500, 2.0)
        means = []
        for p in (0.0, 0.5, 1.0):
            runs = [
                mean_local_clustering(grow_hk(initial, schedule, p, s))
                for s in range(20)
            ]
            means.append(sum(runs) / len(runs))
        assert means[0] < means[1] < means[2]


class TestKaSan:
    def test_similarity_one_equals_degree_only(self):
        initial = two_class_initial()
        schedule = GrowthSchedule.constant(300, 2.0, attr_dist={"a": 0.5, "b": 0.5})
        pooled_ka: list[int] = []
        pooled_dms: list[int] = []
        for s in range(20):
            pooled_ka.extend(in_degrees(grow_ka(initial, schedule, 1.0, s)).tolist())
            pooled_dms.extend(
                in_degrees(grow_dms(initial, schedule, 0.0, 900 + s)).tolist()
            )
        assert stats.ks_2samp(pooled_ka, pooled_dms).pvalue > 0.01

    def test_zero_similarity_keeps_classes_apart(self):
        initial = two_class_initial()
        schedule = GrowthSchedule.constant(400, 2.0, attr_dist={"a": 0.5, "b": 0.5})
        g = grow_ka(initial, schedule, 0.0, 13)
        for src, dst in g.edges():
            assert g.attribute(src) == g.attribute(dst)
        assert global_assortativity(g) == pytest.approx(1.0)

    def test_san_partial_similarity_mixes(self):
        initial = two_class_initial()
        schedule = GrowthSchedule.constant(2000, 2.0, attr_dist={"a": 0.5, "b": 0.5})
        values = [
            global_assortativity(grow_san(initial, schedule, 0.5, 0.5, s))
            for s in range(5)
        ]
        r = sum(values) / len(values)
        assert 0.0 < r < 1.0

    def test_san_closes_triangles(self):
        initial = two_class_initial()
        schedule = GrowthSchedule.constant(2000, 2.0, attr_dist={"a": 0.5, "b": 0.5})
        clustered = mean_local_clustering(grow_san(initial, schedule, 0.9, 0.5, 3))
        flat = mean_local_clustering(grow_san(initial, schedule, 0.0, 0.5, 3))
        assert clustered > flat


class TestRwMu:
    def test_zero_mu_rejected(self):
        with pytest.raises(ValueError):
            grow_rw_mu(pair_seed_graph(), GrowthSchedule.constant(1, 1.0), 0.0, 0)

    def test_mu_one_links_contiguous_neighborhood(self):
        initial = chain_initial(5)
        g = grow_rw_mu(initial, GrowthSchedule.constant(300, 3.0), 1.0, 2)
        undirected = {frozenset(e) for e in g.edges()}
        for v in range(5, g.node_count):
            targets = set(g.out_neighbors(v))
            # the visited set is a connected walk prefix
            if len(targets) < 2:
                continue
            seen = {min(targets)}
            frontier = [min(targets)]
            while frontier:
                u = frontier.pop()
                for w in targets:
                    if w not in seen and frozenset((u, w)) in undirected:
                        seen.add(w)
                        frontier.append(w)
            assert seen == targets

    def test_mu_one_single_link(self):
        g = grow_rw_mu(chain_initial(3), GrowthSchedule.constant(200, 1.0), 1.0, 4)
        assert all(g.out_degree(v) == 1 for v in range(3, g.node_count))

    def test_clustering_increases_with_mu(self):
        initial = chain_initial(4)
        schedule = GrowthSchedule.constant(1500, 2.0)
        lcc = {}
        for mu in (0.3, 0.9):
            runs = [
                mean_local_clustering(grow_rw_mu(initial, schedule, mu, s))
                for s in range(20)
            ]
            lcc[mu] = sum(runs) / len(runs)
        assert lcc[0.9] > lcc[0.3]


class TestForestFire:
    def test_zero_probabilities_link_only_ambassador(self):
        g = grow_forest_fire(
            chain_initial(4), GrowthSchedule.constant(200, 1.0), 0.0, 0.0, 6
        )
        assert all(g.out_degree(v) == 1 for v in range(4, g.node_count))

    def test_full_forward_burn_covers_reachable_set(self):
        initial = chain_initial(5)
        g = grow_forest_fire(initial, GrowthSchedule.constant(30, 1.0), 1.0, 0.0, 9)

        def out_closure(start, cutoff):
            seen = {start}
            frontier = [start]
            while frontier:
                u = frontier.pop()
                for w in g.out_neighbors(u):
                    if w < cutoff and w not in seen:
                        seen.add(w)
                        frontier.append(w)
            return seen

        for v in range(5, g.node_count):
            targets = set(g.out_neighbors(v))
            assert any(out_closure(t, v) == targets for t in targets)

    def test_densification_over_time(self):
        total_early, total_late = 0.0, 0.0
        steps = 3000
        for s in range(5):
            g = grow_forest_fire(
                chain_initial(4), GrowthSchedule.constant(steps, 1.0), 0.35, 0.35, s
            )
            arrivals = range(4, g.node_count)
            out = [g.out_degree(v) for v in arrivals]
            third = len(out) // 3
            total_early += sum(out[:third]) / third
            total_late += sum(out[-third:]) / third
        assert total_late > total_early


class TestConfigurationRewire:
    def test_degree_sequences_preserved(self, rng):
        for trial in range(5):
            g = make_temporal_graph(random.Random(trial), 60, max_out=4)
            rw = configuration_rewire(g, trial)
            assert sorted(g.in_degree(v) for v in range(g.node_count)) == sorted(
                rw.in_degree(v) for v in range(rw.node_count)
            )
            assert [g.out_degree(v) for v in range(g.node_count)] == [
                rw.out_degree(v) for v in range(rw.node_count)
            ]
            edges = list(rw.edges())
            assert len(edges) == len(set(edges)) == g.edge_count
            assert all(s != d for s, d in edges)

    def test_no_legal_swap_leaves_graph_unchanged(self):
        g = TemporalAttributedDigraph()
        for _ in range(3):
            g.add_node(0)
        g.add_edge(1, 0)
        g.add_edge(2, 0)
        rw = configuration_rewire(g, 0)
        assert sorted(rw.edges()) == [(1, 0), (2, 0)]

    def test_too_few_edges_rejected(self):
        with pytest.raises(ValueError):
            configuration_rewire(pair_seed_graph(), 0)

    def test_rewiring_destroys_clustering(self):
        clustered = grow(
            chain_initial(4),
            GrowthSchedule.constant(3000, 3.0),
            WalkParams(p_jump=0.3, p_out=0.7, p_link=0.8),
            15,
        )
        rewired = configuration_rewire(clustered, 1)
        assert mean_local_clustering(rewired) < mean_local_clustering(clustered)


class TestSharedInvariants:
    @pytest.mark.parametrize(
        "grower",
        [
            lambda init, sched: grow_uniform(init, sched, 3),
            lambda init, sched: grow_dms(init, sched, 1.0, 3),
            lambda init, sched: grow_hk(init, sched, 0.5, 3),
            lambda init, sched: grow_san(init, sched, 0.5, 0.5, 3),
            lambda init, sched: grow_ka(init, sched, 0.5, 3),
            lambda init, sched: grow_rw_mu(init, sched, 0.7, 3),
            lambda init, sched: grow_forest_fire(init, sched, 0.3, 0.2, 3),
        ],
    )
    def test_no_duplicates_no_self_loops_temporal_direction(self, grower):
        initial = chain_initial(4, label="a")
        schedule = GrowthSchedule.constant(300, 2.0, attr_dist={"a": 0.6, "b": 0.4})
        g = grower(initial, schedule)
        edges = list(g.edges())
        assert len(edges) == len(set(edges)) == g.edge_count
        assert all(src > dst for src, dst in edges)
