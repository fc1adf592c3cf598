import collections
import unittest

import numpy as np

from oversquash import exceptions
from oversquash.graph import core, topologies
from oversquash.rewiring import rewire
from oversquash.rewiring.rewire import Objective, RewiringPlan, Strategy
from oversquash.sensitivity import obstruction
from oversquash.spectral import eigen, metrics

antipodes = collections.namedtuple('Antipodes', ['n', 'chords', 'diameter'])

C8_CHORDS = antipodes(8, [(0, 4), (2, 6)], 3)


def random_graphs(count, seed, n_min=4, n_max=9, edge_prob=.35):
    rng = np.random.default_rng(seed)
    graphs = list()
    for _ in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        graphs.append(topologies.random_connected_graph(
            n, edge_prob, int(rng.integers(10 ** 6))))
    return graphs


def total_resistance(graph):
    return metrics.total_resistance(eigen.decompose_graph(graph))


class TestRewire(unittest.TestCase):

    def test_empty_plan(self):
        graph = topologies.cycle_graph(6)
        plan = RewiringPlan(Strategy.SPATIAL_THRESHOLD, 1)
        rewired, report = rewire.rewire(graph, plan)
        self.assertEqual(rewired, graph)
        self.assertEqual(report.resistance_deltas, [])
        self.assertEqual(report.before, report.after)

    def test_chords_shrink_diameter(self):
        graph = topologies.cycle_graph(C8_CHORDS.n)
        plan = RewiringPlan(Strategy.SPATIAL_DIAMETER, 2,
                            added_edges=C8_CHORDS.chords)
        rewired, report = rewire.rewire(graph, plan)
        self.assertEqual(report.before['diameter'], 4)
        self.assertEqual(report.after['diameter'], C8_CHORDS.diameter)
        self.assertEqual(rewired.num_edges, graph.num_edges + 2)

    def test_original_graph_untouched(self):
        graph = topologies.path_graph(5)
        edges = graph.edges
        rewire.rewire(graph, RewiringPlan(Strategy.SPATIAL_THRESHOLD, 1,
                                          added_edges=[(0, 4)]))
        self.assertEqual(graph.edges, edges)
        self.assertFalse(graph.has_edge(0, 4))

    def test_resistance_deltas_are_negative(self):
        for graph in random_graphs(20, seed=0):
            plan = rewire.spectral_rewire(graph, 3,
                                          Objective.MIN_TOTAL_RESISTANCE)
            _, report = rewire.rewire(graph, plan)
            self.assertEqual(len(report.resistance_deltas), len(plan))
            for delta in report.resistance_deltas:
                self.assertLess(delta, -1e-12)
            self.assertAlmostEqual(
                sum(report.resistance_deltas),
                report.after['total_resistance'] -
                report.before['total_resistance'])

    def test_every_single_edge_lowers_total_resistance(self):
        for graph in random_graphs(10, seed=1):
            before = total_resistance(graph)
            for pair in graph.non_edges():
                after = total_resistance(graph.add_edges([pair]))
                self.assertLess(after, before - 1e-12)

    def test_raises_on_budget(self):
        graph = topologies.path_graph(5)
        plan = RewiringPlan(Strategy.SPATIAL_THRESHOLD, 1,
                            added_edges=[(0, 2), (0, 3)])
        self.assertRaises(exceptions.BudgetExceeded, rewire.rewire, graph,
                          plan)

    def test_raises_on_existing_edge(self):
        graph = topologies.path_graph(5)
        plan = RewiringPlan(Strategy.SPATIAL_THRESHOLD, 2,
                            added_edges=[(0, 2), (2, 3)])
        self.assertRaises(exceptions.EdgeAlreadyPresent, rewire.rewire, graph,
                          plan)

    def test_report_serializes(self):
        graph = topologies.path_graph(4)
        plan = rewire.spatial_rewire(graph, 1)
        _, report = rewire.rewire(graph, plan)
        result = report.as_dict()
        self.assertEqual(result['added_edges'], [[0, 3]])
        self.assertEqual(result['before']['diameter'], 3)
        self.assertEqual(plan.as_dict()['strategy'],
                         Strategy.SPATIAL_THRESHOLD)


class TestSpatialRewire(unittest.TestCase):

    def test_path_joins_endpoints(self):
        plan = rewire.spatial_rewire(topologies.path_graph(8), 1)
        self.assertEqual(plan.added_edges, [(0, 7)])

    def test_complete_graph_gives_empty_plan(self):
        plan = rewire.spatial_rewire(topologies.complete_graph(5), 3)
        self.assertEqual(len(plan), 0)
        plan = rewire.spectral_rewire(topologies.complete_graph(5), 3)
        self.assertEqual(len(plan), 0)

    def test_threshold_stops_search(self):
        graph = topologies.path_graph(8)
        plan = rewire.spatial_rewire(graph, 10, threshold=2.)
        self.assertGreater(len(plan), 0)
        self.assertLess(len(plan), 10)
        rewired, _ = rewire.rewire(graph, plan)
        resistance = metrics.resistance_matrix(eigen.decompose_graph(rewired))
        for v, u in rewired.non_edges():
            self.assertLessEqual(resistance[v, u], 2. + 1e-9)

    def test_target_diameter(self):
        graph = topologies.path_graph(10)
        plan = rewire.spatial_rewire(graph, 10, target_diameter=3)
        self.assertEqual(plan.strategy, Strategy.SPATIAL_DIAMETER)
        self.assertEqual(plan.added_edges[0], (0, 9))
        rewired, _ = rewire.rewire(graph, plan)
        self.assertLessEqual(rewired.diameter(), 3)

    def test_full_budget_lowers_max_commute(self):
        graph = topologies.cycle_graph(10)
        budget = len(graph.non_edges())
        plan = rewire.spatial_rewire(graph, budget)
        rewired, report = rewire.rewire(graph, plan)
        self.assertEqual(rewired, topologies.complete_graph(10))
        self.assertLess(report.after['max_commute'],
                        report.before['max_commute'])

    def test_raises_on_zero_budget(self):
        self.assertRaises(ValueError, rewire.spatial_rewire,
                          topologies.path_graph(4), 0)


class TestSpectralRewire(unittest.TestCase):

    def test_barbell_bottleneck(self):
        graph = topologies.barbell_graph(4)
        plan = rewire.spectral_rewire(graph, 1, Objective.MAX_GAP)
        self.assertEqual(plan.strategy, Strategy.SPECTRAL_GAP_GREEDY)
        self.assertEqual(len(plan), 1)
        v, u = plan.added_edges[0]
        self.assertTrue(v < 4 <= u)
        self.assertNotEqual((v, u), (3, 4))

    def test_gap_never_decreases(self):
        for graph in random_graphs(15, seed=2):
            plan = rewire.spectral_rewire(graph, 3, Objective.MAX_GAP)
            _, report = rewire.rewire(graph, plan)
            self.assertGreaterEqual(report.after['spectral_gap'],
                                    report.before['spectral_gap'] - 1e-12)

    def test_budget_covers_all_non_edges(self):
        graph = topologies.path_graph(6)
        budget = len(graph.non_edges()) + 3
        plan = rewire.spectral_rewire(graph, budget,
                                      Objective.MIN_TOTAL_RESISTANCE)
        rewired, _ = rewire.rewire(graph, plan)
        self.assertEqual(rewired, topologies.complete_graph(6))

    def test_deterministic(self):
        graph = topologies.random_connected_graph(9, .3, 3)
        first = rewire.spectral_rewire(graph, 4, Objective.MAX_GAP, seed=4)
        second = rewire.spectral_rewire(graph, 4, Objective.MAX_GAP, seed=4)
        self.assertEqual(first.added_edges, second.added_edges)

    def test_obstruction_bound_tightens(self):
        graph = topologies.barbell_graph(4)
        config = obstruction.ObstructionConfig.scalar(1., .5, .5, 16)
        before = obstruction.cheeger_obstruction_bound(
            config, eigen.decompose_graph(graph), graph)
        rewired, _ = rewire.rewire(
            graph, rewire.spectral_rewire(graph, 3, Objective.MAX_GAP))
        after = obstruction.cheeger_obstruction_bound(
            config, eigen.decompose_graph(rewired), rewired)
        self.assertLessEqual(after.spectral_form, before.spectral_form)

    def test_sampled_candidates(self):
        graph = topologies.path_graph(300)
        first = rewire.candidate_edges(graph, np.random.default_rng(5), 100)
        second = rewire.candidate_edges(graph, np.random.default_rng(5), 100)
        self.assertEqual(len(first), 100)
        self.assertEqual(first, second)
        self.assertEqual(first, sorted(first))
        for v, u in first:
            self.assertFalse(graph.has_edge(v, u))

    def test_small_graphs_use_all_non_edges(self):
        graph = topologies.cycle_graph(7)
        self.assertEqual(rewire.candidate_edges(graph), graph.non_edges())

    def test_raises_on_unknown_objective(self):
        self.assertRaises(ValueError, rewire.spectral_rewire,
                          topologies.path_graph(4), 1, 'curvature')


if __name__ == '__main__':
    unittest.main()
