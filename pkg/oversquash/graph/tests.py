import collections
import io as _io
import math
import os
import tempfile
import unittest

import networkx as nx
import numpy as np

from oversquash import exceptions
from oversquash.graph import core, diffusion, io, topologies
from oversquash.graph.core import ShiftKind

graph_case = collections.namedtuple('GraphCase', ['num_nodes', 'edges'])

K2 = graph_case(2, [(0, 1)])
TRIANGLE = graph_case(3, [(0, 1), (1, 2), (2, 0)])
PATH3 = graph_case(3, [(0, 1), (1, 2)])
C4 = graph_case(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
K4 = graph_case(4, [(v, u) for v in range(4) for u in range(v + 1, 4)])


def enumerate_walks(matrix, length, v, u):
    """ Sum of weighted walks of exactly `length` steps from v to u. """
    if length == 0:
        return 1. if v == u else 0.
    total = 0.
    for w in np.flatnonzero(matrix[v]):
        total += matrix[v, w] * enumerate_walks(matrix, length - 1, w, u)
    return total


def random_graphs(count, n_max, seed):
    rng = np.random.default_rng(seed)
    graphs = list()
    for _ in range(count):
        n = int(rng.integers(3, n_max + 1))
        graphs.append(topologies.random_connected_graph(
            n, 0.45, int(rng.integers(10 ** 6))))
    return graphs


class TestBuildGraph(unittest.TestCase):

    def test_k2(self):
        graph = core.build_graph(*K2)
        self.assertEqual(graph.num_nodes, 2)
        self.assertEqual(list(graph.degrees), [1, 1])

    def test_triangle_degrees(self):
        graph = core.build_graph(*TRIANGLE)
        self.assertEqual(list(graph.degrees), [2, 2, 2])
        self.assertEqual(graph.degrees.sum(), 2 * graph.num_edges)

    def test_raises_on_disconnected(self):
        self.assertRaises(exceptions.Disconnected, core.build_graph,
                          3, [(0, 1)])

    def test_disconnected_names_node(self):
        with self.assertRaises(exceptions.Disconnected) as ctx:
            core.build_graph(3, [(0, 1)])
        self.assertIn('2', str(ctx.exception))

    def test_raises_on_self_loop(self):
        self.assertRaises(exceptions.SelfLoop, core.build_graph,
                          2, [(0, 1), (1, 1)])

    def test_raises_on_duplicate_either_direction(self):
        self.assertRaises(exceptions.DuplicateEdge, core.build_graph,
                          2, [(0, 1), (1, 0)])

    def test_raises_on_out_of_range(self):
        self.assertRaises(exceptions.NodeOutOfRange, core.build_graph,
                          2, [(0, 2)])

    def test_raises_on_empty_edge_list(self):
        self.assertRaises(exceptions.EmptyGraph, core.build_graph, 2, [])

    def test_raises_on_too_large(self):
        n = core.MAX_NODES + 1
        self.assertRaises(exceptions.TooLarge, core.build_graph,
                          n, [(i, i + 1) for i in range(n - 1)])

    def test_adjacency_is_read_only(self):
        graph = core.build_graph(*K2)
        with self.assertRaises(ValueError):
            graph.adjacency[0, 0] = 1.

    def test_add_edges_returns_new_graph(self):
        graph = core.build_graph(*PATH3)
        augmented = graph.add_edges([(0, 2)])
        self.assertEqual(graph.num_edges, 2)
        self.assertEqual(augmented.num_edges, 3)
        self.assertRaises(exceptions.EdgeAlreadyPresent, graph.add_edges,
                          [(1, 0)])


class TestTopologies(unittest.TestCase):

    def test_ring_closed_form(self):
        for r in range(2, 13):
            graph, topo = topologies.make_ring(r)
            shift = core.shift_operator(graph, ShiftKind.SYMMETRIC)
            value = core.matrix_power_entry(shift, r, topo.source,
                                            topo.target)
            self.assertAlmostEqual(value, 2. ** -(r - 1), delta=1e-12)

    def test_ring_c10(self):
        graph, topo = topologies.make_ring(5)
        self.assertEqual(graph.num_nodes, 10)
        self.assertEqual(core.bfs_distances(graph, topo.source)[topo.target],
                         5)

    def test_ring_raises_on_short_distance(self):
        self.assertRaises(exceptions.InvalidDistance, topologies.make_ring, 1)
        self.assertRaises(exceptions.InvalidDistance,
                          topologies.make_crossed_ring, 2)
        self.assertRaises(exceptions.InvalidDistance,
                          topologies.make_clique_path, 2)

    def test_all_kinds_keep_distance(self):
        for kind in topologies.TRANSFER_KINDS:
            for r in range(3, 9):
                graph, topo = topologies.make_topology(kind, r)
                distances = core.bfs_distances(graph, topo.source)
                self.assertEqual(distances[topo.target], r,
                                 msg='{} r={}'.format(kind, r))

    def test_crossed_ring_adds_crosses(self):
        graph, _ = topologies.make_crossed_ring(3)
        ring, _ = topologies.make_ring(3)
        self.assertEqual(graph.num_nodes, ring.num_nodes)
        self.assertGreater(graph.num_edges, ring.num_edges)
        self.assertTrue(graph.has_edge(1, 4))
        self.assertTrue(graph.has_edge(2, 5))

    def test_power_matches_walk_enumeration(self):
        for kind in (topologies.CROSSED_RING, topologies.CLIQUE_PATH):
            for r in range(3, 8):
                graph, topo = topologies.make_topology(kind, r)
                shift = core.shift_operator(graph, ShiftKind.SYMMETRIC)
                value = core.matrix_power_entry(shift, r, topo.source,
                                                topo.target)
                oracle = enumerate_walks(shift, r, topo.source, topo.target)
                self.assertAlmostEqual(value, oracle, delta=1e-12)

    def test_closed_form_comparison_is_reported(self):
        for kind in (topologies.CROSSED_RING, topologies.CLIQUE_PATH):
            for r in range(3, 8):
                report = topologies.compare_closed_form(kind, r)
                self.assertGreater(report['measured'], 0.)
                self.assertGreaterEqual(report['relative_deviation'], 0.)

    def test_clique_path_unique_shortest_path(self):
        graph, topo = topologies.make_clique_path(4)
        paths = list(nx.all_shortest_paths(graph.to_networkx(), topo.source,
                                           topo.target))
        self.assertEqual(len(paths), 1)
        self.assertEqual(graph.degrees[topo.target], 1)
        self.assertEqual(core.bfs_distances(graph, topo.source)[topo.target],
                         4)

    def test_random_connected_graph_is_reproducible(self):
        first = topologies.random_connected_graph(8, 0.3, seed=3)
        second = topologies.random_connected_graph(8, 0.3, seed=3)
        self.assertEqual(first, second)


class TestShiftOperator(unittest.TestCase):

    def test_k2_symmetric(self):
        graph = core.build_graph(*K2)
        shift = core.shift_operator(graph, ShiftKind.SYMMETRIC)
        np.testing.assert_allclose(shift, [[0, 1], [1, 0]])

    def test_c4_symmetric_entries(self):
        graph = core.build_graph(*C4)
        shift = core.shift_operator(graph, ShiftKind.SYMMETRIC)
        self.assertAlmostEqual(shift[0, 1], .5)
        self.assertAlmostEqual(shift[0, 2], 0.)

    def test_triangle_random_walk_rows(self):
        graph = core.build_graph(*TRIANGLE)
        shift = core.shift_operator(graph, ShiftKind.RANDOM_WALK)
        np.testing.assert_allclose(shift.sum(axis=1), np.ones(3))

    def test_support_equals_edges(self):
        for graph in random_graphs(10, 8, seed=1):
            for kind in ShiftKind.ALL:
                shift = core.shift_operator(graph, kind)
                np.testing.assert_array_equal(shift != 0,
                                              graph.adjacency != 0)

    def test_symmetric_spectrum_in_unit_interval(self):
        for graph in random_graphs(10, 8, seed=2):
            shift = core.shift_operator(graph, ShiftKind.SYMMETRIC)
            np.testing.assert_array_equal(shift, shift.T)
            eigenvalues = np.linalg.eigvalsh(shift)
            self.assertGreaterEqual(eigenvalues.min(), -1 - 1e-12)
            self.assertAlmostEqual(eigenvalues.max(), 1., delta=1e-12)

    def test_message_passing_matrix(self):
        graph = core.build_graph(*K2)
        S = core.message_passing_matrix(graph, ShiftKind.SYMMETRIC, 1., 1.)
        np.testing.assert_allclose(S.matrix, np.ones((2, 2)))

        S = core.message_passing_matrix(graph, ShiftKind.SYMMETRIC, 0., 1.)
        np.testing.assert_allclose(S.matrix, core.shift_operator(
            graph, ShiftKind.SYMMETRIC))

        S = core.message_passing_matrix(graph, ShiftKind.SYMMETRIC, 1., 0.)
        np.testing.assert_allclose(S.matrix, np.eye(2))

    def test_message_passing_top_eigenvalue(self):
        graph = topologies.make_clique_path(5)[0]
        S = core.message_passing_matrix(graph, ShiftKind.SYMMETRIC, .7, .4)
        self.assertAlmostEqual(np.linalg.eigvalsh(S.matrix).max(), 1.1,
                               delta=1e-12)

    def test_raises_on_negative_coefficient(self):
        graph = core.build_graph(*K2)
        self.assertRaises(exceptions.NegativeCoefficient,
                          core.message_passing_matrix, graph,
                          ShiftKind.SYMMETRIC, -1., 1.)


class TestWalks(unittest.TestCase):

    def test_power_zero_is_identity(self):
        graph = core.build_graph(*C4)
        S = core.message_passing_matrix(graph, ShiftKind.SYMMETRIC, .5, .5)
        self.assertEqual(core.matrix_power_entry(S, 0, 1, 1), 1.)
        self.assertEqual(core.matrix_power_entry(S, 0, 1, 2), 0.)

    def test_power_matches_enumeration_on_small_graphs(self):
        rng = np.random.default_rng(5)
        for graph in random_graphs(12, 8, seed=4):
            kind = ShiftKind.ALL[int(rng.integers(3))]
            c_r, c_a = rng.uniform(0, 1, size=2)
            S = core.message_passing_matrix(graph, kind, c_r, c_a)
            power = int(rng.integers(0, 6))
            v, u = rng.integers(graph.num_nodes, size=2)
            self.assertAlmostEqual(
                core.matrix_power_entry(S, power, v, u),
                enumerate_walks(S.matrix, power, v, u), delta=1e-12)

    def test_power_seven_on_cycle(self):
        graph = topologies.cycle_graph(7)
        shift = core.shift_operator(graph, ShiftKind.RANDOM_WALK)
        self.assertAlmostEqual(core.matrix_power_entry(shift, 7, 0, 3),
                               enumerate_walks(shift, 7, 0, 3), delta=1e-12)

    def test_walk_count_path(self):
        graph = core.build_graph(*PATH3)
        self.assertEqual(core.walk_count(graph, 0, 2, 2), 1)

    def test_walk_count_triangle(self):
        graph = core.build_graph(*TRIANGLE)
        self.assertEqual(core.walk_count(graph, 0, 1, 2), 2)

    def test_walk_count_zero_length(self):
        graph = core.build_graph(*TRIANGLE)
        self.assertEqual(core.walk_count(graph, 1, 1, 0), 1)
        self.assertEqual(core.walk_count(graph, 1, 2, 0), 0)

    def test_walk_count_monotone_and_symmetric(self):
        for graph in random_graphs(5, 8, seed=6):
            previous = 0
            for length in range(8):
                count = core.walk_count(graph, 0, graph.num_nodes - 1, length)
                self.assertGreaterEqual(count, previous)
                self.assertEqual(count, core.walk_count(
                    graph, graph.num_nodes - 1, 0, length))
                previous = count

    def test_bfs_distances(self):
        graph, topo = topologies.make_ring(5)
        self.assertEqual(core.bfs_distances(graph, topo.source).max(), 5)

        graph = core.build_graph(*K4)
        for v in range(4):
            distances = core.bfs_distances(graph, v)
            self.assertEqual(distances[v], 0)
            self.assertEqual(sorted(distances)[1:], [1, 1, 1])


class TestGraphIO(unittest.TestCase):

    def test_edge_list_with_header(self):
        graph = io.parse_edge_list('# nodes 3\n0 1\n\n1 2\n')
        self.assertEqual(graph, core.build_graph(*PATH3))

    def test_edge_list_round_trip(self):
        graph = topologies.make_crossed_ring(5)[0]
        self.assertEqual(io.parse_edge_list(io.format_edge_list(graph)), graph)

    def test_json_round_trip(self):
        graph = topologies.make_clique_path(5)[0]
        self.assertEqual(io.parse_json(io.format_json(graph)), graph)

    def test_raises_on_bad_line(self):
        self.assertRaises(exceptions.GraphFormatError, io.parse_edge_list,
                          '0 1\n1 x\n')

    def test_load_and_save_by_suffix(self):
        graph = topologies.make_ring(4)[0]
        directory = tempfile.mkdtemp()
        for name in ('graph.json', 'graph.txt'):
            path = os.path.join(directory, name)
            io.save_graph(graph, path)
            self.assertEqual(io.load_graph(path), graph)

    def test_load_from_handle(self):
        graph = io.load_graph(_io.StringIO('0 1\n1 2\n'))
        self.assertEqual(graph.num_nodes, 3)


class TestWalkDiffusion(unittest.TestCase):

    def test_lse(self):
        self.assertAlmostEqual(diffusion.lse([0., 0.]), math.log(2))
        self.assertAlmostEqual(diffusion.lse([3.5]), 3.5)
        self.assertAlmostEqual(diffusion.lse([1000., 1000.]),
                               1000. + math.log(2))
        self.assertRaises(exceptions.EmptyVector, diffusion.lse, [])

    def test_k2_operators(self):
        graph = core.build_graph(*K2)
        weights = diffusion.walk_operators(graph, 1)
        gamma = 1. / math.log(1 + math.e)
        np.testing.assert_allclose(weights.gammas[0], [gamma, gamma])
        np.testing.assert_allclose(weights.operators[0],
                                   [[0., gamma], [gamma, 0.]])

    def test_operators_keep_walk_pattern(self):
        graph = topologies.make_ring(4)[0]
        weights = diffusion.walk_operators(graph, 4)
        for walks, zeta, gammas in zip(weights.walk_matrices,
                                       weights.operators, weights.gammas):
            np.testing.assert_array_equal(zeta == 0, walks == 0)
            np.testing.assert_allclose(zeta, gammas[:, None] * walks)

    def test_zero_weights_give_zero_output(self):
        graph = core.build_graph(*TRIANGLE)
        weights = diffusion.walk_operators(graph, 2)
        out = diffusion.diffusion_forward(weights, np.ones((3, 2)), np.eye(2),
                                          [np.zeros((2, 4))] * 2)
        np.testing.assert_array_equal(out, np.zeros((3, 4)))

    def test_single_length_is_scaled_convolution(self):
        graph = core.build_graph(*C4)
        weights = diffusion.walk_operators(graph, 1)
        features = np.arange(8.).reshape(4, 2)
        out = diffusion.diffusion_forward(weights, features, np.eye(2),
                                          [np.eye(2)])
        shift = core.shift_operator(graph, ShiftKind.SYMMETRIC)
        expected = weights.gammas[0][:, None] * shift.dot(features)
        np.testing.assert_allclose(out, expected)

    def test_forward_matches_term_by_term(self):
        graph = core.build_graph(*TRIANGLE)
        rng = np.random.default_rng(0)
        weights = diffusion.walk_operators(graph, 3)
        features = rng.normal(size=(3, 2))
        encoder = rng.normal(size=(2, 3))
        per_length = [rng.normal(size=(3, 2)) for _ in range(3)]
        expected = np.zeros((3, 2))
        shift = core.shift_operator(graph, ShiftKind.SYMMETRIC)
        for m, w_m in enumerate(per_length, 1):
            walks = np.linalg.matrix_power(shift, m)
            gamma = np.array([1. / diffusion.lse(row) for row in walks])
            expected += (gamma[:, None] * walks).dot(features.dot(encoder)).dot(
                w_m)
        out = diffusion.diffusion_forward(weights, features, encoder,
                                          per_length)
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_forward_is_linear(self):
        graph = topologies.make_clique_path(4)[0]
        rng = np.random.default_rng(1)
        weights = diffusion.walk_operators(graph, 3)
        encoder = rng.normal(size=(3, 3))
        per_length = [rng.normal(size=(3, 2)) for _ in range(3)]
        x1, x2 = rng.normal(size=(2, graph.num_nodes, 3))

        def f(x):
            return diffusion.diffusion_forward(weights, x, encoder, per_length)

        np.testing.assert_allclose(f(2. * x1 - .5 * x2),
                                   2. * f(x1) - .5 * f(x2), atol=1e-12)

    def test_raises_on_shape_mismatch(self):
        graph = core.build_graph(*TRIANGLE)
        weights = diffusion.walk_operators(graph, 1)
        self.assertRaises(exceptions.ShapeMismatch,
                          diffusion.diffusion_forward, weights,
                          np.ones((4, 2)), np.eye(2), [np.eye(2)])

    def test_correction_tensor_marks_unreachable(self):
        graph = topologies.make_ring(3)[0]
        weights = diffusion.walk_operators(graph, 1)
        correction = diffusion.correction_tensor(weights, 1)
        self.assertTrue(np.isinf(correction[0, 0]))
        self.assertTrue(np.isfinite(correction[0, 1]))


if __name__ == '__main__':
    unittest.main()
