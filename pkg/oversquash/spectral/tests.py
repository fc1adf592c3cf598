import collections
import unittest

import numpy as np

from oversquash import exceptions
from oversquash.graph import core, topologies
from oversquash.spectral import eigen, metrics, walks

graph_case = collections.namedtuple('GraphCase', ['num_nodes', 'edges'])

K2 = graph_case(2, [(0, 1)])
TRIANGLE = graph_case(3, [(0, 1), (1, 2), (2, 0)])
C4 = graph_case(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
K4 = graph_case(4, [(v, u) for v in range(4) for u in range(v + 1, 4)])
P4 = graph_case(4, [(0, 1), (1, 2), (2, 3)])


def random_graphs(count, n_min, n_max, seed, edge_prob=.4):
    rng = np.random.default_rng(seed)
    graphs = list()
    for _ in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        graphs.append(topologies.random_connected_graph(
            n, edge_prob, int(rng.integers(10 ** 6))))
    return graphs


class TestEigendecompose(unittest.TestCase):

    def test_normalized_laplacian_k2(self):
        graph = core.build_graph(*K2)
        np.testing.assert_allclose(eigen.normalized_laplacian(graph),
                                   [[1, -1], [-1, 1]])

    def test_laplacian_kernel(self):
        graph = topologies.make_clique_path(5)[0]
        laplacian = eigen.normalized_laplacian(graph)
        np.testing.assert_allclose(laplacian.dot(np.sqrt(graph.degrees)),
                                   np.zeros(graph.num_nodes), atol=1e-12)
        np.testing.assert_array_equal(laplacian, laplacian.T)

    def test_identity(self):
        decomp = eigen.eigendecompose(np.eye(4))
        np.testing.assert_allclose(decomp.eigenvalues, np.ones(4))

    def test_k2_laplacian(self):
        graph = core.build_graph(*K2)
        decomp = eigen.decompose_graph(graph)
        np.testing.assert_allclose(decomp.eigenvalues, [0., 2.], atol=1e-12)

    def test_c4_laplacian(self):
        graph = core.build_graph(*C4)
        decomp = eigen.decompose_graph(graph)
        expected = sorted(1 - np.cos(2 * np.pi * np.arange(4) / 4))
        np.testing.assert_allclose(decomp.eigenvalues, expected, atol=1e-12)

    def test_raises_on_asymmetric(self):
        self.assertRaises(exceptions.NotSymmetric, eigen.eigendecompose,
                          np.array([[1., 2.], [0., 1.]]))

    def test_raises_on_sweep_cap(self):
        matrix = np.array([[2., 1.], [1., 3.]])
        self.assertRaises(exceptions.NoConvergence, eigen.eigendecompose,
                          matrix, max_sweeps=0)

    def test_decomposition_invariants(self):
        for graph in random_graphs(20, 3, 12, seed=0):
            laplacian = eigen.normalized_laplacian(graph)
            decomp = eigen.decompose_graph(graph)
            values, vectors = decomp.eigenvalues, decomp.eigenvectors

            self.assertAlmostEqual(values[0], 0., delta=1e-10)
            self.assertGreater(values[1], 0.)
            self.assertTrue(np.all(np.diff(values) >= 0))
            np.testing.assert_allclose(vectors.T.dot(vectors),
                                       np.eye(graph.num_nodes), atol=1e-10)
            residual = laplacian.dot(vectors) - vectors * values
            self.assertLess(np.abs(residual).max(), 1e-9)
            np.testing.assert_allclose(values, np.linalg.eigvalsh(laplacian),
                                       atol=1e-10)
            if not graph.is_bipartite():
                self.assertLess(values[-1], 2.)

    def test_first_nonzero_component_positive(self):
        graph = topologies.make_ring(4)[0]
        decomp = eigen.decompose_graph(graph)
        for column in decomp.eigenvectors.T:
            first = column[np.abs(column) > eigen.SIGN_TOL][0]
            self.assertGreater(first, 0.)

    def test_deterministic(self):
        graph = topologies.make_crossed_ring(5)[0]
        first = eigen.decompose_graph(graph)
        second = eigen.decompose_graph(graph)
        np.testing.assert_array_equal(first.eigenvalues, second.eigenvalues)
        np.testing.assert_array_equal(first.eigenvectors, second.eigenvectors)


class TestCheeger(unittest.TestCase):

    def test_bounds(self):
        self.assertEqual(metrics.cheeger_bounds(1.), (.5, np.sqrt(2.)))
        lower, upper = metrics.cheeger_bounds(2.)
        self.assertAlmostEqual(lower, 1.)
        self.assertAlmostEqual(upper, 2.)

    def test_exact(self):
        self.assertAlmostEqual(metrics.cheeger_exact(core.build_graph(*K4)),
                               2. / 3.)
        self.assertAlmostEqual(metrics.cheeger_exact(core.build_graph(*C4)),
                               .5)
        self.assertAlmostEqual(metrics.cheeger_exact(core.build_graph(*K2)),
                               1.)

    def test_c4_bounds_contain_exact(self):
        graph = core.build_graph(*C4)
        lambda_1 = eigen.decompose_graph(graph).spectral_gap
        lower, upper = metrics.cheeger_bounds(lambda_1)
        exact = metrics.cheeger_exact(graph)
        self.assertLessEqual(lower, exact + 1e-12)
        self.assertLessEqual(exact, upper)

    def test_raises_on_large_graph(self):
        self.assertRaises(exceptions.TooLarge, metrics.cheeger_exact,
                          topologies.path_graph(17))

    def test_cheeger_inequality(self):
        for graph in random_graphs(200, 3, 10, seed=1):
            lambda_1 = eigen.decompose_graph(graph).spectral_gap
            exact = metrics.cheeger_exact(graph)
            self.assertGreaterEqual(2. * exact, lambda_1 - 1e-12)
            self.assertGreater(lambda_1, exact ** 2 / 2.)


class TestResistance(unittest.TestCase):

    def _resistance(self, case, v, u):
        decomp = eigen.decompose_graph(core.build_graph(*case))
        return metrics.effective_resistance(decomp, v, u)

    def test_examples(self):
        self.assertAlmostEqual(self._resistance(K2, 0, 1), 1.)
        self.assertAlmostEqual(self._resistance(P4, 0, 3), 3.)
        self.assertAlmostEqual(self._resistance(C4, 0, 2), 1.)

    def test_pinv_oracle_examples(self):
        self.assertAlmostEqual(
            metrics.resistance_pinv_oracle(core.build_graph(*K2), 0, 1), 1.)
        triangle = core.build_graph(*TRIANGLE)
        for v, u in metrics.node_pairs(3):
            self.assertAlmostEqual(
                metrics.resistance_pinv_oracle(triangle, v, u), 2. / 3.)

    def test_spectral_matches_pinv_oracle(self):
        for graph in random_graphs(50, 3, 12, seed=2):
            decomp = eigen.decompose_graph(graph)
            resistance = metrics.resistance_matrix(decomp)
            pinv = np.linalg.pinv(np.diag(graph.degrees) - graph.adjacency)
            for v, u in metrics.node_pairs(graph.num_nodes):
                spectral = metrics.effective_resistance(decomp, v, u)
                oracle = metrics.resistance_pinv_oracle(graph, v, u)
                self.assertAlmostEqual(spectral, oracle, delta=1e-10)
                self.assertAlmostEqual(resistance[v, u], oracle, delta=1e-10)
                e = np.zeros(graph.num_nodes)
                e[v], e[u] = 1., -1.
                self.assertAlmostEqual(e.dot(pinv).dot(e), oracle, delta=1e-9)

    def test_triangle_inequality(self):
        for graph in random_graphs(20, 4, 10, seed=3):
            resistance = metrics.resistance_matrix(
                eigen.decompose_graph(graph))
            n = graph.num_nodes
            for w in range(n):
                bound = resistance[:, [w]] + resistance[[w], :]
                self.assertTrue(np.all(resistance <= bound + 1e-12))

    def test_total_resistance_is_sum_over_pairs(self):
        graph = core.build_graph(*P4)
        decomp = eigen.decompose_graph(graph)
        # pairs at distance 1, 1, 1, 2, 2, 3
        self.assertAlmostEqual(metrics.total_resistance(decomp), 10.)


class TestWalkTimes(unittest.TestCase):

    def test_k2(self):
        decomp = eigen.decompose_graph(core.build_graph(*K2))
        self.assertAlmostEqual(metrics.access_time(decomp, 0, 1), 1.)
        self.assertAlmostEqual(metrics.access_time(decomp, 1, 0), 1.)
        self.assertAlmostEqual(metrics.commute_time(decomp, 0, 1), 2.)

    def test_triangle(self):
        decomp = eigen.decompose_graph(core.build_graph(*TRIANGLE))
        self.assertAlmostEqual(metrics.access_time(decomp, 0, 2), 2.)

    def test_path_endpoint_access(self):
        # from an end of P4 the walk needs (n - 1)^2 steps to reach the
        # other end
        decomp = eigen.decompose_graph(core.build_graph(*P4))
        self.assertAlmostEqual(metrics.access_time(decomp, 0, 3), 9.)

    def test_raises_on_same_node(self):
        decomp = eigen.decompose_graph(core.build_graph(*TRIANGLE))
        self.assertRaises(exceptions.SameNode, metrics.access_time, decomp,
                          1, 1)
        self.assertRaises(exceptions.SameNode, metrics.commute_time, decomp,
                          1, 1)

    def test_commute_identities(self):
        for graph in random_graphs(30, 3, 12, seed=4):
            decomp = eigen.decompose_graph(graph)
            for v, u in metrics.node_pairs(graph.num_nodes):
                commute = metrics.commute_time(decomp, v, u)
                access_sum = metrics.access_time(decomp, v, u) + \
                    metrics.access_time(decomp, u, v)
                self.assertAlmostEqual(commute, access_sum, delta=1e-8)
                resistance = metrics.effective_resistance(decomp, v, u)
                self.assertAlmostEqual(
                    commute - 2 * graph.num_edges * resistance, 0., delta=1e-8)

    def test_topology_metrics(self):
        graph = topologies.make_crossed_ring(4)[0]
        report = metrics.topology_metrics(graph)
        np.testing.assert_allclose(report.commute,
                                   report.access + report.access.T, atol=1e-8)
        np.testing.assert_allclose(report.commute,
                                   2 * graph.num_edges * report.resistance)
        np.testing.assert_array_equal(np.diag(report.resistance),
                                      np.zeros(graph.num_nodes))
        self.assertTrue(np.all(report.access >= -1e-10))
        self.assertIsNotNone(report.cheeger_exact)
        self.assertLessEqual(report.cheeger_lower, report.cheeger_exact)


class TestRandomWalkOracle(unittest.TestCase):

    def test_k2(self):
        graph = core.build_graph(*K2)
        estimate = walks.random_walk_oracle(graph, 0, 1, 10 ** 5, seed=0)
        self.assertAlmostEqual(estimate.hitting_mean, 1., delta=.02)
        self.assertEqual(estimate.censored, 0)

    def test_triangle_hitting(self):
        graph = core.build_graph(*TRIANGLE)
        decomp = eigen.decompose_graph(graph)
        estimate = walks.random_walk_oracle(graph, 0, 1, 10 ** 5, seed=1)
        expected = metrics.access_time(decomp, 0, 1)
        self.assertLess(abs(estimate.hitting_mean - expected),
                        3 * estimate.hitting_stderr)

    def test_c6_antipodal_commute(self):
        graph = topologies.cycle_graph(6)
        decomp = eigen.decompose_graph(graph)
        estimate = walks.random_walk_oracle(graph, 0, 3, 10 ** 5, seed=2)
        expected = 2 * graph.num_edges * metrics.effective_resistance(
            decomp, 0, 3)
        self.assertLess(abs(estimate.commute_mean - expected),
                        3 * estimate.commute_stderr)

    def test_random_graph_hitting_and_commute(self):
        graph = topologies.random_connected_graph(10, .35, seed=11)
        decomp = eigen.decompose_graph(graph)
        estimate = walks.random_walk_oracle(graph, 0, 9, 10 ** 5, seed=3)
        self.assertLess(abs(estimate.hitting_mean -
                            metrics.access_time(decomp, 0, 9)),
                        3 * estimate.hitting_stderr)
        self.assertLess(abs(estimate.commute_mean -
                            metrics.commute_time(decomp, 0, 9)),
                        3 * estimate.commute_stderr)

    def test_reproducible(self):
        graph = topologies.make_ring(3)[0]
        first = walks.random_walk_oracle(graph, 0, 3, 1000, seed=5)
        second = walks.random_walk_oracle(graph, 0, 3, 1000, seed=5)
        self.assertEqual(first.hitting_mean, second.hitting_mean)
        self.assertEqual(first.commute_mean, second.commute_mean)

    def test_censoring_is_counted(self):
        graph = topologies.path_graph(8)
        estimate = walks.random_walk_oracle(graph, 0, 7, 200, seed=6,
                                            step_cap=5)
        self.assertEqual(estimate.censored, 200)


if __name__ == '__main__':
    unittest.main()
