import collections
import unittest
import warnings

import numpy as np
from scipy import stats

from oversquash import exceptions
from oversquash.graph import core, topologies
from oversquash.graph.core import ShiftKind
from oversquash.sensitivity import bounds, mpnn, obstruction
from oversquash.sensitivity.mpnn import MpnnConfig, MpnnModel, Nonlinearity
from oversquash.spectral import eigen, metrics

trial = collections.namedtuple('Trial', ['graph', 'model', 'H0', 'v', 'u'])

RELATIVE_TOL = 1e-9


def random_graph(rng, n_min=3, n_max=10, edge_prob=.4):
    n = int(rng.integers(n_min, n_max + 1))
    return topologies.random_connected_graph(n, edge_prob,
                                             int(rng.integers(10 ** 6)))


def random_model(rng, width=None, depth=None, shift=None, nonlinearity=None,
                 scale=None):
    config = MpnnConfig(
        width=width or int(rng.integers(1, 5)),
        depth=depth or int(rng.integers(1, 7)),
        c_r=float(rng.uniform(0, 1)),
        c_a=float(rng.uniform(0, 1)),
        shift=shift or ShiftKind.ALL[int(rng.integers(3))],
        nonlinearity=nonlinearity or Nonlinearity.ALL[int(rng.integers(3))],
        weight_scale=scale or float(rng.uniform(.2, 1.)))
    return MpnnModel.random(config, int(rng.integers(10 ** 6)))


def random_trials(count, seed):
    rng = np.random.default_rng(seed)
    trials = list()
    for _ in range(count):
        graph = random_graph(rng)
        model = random_model(rng)
        H0 = rng.normal(size=(graph.num_nodes, model.config.width))
        v, u = (int(node) for node in rng.integers(graph.num_nodes, size=2))
        trials.append(trial(graph, model, H0, v, u))
    return trials


def relative_error(exact, approx):
    return np.linalg.norm(exact - approx) / np.linalg.norm(exact)


def non_bipartite_path(n):
    """ Path on n nodes with the chord (0, 2) closing a triangle. """
    return core.build_graph(n, [(i, i + 1) for i in range(n - 1)] + [(0, 2)])


class TestForward(unittest.TestCase):

    def test_identity_model_keeps_features(self):
        graph = topologies.make_ring(3)[0]
        config = MpnnConfig(3, 4, c_r=1., c_a=0.,
                            nonlinearity=Nonlinearity.IDENTITY)
        model = MpnnModel(config, [np.eye(3)] * 4, [np.eye(3)] * 4)
        H0 = np.random.default_rng(0).normal(size=(6, 3))
        np.testing.assert_allclose(mpnn.mpnn_forward(model, graph, H0).output,
                                   H0)

    def test_relu_zero_input_gives_zero_output(self):
        graph = topologies.make_clique_path(4)[0]
        model = MpnnModel.random(MpnnConfig(3, 3), seed=1)
        state = mpnn.mpnn_forward(model, graph,
                                  np.zeros((graph.num_nodes, 3)))
        np.testing.assert_array_equal(state.output,
                                      np.zeros((graph.num_nodes, 3)))
        self.assertEqual(len(state.features), 4)

    def test_feature_norm_bound(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            graph = random_graph(rng)
            model = random_model(rng, shift=ShiftKind.SYMMETRIC)
            H0 = rng.normal(size=(graph.num_nodes, model.config.width))
            state = mpnn.mpnn_forward(model, graph, H0)
            for t, features in enumerate(state.features):
                bound = bounds.feature_norm_bound(model, np.linalg.norm(H0), t)
                self.assertLessEqual(np.linalg.norm(features),
                                     bound * (1 + RELATIVE_TOL))

    def test_contracting_model_shrinks_features(self):
        graph = topologies.make_clique_path(5)[0]
        config = MpnnConfig(3, 6, c_r=.5, c_a=.5)
        model = MpnnModel.scaled_orthogonal(config, .9, seed=3)
        H0 = np.random.default_rng(3).normal(size=(graph.num_nodes, 3))
        state = mpnn.mpnn_forward(model, graph, H0)
        self.assertLess(np.linalg.norm(state.output), np.linalg.norm(H0))

    def test_raises_on_shape_mismatch(self):
        graph = topologies.make_ring(3)[0]
        model = MpnnModel.random(MpnnConfig(2, 2), seed=0)
        self.assertRaises(exceptions.ShapeMismatch, mpnn.mpnn_forward, model,
                          graph, np.zeros((6, 3)))

    def test_regularity_constants(self):
        config = MpnnConfig(4, 3, weight_scale=.3)
        model = MpnnModel.random(config, seed=4)
        self.assertEqual(model.c_sigma, 1.)
        self.assertLessEqual(model.max_entry, .3)
        self.assertLessEqual(model.min_singular_value,
                             model.max_spectral_norm)

        model = MpnnModel.scaled_orthogonal(config, .4, seed=4)
        self.assertAlmostEqual(model.max_spectral_norm, .4)
        self.assertAlmostEqual(model.min_singular_value, .4)

    def test_constants_follow_weight_changes(self):
        model = MpnnModel.random(MpnnConfig(2, 1), seed=5)
        model.residual_weights[0] = np.array([[3., 0.], [0., 3.]])
        self.assertEqual(model.max_entry, 3.)
        self.assertAlmostEqual(model.max_spectral_norm, 3.)

    def test_raises_on_negative_coefficient(self):
        self.assertRaises(exceptions.NegativeCoefficient, MpnnConfig, 2, 2,
                          c_r=-.1)


class TestJacobian(unittest.TestCase):

    def test_tied_linear_weights(self):
        rng = np.random.default_rng(6)
        graph = topologies.make_crossed_ring(4)[0]
        config = MpnnConfig(3, 4, c_r=.3, c_a=.8,
                            nonlinearity=Nonlinearity.IDENTITY)
        weights = list(rng.normal(size=(4, 3, 3)))
        model = MpnnModel(config, weights, weights)
        H0 = rng.normal(size=(graph.num_nodes, 3))

        block = mpnn.jacobian_exact(model, graph, H0, 4, 0)
        S = core.message_passing_matrix(graph, config.shift, .3, .8)
        product = obstruction.weight_product(weights, 0, 4)
        expected = product * core.matrix_power_entry(S, 4, 4, 0)
        np.testing.assert_allclose(block.matrix, expected, atol=1e-12)

    def test_zero_beyond_receptive_field(self):
        rng = np.random.default_rng(7)
        for graph, model, H0, _, _ in random_trials(30, seed=7):
            with warnings.catch_warnings():
                warnings.simplefilter('ignore')
                distances = core.distance_matrix(graph)
                m = model.config.depth
                k = int(rng.integers(0, m))
                far = np.argwhere(distances > m - k)
                for v, u in far[:5]:
                    block = mpnn.jacobian_exact(model, graph, H0, v, u, k, m)
                    self.assertTrue(np.all(block.matrix == 0))
                    fd = mpnn.jacobian_fd_oracle(model, graph, H0, v, u, k=k,
                                                 m=m)
                    self.assertTrue(np.all(fd.matrix == 0))

    def _agreement(self, nonlinearity, tol, step, seed):
        rng = np.random.default_rng(seed)
        checked = 0
        while checked < 50:
            graph = random_graph(rng, n_max=8)
            model = random_model(rng, depth=int(rng.integers(1, 5)),
                                 nonlinearity=nonlinearity, scale=1.)
            m = model.config.depth
            k = int(rng.integers(0, m))
            try:
                H0 = mpnn.sample_kink_free_input(
                    model, graph, int(rng.integers(10 ** 6)), tol=1e-3)
            except RuntimeError:
                continue
            distances = core.distance_matrix(graph)
            reachable = np.argwhere(distances <= m - k)
            v, u = reachable[int(rng.integers(len(reachable)))]

            exact = mpnn.jacobian_exact(model, graph, H0, v, u, k, m).matrix
            if np.linalg.norm(exact) < 1e-3:
                continue
            fd = mpnn.jacobian_fd_oracle(model, graph, H0, v, u, step, k,
                                         m).matrix
            self.assertLess(relative_error(exact, fd), tol)
            checked += 1

    def test_matches_finite_differences_tanh(self):
        self._agreement(Nonlinearity.TANH, 1e-5, 1e-6, seed=8)

    def test_matches_finite_differences_relu(self):
        self._agreement(Nonlinearity.RELU, 1e-5, 1e-7, seed=9)

    def test_fd_identity_at_same_layer(self):
        graph = topologies.make_ring(3)[0]
        model = MpnnModel.random(MpnnConfig(3, 2), seed=10)
        H0 = np.random.default_rng(10).normal(size=(6, 3))
        block = mpnn.jacobian_fd_oracle(model, graph, H0, 2, 2, k=2, m=2)
        np.testing.assert_allclose(block.matrix, np.eye(3), atol=1e-8)

    def test_warns_near_kink(self):
        graph = topologies.make_ring(3)[0]
        model = MpnnModel.random(MpnnConfig(2, 2), seed=11)
        with self.assertWarns(exceptions.KinkProximityWarning):
            mpnn.jacobian_exact(model, graph, np.zeros((6, 2)), 0, 1)

    def test_l1_norm_is_max_column_sum(self):
        block = mpnn.JacobianBlock(0, 1, 0, 1,
                                   np.array([[1., -2.], [3., .5]]))
        self.assertEqual(block.l1_norm, 4.)
        self.assertEqual(block.entrywise_l1, 6.5)


class TestSensitivityBounds(unittest.TestCase):

    def test_ring_bound(self):
        graph, topo = topologies.make_ring(5)
        config = MpnnConfig(3, 5, c_r=0., c_a=1.)
        model = MpnnModel.random(config, seed=12)
        S = core.message_passing_matrix(graph, ShiftKind.SYMMETRIC, 0., 1.)
        bound = bounds.bound_sensitivity(model, S, 5, topo.target, topo.source)
        expected = (model.max_entry * 3) ** 5 * .0625
        self.assertAlmostEqual(bound, expected, delta=1e-12 * expected)

    def test_zero_layers(self):
        graph = topologies.make_ring(3)[0]
        model = MpnnModel.random(MpnnConfig(2, 1), seed=13)
        S = core.message_passing_matrix(graph, ShiftKind.SYMMETRIC, 1., 1.)
        self.assertEqual(bounds.bound_sensitivity(model, S, 0, 1, 1), 1.)
        self.assertEqual(bounds.bound_sensitivity(model, S, 0, 1, 2), 0.)

    def test_rejects_mismatched_matrix(self):
        graph = topologies.make_ring(3)[0]
        model = MpnnModel.random(MpnnConfig(2, 1, c_r=1., c_a=1.), seed=13)
        S = core.message_passing_matrix(graph, ShiftKind.SYMMETRIC, .5, 1.)
        self.assertRaises(ValueError, bounds.bound_sensitivity, model, S, 1,
                          0, 1)

    def test_general_bound_single_layer(self):
        graph = core.build_graph(3, [(0, 1), (1, 2), (2, 0)])
        shift = core.shift_operator(graph, ShiftKind.SYMMETRIC)
        value = bounds.bound_general(2., .5, .25, shift, 1, 0, 1, 3)
        self.assertAlmostEqual(value, 3 * 2. * .25 * .5)

    def test_general_bound_specializes(self):
        graph = topologies.make_clique_path(4)[0]
        model = MpnnModel.random(MpnnConfig(3, 3, c_r=.4, c_a=.9), seed=14)
        factor = model.c_sigma * model.max_entry * 3
        shift = core.shift_operator(graph, ShiftKind.SYMMETRIC)
        S = core.message_passing_matrix(graph, ShiftKind.SYMMETRIC, .4, .9)
        general = bounds.bound_general(1., factor * .4, factor * .9, shift, 3,
                                       0, 3, 3)
        sensitivity = bounds.bound_sensitivity(model, S, 3, 0, 3)
        self.assertAlmostEqual(general, 3 * sensitivity,
                               delta=1e-12 * general)

    def test_general_bound_on_triangle(self):
        graph = core.build_graph(3, [(0, 1), (1, 2), (2, 0)])
        rng = np.random.default_rng(15)
        for _ in range(20):
            model = random_model(rng, depth=2, nonlinearity=Nonlinearity.TANH)
            H0 = rng.normal(size=(3, model.config.width))
            for v, u in ((0, 1), (1, 1), (2, 0)):
                block = mpnn.jacobian_exact(model, graph, H0, v, u)
                bound = bounds.bound_general_for_model(model, graph, 2, v, u)
                self.assertLessEqual(block.l1_norm,
                                     bound * (1 + RELATIVE_TOL) + 1e-15)

    def test_distant_bound_collapses_at_k_zero(self):
        graph, topo = topologies.make_ring(4)
        model = MpnnModel.random(MpnnConfig(2, 4, c_r=.5, c_a=.7), seed=16)
        bound = bounds.bound_distant(model, graph, topo.target, topo.source,
                                     4, 0)
        self.assertEqual(core.walk_count(graph, topo.target, topo.source, 4),
                         2)
        expected = 2 * (model.c_sigma * model.max_entry * 2 * .7) ** 4
        self.assertAlmostEqual(bound, expected, delta=1e-12 * expected)

    def test_distant_bound_raises_on_wrong_distance(self):
        graph, topo = topologies.make_ring(4)
        model = MpnnModel.random(MpnnConfig(2, 4), seed=17)
        self.assertRaises(exceptions.DistanceMismatch, bounds.bound_distant,
                          model, graph, topo.target, topo.source, 3, 0)

    def test_distant_bound_rejects_adjacency(self):
        graph, topo = topologies.make_ring(4)
        model = MpnnModel.random(MpnnConfig(2, 4, shift=ShiftKind.ADJACENCY),
                                 seed=18)
        self.assertRaises(exceptions.ModePreconditionViolated,
                          bounds.bound_distant, model, graph, topo.target,
                          topo.source, 4, 0)

    def test_bound_dominance(self):
        rng = np.random.default_rng(19)
        distant_checks = 0
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            for graph, model, H0, v, u in random_trials(120, seed=19):
                m = model.config.depth
                config = model.config
                block = mpnn.jacobian_exact(model, graph, H0, v, u)
                S = core.message_passing_matrix(graph, config.shift,
                                                config.c_r, config.c_a)
                sensitivity = bounds.bound_sensitivity(model, S, m, v, u)
                general = bounds.bound_general_for_model(model, graph, m, v, u)
                self.assertLessEqual(block.l1_norm,
                                     sensitivity * (1 + RELATIVE_TOL) + 1e-15)
                self.assertLessEqual(block.l1_norm,
                                     general * (1 + RELATIVE_TOL) + 1e-15)

                if config.shift == ShiftKind.ADJACENCY:
                    continue
                r = int(core.bfs_distances(graph, v)[u])
                if not 0 < r <= m or m - r >= r:
                    continue
                distant = bounds.bound_distant(model, graph, v, u, r, m - r)
                self.assertLessEqual(block.l1_norm,
                                     distant * (1 + RELATIVE_TOL) + 1e-15)
                distant_checks += 1
        self.assertGreater(distant_checks, 10)


class TestLossGradient(unittest.TestCase):

    def test_zero_everything_gives_zero_gradient(self):
        graph = topologies.make_ring(3)[0]
        model = MpnnModel.random(MpnnConfig(2, 3), seed=20)
        zeros = np.zeros((6, 2))
        loss, grads_r, grads_a = mpnn.loss_gradients(model, graph, zeros,
                                                     zeros)
        self.assertEqual(loss, 0.)
        for grad in grads_r + grads_a:
            np.testing.assert_array_equal(grad, np.zeros((2, 2)))

    def test_matches_loss_finite_differences(self):
        rng = np.random.default_rng(21)
        step = 1e-6
        for _ in range(10):
            graph = random_graph(rng, n_max=7)
            model = random_model(rng, nonlinearity=Nonlinearity.TANH, scale=1.)
            config = model.config
            H0 = rng.normal(size=(graph.num_nodes, config.width))
            Y = rng.normal(size=(graph.num_nodes, config.width))
            _, grads_r, grads_a = mpnn.loss_gradients(model, graph, H0, Y)

            layer = int(rng.integers(1, config.depth + 1))
            which = ('residual', 'aggregate')[int(rng.integers(2))]
            exact = (grads_r if which == 'residual' else grads_a)[layer - 1]
            weights = model.residual_weights if which == 'residual' else \
                model.aggregate_weights

            fd = np.zeros_like(exact)
            for i in range(config.width):
                for j in range(config.width):
                    original = weights[layer - 1][i, j]
                    weights[layer - 1][i, j] = original + step
                    plus = mpnn.quadratic_loss(
                        mpnn.mpnn_forward(model, graph, H0).output, Y)
                    weights[layer - 1][i, j] = original - step
                    minus = mpnn.quadratic_loss(
                        mpnn.mpnn_forward(model, graph, H0).output, Y)
                    weights[layer - 1][i, j] = original
                    fd[i, j] = (plus - minus) / (2 * step)
            if np.linalg.norm(exact) < 1e-3:
                continue
            self.assertLess(relative_error(exact, fd), 1e-5)

    def test_single_layer_on_k2(self):
        graph = core.build_graph(2, [(0, 1)])
        config = MpnnConfig(1, 1, c_r=.5, c_a=2.,
                            nonlinearity=Nonlinearity.IDENTITY)
        model = MpnnModel(config, [np.array([[3.]])], [np.array([[-1.]])])
        H0 = np.array([[1.], [2.]])
        Y = np.array([[0.], [2.]])
        # h' = 1.5 h_v - 2 h_other -> residuals (-2.5, -1)
        grad_r = mpnn.loss_gradient(model, graph, H0, Y, 1, ('residual', 0, 0))
        grad_a = mpnn.loss_gradient(model, graph, H0, Y, 1,
                                    ('aggregate', 0, 0))
        self.assertAlmostEqual(grad_r, .5 * (-2.5 * 1. + -1. * 2.))
        self.assertAlmostEqual(grad_a, 2. * (-2.5 * 2. + -1. * 1.))

    def test_raises_on_target_shape(self):
        graph = topologies.make_ring(3)[0]
        model = MpnnModel.random(MpnnConfig(2, 2), seed=22)
        self.assertRaises(exceptions.ShapeMismatch, mpnn.loss_gradients, model,
                          graph, np.zeros((6, 2)), np.zeros((5, 2)))

    def test_explicit_vanishing_bound_dominates(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            graph = random_graph(rng)
            model = random_model(rng, shift=ShiftKind.SYMMETRIC)
            config = model.config
            H0 = rng.normal(size=(graph.num_nodes, config.width))
            Y = rng.normal(size=(graph.num_nodes, config.width))
            _, grads_r, grads_a = mpnn.loss_gradients(model, graph, H0, Y)
            for layer in range(1, config.depth + 1):
                bound = bounds.bound_vanishing_explicit(model, graph, H0, Y,
                                                        layer)
                largest = max(np.abs(grads_r[layer - 1]).max(),
                              np.abs(grads_a[layer - 1]).max())
                self.assertLessEqual(largest, bound * (1 + RELATIVE_TOL))

    def test_vanishing_gradients(self):
        graph = topologies.complete_graph(6)
        rng = np.random.default_rng(24)
        depths = list(range(8, 33))
        config = MpnnConfig(3, max(depths), c_r=1., c_a=1.,
                            nonlinearity=Nonlinearity.IDENTITY)
        # one orthogonal matrix tied across layers and both weight kinds
        tied = MpnnModel.scaled_orthogonal(
            MpnnConfig(3, 1, nonlinearity=Nonlinearity.IDENTITY), .4,
            seed=24).residual_weights[0]
        full = MpnnModel(config, [tied] * config.depth, [tied] * config.depth)
        self.assertAlmostEqual(bounds.contraction_factor(full), .8)

        H0 = .1 * rng.normal(size=(6, 3))
        Y = rng.normal(size=(6, 3))
        norms = list()
        for m in depths:
            model = MpnnModel(MpnnConfig(3, m, c_r=1., c_a=1.,
                                         nonlinearity=Nonlinearity.IDENTITY),
                              full.residual_weights[:m],
                              full.aggregate_weights[:m])
            _, grads_r, grads_a = mpnn.loss_gradients(model, graph, H0, Y)
            norms.append(np.sqrt(np.sum(grads_r[0] ** 2) +
                                 np.sum(grads_a[0] ** 2)))

        self.assertTrue(np.all(np.diff(norms) < 0))
        slope = np.polyfit(depths, np.log(norms), 1)[0]
        self.assertLessEqual(slope, np.log(.8) + .05)

        constant = bounds.fit_vanishing_constant(full, 1, depths, norms)
        for m, norm in zip(depths, norms):
            envelope = constant * .8 ** (m - 1) * (1 + .8 ** m)
            self.assertLessEqual(norm, envelope * (1 + RELATIVE_TOL))

    def test_vanishing_bound_arithmetic(self):
        config = MpnnConfig(2, 4, c_r=1., c_a=1.)
        model = MpnnModel.scaled_orthogonal(config, .4, seed=25)
        value = bounds.bound_vanishing(model, 1, 4, 1.)
        self.assertAlmostEqual(value, 2 * .8 ** 3 * (1 + .8 ** 4))

        model = MpnnModel.scaled_orthogonal(config, .5, seed=25)
        values = [bounds.bound_vanishing(model, 1, m, 1.)
                  for m in range(2, 10)]
        np.testing.assert_allclose(values, values[0])


class TestExpectedJacobian(unittest.TestCase):

    def setUp(self):
        self.graph = topologies.make_clique_path(5)[0]
        self.S = core.message_passing_matrix(self.graph, ShiftKind.SYMMETRIC,
                                             .6, .4)

    def test_scalar_unit_weights(self):
        config = obstruction.ObstructionConfig.scalar(1., .6, .4, 5)
        value = obstruction.expected_jacobian(config, 1., self.S, 5, 1, 0, 4)
        self.assertAlmostEqual(float(value),
                               core.matrix_power_entry(self.S, 4, 0, 4))

    def test_single_step(self):
        config = obstruction.ObstructionConfig(.7, .5, 1., .6, .4, 3)
        W = np.random.default_rng(26).normal(size=(2, 2))
        value = obstruction.expected_jacobian(config, W, self.S, 3, 2, 1, 2)
        np.testing.assert_allclose(value, .7 * W * self.S.matrix[1, 2])

    def test_random_weight_product(self):
        rng = np.random.default_rng(27)
        weights = list(rng.normal(size=(5, 3, 3)))
        config = obstruction.ObstructionConfig(.3, .5, 1., .6, .4, 5)
        product = obstruction.weight_product(weights, 1, 5)
        expected = weights[4].dot(weights[3]).dot(weights[2]).dot(weights[1])
        np.testing.assert_allclose(product, expected)
        value = obstruction.expected_jacobian(config, product, self.S, 5, 1,
                                              2, 6)
        power = np.linalg.matrix_power(self.S.matrix, 4)
        np.testing.assert_allclose(value, .3 * expected * power[2, 6])

    def test_rejects_non_symmetric_shift(self):
        config = obstruction.ObstructionConfig.scalar(1., .6, .4, 5)
        S = core.message_passing_matrix(self.graph, ShiftKind.RANDOM_WALK,
                                        .6, .4)
        self.assertRaises(exceptions.ModePreconditionViolated,
                          obstruction.expected_jacobian, config, 1., S, 5, 1,
                          0, 4)


class TestObstruction(unittest.TestCase):

    def setUp(self):
        self.config = obstruction.ObstructionConfig.scalar(1., .5, .5, 32)

    def test_adjacent_pair_obstructs_less_than_far_pair(self):
        k2 = eigen.decompose_graph(core.build_graph(2, [(0, 1)]))
        p8 = eigen.decompose_graph(topologies.path_graph(8))
        near = obstruction.jacobian_obstruction(self.config, k2, 0, 1)
        far = obstruction.jacobian_obstruction(self.config, p8, 0, 7)
        self.assertAlmostEqual(near.total, 1.)
        self.assertLess(near.total, far.total)

    def test_obstruction_stabilizes(self):
        decomp = eigen.decompose_graph(topologies.complete_graph(5))
        totals = list()
        for m in range(4, 65):
            config = obstruction.ObstructionConfig.scalar(1., .5, .5, m)
            totals.append(
                obstruction.jacobian_obstruction(config, decomp, 0, 3).total)
        self.assertLess(np.abs(np.diff(totals[-20:])).max(), 1e-6)

    def test_access_lower_bound(self):
        rng = np.random.default_rng(28)
        for _ in range(100):
            graph = random_graph(rng)
            decomp = eigen.decompose_graph(graph)
            c_a = float(rng.uniform(.1, 1.))
            c_r = float(rng.uniform(0., 1.))
            config = obstruction.ObstructionConfig(
                float(rng.uniform(.1, 1.)), 1. / (c_r + c_a),
                1. / (c_r + c_a) + float(rng.uniform(0, .5)), c_r, c_a, 32)
            v, u = rng.choice(graph.num_nodes, size=2, replace=False)
            report = obstruction.jacobian_obstruction(config, decomp, v, u)
            expected = metrics.access_time(decomp, u, v) / (2 * graph.num_edges)
            self.assertAlmostEqual(report.reference, expected, delta=1e-9)
            self.assertLessEqual(report.lower,
                                 report.total + 1e-9 * abs(report.total))
            self.assertLessEqual(report.total,
                                 report.total_upper * (1 + RELATIVE_TOL))

    def test_access_mode_precondition(self):
        decomp = eigen.decompose_graph(topologies.cycle_graph(5))
        config = obstruction.ObstructionConfig.scalar(.9, .5, .5, 10)
        self.assertRaises(exceptions.ModePreconditionViolated,
                          obstruction.jacobian_obstruction, config, decomp, 0,
                          2)

    def test_symmetric_scalar_mode_collapses(self):
        decomp = eigen.decompose_graph(topologies.complete_graph(5))
        config = obstruction.ObstructionConfig.scalar(1., .5, .5, 200)
        report = obstruction.symmetric_obstruction(config, decomp, 0, 3)
        resistance = metrics.effective_resistance(decomp, 0, 3)
        self.assertAlmostEqual(report.epsilon_g, 1.)
        self.assertAlmostEqual(report.lower, 2 * resistance, delta=1e-9)
        self.assertAlmostEqual(report.upper, 2 * resistance, delta=1e-9)
        self.assertAlmostEqual(report.total, 2 * resistance, delta=1e-9)

    def test_symmetric_far_pair_obstructs_more(self):
        decomp = eigen.decompose_graph(non_bipartite_path(8))
        far = obstruction.symmetric_obstruction(self.config, decomp, 0, 7)
        near = obstruction.symmetric_obstruction(self.config, decomp, 6, 7)
        self.assertGreater(far.total, near.total)

    def test_symmetric_rejects_bipartite(self):
        decomp = eigen.decompose_graph(topologies.path_graph(8))
        self.assertRaises(exceptions.BipartiteGraph,
                          obstruction.symmetric_obstruction, self.config,
                          decomp, 0, 7)

    def test_symmetric_mode_preconditions(self):
        decomp = eigen.decompose_graph(topologies.complete_graph(4))
        config = obstruction.ObstructionConfig.scalar(1., .3, .6, 8)
        self.assertRaises(exceptions.ModePreconditionViolated,
                          obstruction.symmetric_obstruction, config, decomp,
                          0, 1)
        config = obstruction.ObstructionConfig.scalar(1.2, .5, .5, 8)
        self.assertRaises(exceptions.ModePreconditionViolated,
                          obstruction.symmetric_obstruction, config, decomp,
                          0, 1)

    def _non_bipartite_graphs(self, count, seed, n_min=3, edge_prob=.4):
        rng = np.random.default_rng(seed)
        graphs = list()
        while len(graphs) < count:
            graph = random_graph(rng, n_min=n_min, edge_prob=edge_prob)
            if not graph.is_bipartite():
                graphs.append(graph)
        return graphs, rng

    def test_envelope_containment(self):
        graphs, rng = self._non_bipartite_graphs(100, seed=29)
        for graph in graphs:
            decomp = eigen.decompose_graph(graph)
            c_a = float(rng.uniform(.05, .5))
            c_r = float(rng.uniform(c_a, 1.))
            mu = float(rng.uniform(.5, 1.)) / (c_r + c_a)
            nu = float(rng.uniform(.3, 1.)) * mu
            config = obstruction.ObstructionConfig(
                float(rng.uniform(.1, 1.)), nu, mu, c_r, c_a, 32)
            for v, u in metrics.node_pairs(graph.num_nodes):
                report = obstruction.symmetric_obstruction(config, decomp, v,
                                                           u)
                self.assertLessEqual(report.lower,
                                     report.total * (1 + RELATIVE_TOL))
                self.assertLessEqual(report.total,
                                     report.total_upper * (1 + RELATIVE_TOL))
                self.assertLessEqual(report.total_upper,
                                     report.upper * (1 + RELATIVE_TOL))

    def test_tail_decays_geometrically(self):
        decomp = eigen.decompose_graph(non_bipartite_path(6))
        tails = list()
        for m in range(5, 15):
            config = obstruction.ObstructionConfig.scalar(1., .5, .5, m)
            tails.append(obstruction.symmetric_obstruction(
                config, decomp, 0, 5).correction)
        lambda_star = obstruction.symmetric_obstruction(
            self.config, decomp, 0, 5).lambda_star
        factor = abs(.5 + .5 * (1 - lambda_star))
        ratios = np.array(tails[1:]) / np.array(tails[:-1])
        self.assertTrue(np.all(ratios <= factor + 1e-9))

    def test_obstruction_tracks_commute_time(self):
        graphs, _ = self._non_bipartite_graphs(20, seed=30, n_min=6,
                                                edge_prob=.5)
        for graph in graphs:
            decomp = eigen.decompose_graph(graph)
            symmetric = obstruction.symmetric_obstruction_matrix(self.config,
                                                                 decomp)
            commute = metrics.commute_matrix(decomp)
            pairs = metrics.node_pairs(graph.num_nodes)
            rho, _ = stats.spearmanr([symmetric[p] for p in pairs],
                                     [commute[p] for p in pairs])
            self.assertGreater(rho, .95)

    def test_access_matrix_is_asymmetric_on_clique_path(self):
        decomp = eigen.decompose_graph(topologies.make_clique_path(4)[0])
        result = obstruction.access_obstruction_matrix(self.config, decomp)
        self.assertEqual(result.shape, (6, 6))
        self.assertFalse(np.allclose(result, result.T))


class TestCheegerObstruction(unittest.TestCase):

    def setUp(self):
        self.config = obstruction.ObstructionConfig(.8, .6, .9, .6, .4, 16)

    def test_bounds_all_pairs(self):
        graph = topologies.make_clique_path(6)[0]
        decomp = eigen.decompose_graph(graph)
        bound = obstruction.cheeger_obstruction_bound(self.config, decomp,
                                                      graph)
        worst = max(obstruction.symmetric_obstruction(self.config, decomp, v,
                                                      u).total_upper
                    for v, u in metrics.node_pairs(graph.num_nodes))
        self.assertLessEqual(worst, bound.spectral_form)
        self.assertLessEqual(bound.spectral_form, bound.cheeger_form)
        self.assertTrue(bound.cheeger_is_exact)

    def test_expander_beats_path(self):
        path = non_bipartite_path(8)
        dense = topologies.complete_graph(8)
        path_bound = obstruction.cheeger_obstruction_bound(
            self.config, eigen.decompose_graph(path), path)
        dense_bound = obstruction.cheeger_obstruction_bound(
            self.config, eigen.decompose_graph(dense), dense)
        self.assertLess(dense_bound.spectral_form, path_bound.spectral_form)
        self.assertLess(dense_bound.cheeger_form, path_bound.cheeger_form)

    def test_falls_back_to_spectral_cheeger_bound(self):
        graph = topologies.complete_graph(5)
        decomp = eigen.decompose_graph(graph)
        bound = obstruction.cheeger_obstruction_bound(self.config, decomp)
        self.assertFalse(bound.cheeger_is_exact)
        self.assertAlmostEqual(bound.cheeger_constant,
                               decomp.spectral_gap / 2.)
        self.assertLessEqual(bound.spectral_form, bound.cheeger_form)


if __name__ == '__main__':
    unittest.main()
