import collections
import json
import os
import unittest

import numpy as np

from oversquash import exceptions
from oversquash.experiments import report, signal, transfer
from oversquash.graph import core, topologies
from oversquash.graph.core import ShiftKind
from oversquash.sensitivity.mpnn import MpnnConfig, MpnnModel, Nonlinearity
from oversquash.spectral import eigen, metrics

SLOW = os.environ.get('OVERSQUASH_SLOW')

tiny = collections.namedtuple('Tiny', ['task', 'r', 'n_train', 'n_test'])

TINY_RING = tiny(topologies.RING, 3, 12, 6)


def tiny_dataset(seed=0, case=TINY_RING):
    return transfer.generate_transfer(case.task, case.r, case.n_train,
                                      case.n_test, seed=seed)


class TestGenerateTransfer(unittest.TestCase):

    def test_ring_sizes(self):
        dataset = transfer.generate_transfer(topologies.RING, 5, 10, 5,
                                             width=5, seed=0)
        self.assertEqual(len(dataset.train), 10)
        self.assertEqual(len(dataset.test), 5)
        self.assertEqual(dataset.graph, topologies.cycle_graph(10))
        for sample in dataset.train + dataset.test:
            self.assertEqual(sample.graph, topologies.cycle_graph(10))
            self.assertEqual(sample.features.shape, (10, 5))

    def test_deterministic(self):
        first = tiny_dataset(seed=7)
        second = tiny_dataset(seed=7)
        for split in ('train', 'test'):
            features_a, labels_a = first.stacked(split)
            features_b, labels_b = second.stacked(split)
            np.testing.assert_array_equal(features_a, features_b)
            np.testing.assert_array_equal(labels_a, labels_b)

    def test_features(self):
        dataset = transfer.generate_transfer(topologies.CLIQUE_PATH, 4, 20, 5,
                                             seed=1)
        source = dataset.topology.source
        target = dataset.topology.target
        others = [v for v in range(dataset.graph.num_nodes)
                  if v not in (source, target)]
        for sample in dataset.train:
            self.assertEqual(sample.target.sum(), 1.)
            self.assertEqual(sample.target.max(), 1.)
            np.testing.assert_array_equal(sample.features[target],
                                          sample.target)
            self.assertFalse(sample.features[source].any())
            self.assertTrue((sample.features[others] == 1.).all())
            self.assertEqual(list(np.flatnonzero(sample.source_mask)),
                             [source])

    def test_raises(self):
        self.assertRaises(exceptions.InvalidDistance,
                          transfer.generate_transfer, topologies.RING, 2)
        self.assertRaises(ValueError, transfer.generate_transfer,
                          topologies.RING, 4, width=1)
        self.assertRaises(ValueError, transfer.generate_transfer, 'grid', 4)


class TestTransferNetwork(unittest.TestCase):

    def test_masked_loss(self):
        output = np.zeros((2, 5))
        loss, grad = transfer.masked_loss(output, np.array([0, 3]))
        self.assertAlmostEqual(loss, .5)
        expected = np.zeros((2, 5))
        expected[0, 0] = expected[1, 3] = -.5
        np.testing.assert_allclose(grad, expected)

    def test_backward_matches_finite_differences(self):
        dataset = tiny_dataset()
        network = transfer.TransferNetwork(transfer.SAGE, dataset.width, 4,
                                           dataset.r, seed=2)
        network.mpnn.config.nonlinearity = Nonlinearity.TANH
        shift = core.shift_operator(dataset.graph, ShiftKind.RANDOM_WALK)
        source = dataset.topology.source
        features, labels = dataset.stacked('train')
        features, labels = features[:4], labels[:4]

        def loss():
            output, _ = network.forward(shift, features, source)
            return transfer.masked_loss(output, labels)[0]

        output, cache = network.forward(shift, features, source)
        _, grad_output = transfer.masked_loss(output, labels)
        grads = network.backward(shift, source, grad_output, cache)

        rng = np.random.default_rng(3)
        step = 1e-6
        for param, grad in zip(network.parameters, grads):
            self.assertEqual(param.shape, grad.shape)
            for _ in range(3):
                index = tuple(int(rng.integers(s)) for s in param.shape)
                original = param[index]
                param[index] = original + step
                upper = loss()
                param[index] = original - step
                lower = loss()
                param[index] = original
                numeric = (upper - lower) / (2 * step)
                self.assertLessEqual(abs(numeric - grad[index]),
                                     1e-6 + 1e-4 * abs(grad[index]))

    def test_adam_first_step(self):
        param = np.array([1., -2.])
        optimizer = transfer.Adam([param], lr=.1)
        optimizer.step([np.array([.5, -3.])])
        np.testing.assert_allclose(param, [.9, -1.9], atol=1e-6)

    def test_untrained_accuracy_near_chance(self):
        dataset = transfer.generate_transfer(topologies.RING, 5, 0, 200,
                                             seed=0)
        accuracies = [transfer.evaluate_transfer(
            transfer.TransferNetwork(transfer.GCN, dataset.width, 16,
                                     dataset.r, seed=seed), dataset)
            for seed in range(30)]
        self.assertAlmostEqual(np.mean(accuracies), .2, delta=.1)


class TestTrainTransfer(unittest.TestCase):

    def test_seed_fixes_outcome(self):
        dataset = tiny_dataset()
        first = transfer.train_transfer(transfer.GCN, dataset, epochs=3,
                                        hidden=8, seed=4)
        second = transfer.train_transfer(transfer.GCN, dataset, epochs=3,
                                         hidden=8, seed=4)
        self.assertEqual(first.accuracy, second.accuracy)
        self.assertEqual(first.losses, second.losses)
        self.assertEqual(first.epochs, 3)
        self.assertTrue(0. <= first.accuracy <= 1.)

    def test_mini_batches(self):
        outcome = transfer.train_transfer(transfer.GIN, tiny_dataset(),
                                          epochs=2, hidden=4, seed=0,
                                          batch_size=5)
        self.assertEqual(len(outcome.losses), 2)
        self.assertTrue(np.all(np.isfinite(outcome.losses)))

    def test_loss_decreases(self):
        outcome = transfer.train_transfer(transfer.GCN, tiny_dataset(),
                                          epochs=30, hidden=8, lr=1e-2,
                                          seed=0)
        self.assertLess(outcome.losses[-1], outcome.losses[0])

    def test_diverged_loss_keeps_partial_outcome(self):
        dataset = tiny_dataset()
        dataset.train[0].features[:] = np.inf
        with self.assertRaises(exceptions.DivergedLoss) as context:
            transfer.train_transfer(transfer.GCN, dataset, epochs=3, hidden=4)
        outcome = context.exception.outcome
        self.assertEqual(outcome.losses, [])
        self.assertIsNone(outcome.accuracy)
        self.assertIsInstance(context.exception, exceptions.NumericalError)

    def test_outcome_serializes(self):
        outcome = transfer.train_transfer(transfer.SAGE, tiny_dataset(),
                                          epochs=1, hidden=4)
        result = json.loads(report.format_json(outcome))
        self.assertEqual(result['kind'], transfer.SAGE)
        self.assertEqual(result['epochs'], 1)
        self.assertEqual(len(result['losses']), 1)

    @unittest.skipUnless(SLOW, 'set OVERSQUASH_SLOW to run')
    def test_short_range_ring_is_learned(self):
        dataset = transfer.generate_transfer(topologies.RING, 3, seed=0)
        outcome = transfer.train_transfer(transfer.GCN, dataset, seed=0,
                                          batch_size=50)
        self.assertGreaterEqual(outcome.accuracy, .8)

    @unittest.skipUnless(SLOW, 'set OVERSQUASH_SLOW to run')
    def test_topology_ordering(self):
        seeds = range(5)
        for r in (6, 8):
            accuracy = {task: transfer.mean_accuracy(
                transfer.GCN, task, r, transfer.DEFAULT_HIDDEN, seeds,
                batch_size=50) for task in topologies.TRANSFER_KINDS}
            self.assertGreaterEqual(accuracy[topologies.CROSSED_RING],
                                    accuracy[topologies.RING])
            self.assertGreaterEqual(accuracy[topologies.RING],
                                    accuracy[topologies.CLIQUE_PATH] - .05)

    @unittest.skipUnless(SLOW, 'set OVERSQUASH_SLOW to run')
    def test_width_helps_on_rings(self):
        seeds = range(5)
        failing = [r for r in range(3, 11) if transfer.mean_accuracy(
            transfer.GCN, topologies.RING, r, 16, seeds, batch_size=50) < .9]
        if not failing:
            self.skipTest('hidden 16 solves every ring up to r = 10')
        r = max(failing)
        narrow = transfer.mean_accuracy(transfer.GCN, topologies.RING, r, 16,
                                        seeds, batch_size=50)
        wide = transfer.mean_accuracy(transfer.GCN, topologies.RING, r, 128,
                                      seeds, batch_size=50)
        self.assertGreater(wide, narrow)


class TestSignalPropagation(unittest.TestCase):

    def test_identity_model_keeps_mass_at_source(self):
        config = MpnnConfig(5, 3, c_r=1., c_a=0., shift=ShiftKind.SYMMETRIC,
                            nonlinearity=Nonlinearity.IDENTITY)
        eye = [np.eye(5)] * 3
        model = MpnnModel(config, eye, eye)
        result = signal.signal_propagation(topologies.cycle_graph(8), model, 2)
        self.assertEqual(result.propagation, 0.)
        self.assertEqual(result.live_channels, 5)
        self.assertFalse(result.zero_mass)

    def test_mass_at_largest_distance(self):
        distances = core.bfs_distances(topologies.path_graph(5), 0)
        output = np.zeros((5, 2))
        output[4] = [1., -2.]
        propagation, live = signal.propagation_distance(output, distances, 0)
        self.assertAlmostEqual(propagation, 1.)
        self.assertEqual(live, 2)

    def test_mass_split_between_distances(self):
        distances = core.bfs_distances(topologies.path_graph(5), 0)
        output = np.zeros((5, 1))
        output[2] = output[4] = .5
        propagation, _ = signal.propagation_distance(output, distances, 0)
        self.assertAlmostEqual(propagation, .75)

    def test_dead_channels_are_skipped(self):
        distances = core.bfs_distances(topologies.path_graph(3), 0)
        output = np.zeros((3, 2))
        output[1, 0] = 3.
        self.assertEqual(signal.propagation_distance(output, distances, 0),
                         (.5, 1))
        self.assertEqual(signal.propagation_distance(np.zeros((3, 2)),
                                                     distances, 0), (0., 0))

    def test_zero_mass_flag(self):
        config = MpnnConfig(2, 2, c_r=1., c_a=1.)
        zeros = [np.zeros((2, 2))] * 2
        model = MpnnModel(config, zeros, zeros)
        result = signal.signal_propagation(topologies.path_graph(4), model, 1)
        self.assertTrue(result.zero_mass)
        self.assertEqual(result.propagation, 0.)

    def test_random_model_in_unit_interval(self):
        graph = topologies.random_connected_graph(12, .3, 5)
        config = MpnnConfig(5, 4)
        for seed in range(10):
            model = MpnnModel.random(config, seed)
            result = signal.signal_propagation(graph, model, seed % 12)
            self.assertTrue(0. <= result.propagation <= 1.)

    def test_raises_on_bad_source(self):
        model = MpnnModel.random(MpnnConfig(5, 2), 0)
        self.assertRaises(exceptions.NodeOutOfRange,
                          signal.signal_propagation,
                          topologies.path_graph(3), model, 3)


class TestResistanceSignalExperiment(unittest.TestCase):

    def test_sampled_resistance_with_all_nodes(self):
        graph = topologies.random_connected_graph(9, .4, 2)
        decomp = eigen.decompose_graph(graph)
        estimate = signal.sampled_total_resistance(
            metrics.resistance_matrix(decomp), range(9))
        self.assertAlmostEqual(estimate, metrics.total_resistance(decomp))
        self.assertRaises(ValueError, signal.sampled_total_resistance,
                          metrics.resistance_matrix(decomp), [3])

    def test_graph_suite(self):
        graphs = signal.random_graph_suite(25, seed=3)
        self.assertEqual(len(graphs), 25)
        for graph in graphs:
            self.assertTrue(signal.SUITE_MIN_NODES <= graph.num_nodes <=
                            signal.SUITE_MAX_NODES)
        self.assertEqual(graphs, signal.random_graph_suite(25, seed=3))

    def test_raises_on_few_graphs(self):
        self.assertRaises(exceptions.InsufficientGraphs,
                          signal.resistance_signal_experiment,
                          [topologies.cycle_graph(5)])

    def test_deterministic(self):
        graphs = signal.random_graph_suite(20, seed=1)
        first = signal.resistance_signal_experiment(graphs, seed=2)
        second = signal.resistance_signal_experiment(graphs, seed=2)
        self.assertEqual(first.correlation, second.correlation)
        self.assertEqual(first.rows, second.rows)
        self.assertEqual(len(first.rows), 20)

    def test_low_resistance_propagates_further(self):
        experiment = signal.resistance_signal_experiment(
            signal.random_graph_suite(50, seed=0), seed=0)
        self.assertLess(experiment.correlation, -.3)


class TestReport(unittest.TestCase):

    def test_json_sorted_and_plain(self):
        text = report.format_json(dict(b=np.float64(.5), a=np.arange(2),
                                       c=(np.int64(1), None)))
        self.assertLess(text.index('"a"'), text.index('"b"'))
        self.assertEqual(json.loads(text), dict(a=[0, 1], b=.5, c=[1, None]))

    def test_csv_column_order(self):
        rows = [dict(u=1, v=0, extra='x'), dict(v=2)]
        text = report.format_csv(rows, ('v', 'u'))
        self.assertEqual(text, 'v,u\n0,1\n2,\n')

    def test_matrix_rows(self):
        rows = report.matrix_rows(np.array([[0., 1.], [1., 0.]]), 'res')
        self.assertEqual(len(rows), 4)
        self.assertEqual(rows[1], dict(v=0, u=1, res=1.))

    def test_format_report_raises(self):
        self.assertRaises(ValueError, report.format_report, dict(), 'xml')
        self.assertRaises(ValueError, report.format_report, dict(),
                          report.CSV)


if __name__ == '__main__':
    unittest.main()
