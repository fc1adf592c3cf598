import json
import os
import shutil
import tempfile
import unittest

from oversquash import cli
from oversquash.graph import io, topologies


class CliCase(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def path(self, name):
        return os.path.join(self.directory, name)

    def save(self, graph, name='graph.json'):
        path = self.path(name)
        io.save_graph(graph, path)
        return path

    def run_cli(self, *argv, fmt='json'):
        out = self.path('report.' + fmt)
        code = cli.main(['--format', fmt, '--out', out] + list(argv))
        if not os.path.exists(out):
            return code, None
        with open(out) as f:
            text = f.read()
        return code, json.loads(text) if fmt == 'json' else text


class TestMetricsCommand(CliCase):

    def test_cycle_report(self):
        code, result = self.run_cli('metrics',
                                    self.save(topologies.cycle_graph(6)))
        self.assertEqual(code, 0)
        self.assertEqual(result['num_nodes'], 6)
        self.assertEqual(result['diameter'], 3)
        self.assertAlmostEqual(result['total_resistance'], 17.5)
        self.assertIsNotNone(result['cheeger_exact'])

    def test_csv_header(self):
        code, text = self.run_cli('metrics',
                                  self.save(topologies.path_graph(4)),
                                  fmt='csv')
        self.assertEqual(code, 0)
        lines = text.splitlines()
        self.assertEqual(lines[0], ','.join(cli.SUMMARY_COLUMNS))
        self.assertEqual(len(lines), 2)

    def test_matrices(self):
        matrices = self.path('matrices')
        code, _ = self.run_cli('metrics', self.save(topologies.path_graph(4)),
                               '--matrices', matrices)
        self.assertEqual(code, 0)
        for name in ('resistance', 'commute', 'access'):
            with open(os.path.join(matrices, name + '.csv')) as f:
                lines = f.read().splitlines()
            self.assertEqual(lines[0], 'v,u,{}'.format(name))
            self.assertEqual(len(lines), 17)

    def test_invalid_graph_exit_code(self):
        path = self.path('loop.txt')
        with open(path, 'w') as f:
            f.write('0 1\n1 1\n')
        code, result = self.run_cli('metrics', path)
        self.assertEqual(code, cli.EXIT_VALIDATION)
        self.assertIsNone(result)

    def test_disconnected_graph_exit_code(self):
        path = self.path('split.txt')
        with open(path, 'w') as f:
            f.write('# nodes 3\n0 1\n')
        code, _ = self.run_cli('metrics', path)
        self.assertEqual(code, cli.EXIT_VALIDATION)


class TestGenerateCommand(CliCase):

    def test_ring(self):
        graph_out = self.path('ring.txt')
        code, result = self.run_cli('generate', 'ring', '--r', '5',
                                    '--graph-out', graph_out)
        self.assertEqual(code, 0)
        self.assertEqual(result['num_nodes'], 10)
        self.assertEqual(result['topology']['target'], 5)
        self.assertAlmostEqual(result['closed_form']['measured'], .0625)
        self.assertEqual(io.load_graph(graph_out), topologies.cycle_graph(10))

    def test_random_graph_uses_seed(self):
        first = self.run_cli('--seed', '3', 'generate', 'random', '--n', '9')
        second = self.run_cli('--seed', '3', 'generate', 'random', '--n', '9')
        self.assertEqual(first, second)

    def test_invalid_distance(self):
        code, _ = self.run_cli('generate', 'clique_path', '--r', '2')
        self.assertEqual(code, cli.EXIT_VALIDATION)


class TestSensitivityCommand(CliCase):

    def test_bounds_dominate(self):
        code, result = self.run_cli('sensitivity',
                                    self.save(topologies.path_graph(4)),
                                    '--depth', '3', '--width', '2',
                                    '--pairs', '0:3,3:0')
        self.assertEqual(code, 0)
        self.assertEqual(len(result['pairs']), 2)
        for row in result['pairs']:
            self.assertEqual(row['distance'], 3)
            self.assertLessEqual(row['jacobian_l1'],
                                 row['bound_sensitivity'] + 1e-12)
            self.assertLessEqual(row['jacobian_l1'],
                                 row['bound_general'] + 1e-12)
            self.assertIsNotNone(row['bound_distant'])
            self.assertLessEqual(row['jacobian_l1'],
                                 row['bound_distant'] + 1e-12)

    def test_walk_diffusion(self):
        code, result = self.run_cli('sensitivity',
                                    self.save(topologies.cycle_graph(5)),
                                    '--sigma', 'tanh', '--pairs', '0:2',
                                    '--walk-diffusion', '2')
        self.assertEqual(code, 0)
        self.assertEqual(result['walk_diffusion']['max_length'], 2)
        self.assertEqual(len(result['walk_diffusion']['operators']), 2)

    def test_bad_pair(self):
        code, _ = self.run_cli('sensitivity',
                               self.save(topologies.path_graph(3)),
                               '--pairs', '0-2')
        self.assertEqual(code, cli.EXIT_VALIDATION)


class TestObstructionCommand(CliCase):

    def test_symmetric_envelope(self):
        code, result = self.run_cli('obstruction',
                                    self.save(topologies.complete_graph(4)),
                                    '--pairs', '0:1')
        self.assertEqual(code, 0)
        row, = result['pairs']
        self.assertLessEqual(row['lower'], row['total'] + 1e-9)
        self.assertLessEqual(row['total'], row['upper'] + 1e-9)
        self.assertIn('cheeger_form', result['cheeger_bound'])

    def test_access_mode_all_pairs(self):
        code, text = self.run_cli('obstruction',
                                  self.save(topologies.complete_graph(4)),
                                  '--mode', 'access', fmt='csv')
        self.assertEqual(code, 0)
        self.assertEqual(len(text.splitlines()), 13)

    def test_bipartite_graph(self):
        code, _ = self.run_cli('obstruction',
                               self.save(topologies.cycle_graph(6)))
        self.assertEqual(code, cli.EXIT_VALIDATION)

    def test_same_node(self):
        code, _ = self.run_cli('obstruction',
                               self.save(topologies.complete_graph(4)),
                               '--pairs', '2:2')
        self.assertEqual(code, cli.EXIT_VALIDATION)


class TestRewireCommand(CliCase):

    def test_spectral(self):
        graph_out = self.path('rewired.json')
        code, text = self.run_cli('rewire',
                                  self.save(topologies.path_graph(6)),
                                  '--budget', '2', '--graph-out', graph_out,
                                  fmt='csv')
        self.assertEqual(code, 0)
        rows = text.splitlines()[1:]
        self.assertTrue(1 <= len(rows) <= 2)
        self.assertEqual(io.load_graph(graph_out).num_edges, 5 + len(rows))

    def test_spatial_report(self):
        code, result = self.run_cli('rewire',
                                    self.save(topologies.path_graph(8)),
                                    '--strategy', 'spatial')
        self.assertEqual(code, 0)
        self.assertEqual(result['plan']['added_edges'], [[0, 7]])
        self.assertLess(result['report']['after']['total_resistance'],
                        result['report']['before']['total_resistance'])

    def test_zero_budget(self):
        code, _ = self.run_cli('rewire', self.save(topologies.path_graph(4)),
                               '--budget', '0')
        self.assertEqual(code, cli.EXIT_VALIDATION)


class TestTransferCommand(CliCase):

    def test_tiny_run(self):
        code, result = self.run_cli('transfer', '--r', '3', '--epochs', '2',
                                    '--n-train', '8', '--n-test', '4',
                                    '--hidden', '4')
        self.assertEqual(code, 0)
        self.assertEqual(result['epochs'], 2)
        self.assertEqual(result['n_train'], 8)
        self.assertTrue(0. <= result['accuracy'] <= 1.)


class TestSignalCommand(CliCase):

    def test_too_few_graphs(self):
        paths = [self.save(topologies.cycle_graph(5), 'a.json'),
                 self.save(topologies.path_graph(5), 'b.json')]
        code, _ = self.run_cli('signal', *paths)
        self.assertEqual(code, cli.EXIT_VALIDATION)

    def test_suite_table(self):
        code, text = self.run_cli('signal', '--num-graphs', '20',
                                  '--samples', '4', fmt='csv')
        self.assertEqual(code, 0)
        lines = text.splitlines()
        self.assertEqual(lines[0], 'graph_id,num_nodes,num_edges,'
                                   'resistance_estimate,propagation,'
                                   'zero_mass_sources')
        self.assertEqual(len(lines), 21)


if __name__ == '__main__':
    unittest.main()
