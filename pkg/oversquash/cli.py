""" oversquash

Measure over-squashing of message-passing networks on a graph: exact
Jacobians against their sensitivity bounds, spectral connectivity,
Jacobian obstructions, rewiring and the synthetic experiments.

Graph files are edge lists (`# nodes <n>` header, one `<u> <v>` pair per
line) or JSON (`{"num_nodes": n, "edges": [[u, v], ...]}`), chosen by
file suffix. Exit code is 2 on invalid input and 3 on numerical failure.
"""
import argparse
import logging
import os
import sys

import numpy as np

from oversquash.exceptions import DivergedLoss, NumericalError, \
    ValidationError
from oversquash.experiments import report, signal, transfer
from oversquash.graph import core, diffusion, io, topologies
from oversquash.rewiring import rewire
from oversquash.sensitivity import bounds, mpnn, obstruction
from oversquash.spectral import metrics
from oversquash.spectral.eigen import decompose_graph

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

GRAPH_KINDS = topologies.TRANSFER_KINDS + ('path', 'cycle', 'complete',
                                           'barbell', 'random')

SENSITIVITY_COLUMNS = ('v', 'u', 'distance', 'jacobian_l1', 'bound_sensitivity',
                       'bound_general', 'bound_distant')
OBSTRUCTION_COLUMNS = ('v', 'u', 'mode', 'total', 'total_upper', 'lower',
                       'upper', 'correction', 'epsilon_g', 'lambda_star',
                       'reference')
REWIRE_COLUMNS = ('step', 'v', 'u', 'resistance_delta')
LOSS_COLUMNS = ('epoch', 'loss')
SUMMARY_COLUMNS = ('num_nodes', 'num_edges', 'diameter', 'spectral_gap',
                   'cheeger_lower', 'cheeger_upper', 'cheeger_exact',
                   'total_resistance', 'max_commute')


class Report:

    """ Output of a subcommand: JSON payload plus its CSV table. """

    def __init__(self, payload, rows, columns):
        self.payload = payload
        self.rows = rows
        self.columns = columns

    def render(self, fmt):
        return report.format_report(self.payload, fmt, self.rows,
                                    self.columns)


def parse_pairs(text, num_nodes, ordered=True):
    """ Node pairs from 'all' or 'v:u,v:u,...'.

    With 'all' every ordered pair of distinct nodes is returned, or every
    unordered pair when `ordered` is False.
    """
    if text is None or text == 'all':
        if ordered:
            return [(v, u) for v in range(num_nodes) for u in range(num_nodes)
                    if v != u]
        return metrics.node_pairs(num_nodes)
    pairs = list()
    for item in text.split(','):
        try:
            v, u = item.split(':')
            pairs.append((int(v), int(u)))
        except ValueError:
            raise ValidationError('Invalid node pair "{}", expected v:u'.format(
                item))
    return pairs


def build_generated_graph(args):
    if args.kind in topologies.TRANSFER_KINDS:
        return topologies.make_topology(args.kind, args.r)
    if args.kind == 'path':
        graph = topologies.path_graph(args.n)
    elif args.kind == 'cycle':
        graph = topologies.cycle_graph(args.n)
    elif args.kind == 'complete':
        graph = topologies.complete_graph(args.n)
    elif args.kind == 'barbell':
        graph = topologies.barbell_graph(args.n)
    else:
        graph = topologies.random_connected_graph(args.n, args.edge_prob,
                                                  args.seed)
    return graph, None


def run_generate(args):
    graph, topology = build_generated_graph(args)
    payload = dict(num_nodes=graph.num_nodes,
                   edges=[list(edge) for edge in graph.edges])
    if topology is not None:
        payload['topology'] = dict(kind=topology.kind, r=topology.r,
                                   source=topology.source,
                                   target=topology.target)
        payload['closed_form'] = topologies.compare_closed_form(topology.kind,
                                                                topology.r)
    if args.graph_out is not None:
        io.save_graph(graph, args.graph_out)
    rows = [dict(v=v, u=u) for v, u in graph.edges]
    return Report(payload, rows, ('v', 'u'))


def _write_matrices(directory, topology_metrics):
    os.makedirs(directory, exist_ok=True)
    for name in ('resistance', 'commute', 'access'):
        path = os.path.join(directory, '{}.csv'.format(name))
        text = report.format_csv(
            report.matrix_rows(getattr(topology_metrics, name), name),
            ('v', 'u', name))
        report.write_text(text, path)
        logging.info('Wrote {} matrix to {}'.format(name, path))


def run_metrics(args):
    graph = io.load_graph(args.graph)
    decomp = decompose_graph(graph)
    result = metrics.topology_metrics(graph, decomp)
    payload = result.summary()
    payload.update(num_nodes=graph.num_nodes, num_edges=graph.num_edges,
                   diameter=graph.diameter())
    if args.matrices is not None:
        _write_matrices(args.matrices, result)
    return Report(payload, [payload], SUMMARY_COLUMNS)


def _distant_bound(model, graph, v, u, distance, depth):
    k = depth - distance
    if not 0 <= k < distance:
        return None
    try:
        return bounds.bound_distant(model, graph, v, u, distance, k)
    except ValidationError:
        return None


def run_sensitivity(args):
    graph = io.load_graph(args.graph)
    depth = graph.diameter() if args.depth is None else args.depth
    config = mpnn.MpnnConfig(args.width, depth, c_r=args.cr, c_a=args.ca,
                             shift=args.shift, nonlinearity=args.sigma)
    model = mpnn.MpnnModel.random(config, args.seed)
    if args.sigma == mpnn.Nonlinearity.RELU:
        H0 = mpnn.sample_kink_free_input(model, graph, args.seed)
    else:
        H0 = np.random.default_rng(args.seed).normal(
            size=(graph.num_nodes, args.width))
    S = core.message_passing_matrix(graph, args.shift, args.cr, args.ca)
    distances = core.distance_matrix(graph)

    rows = list()
    for v, u in parse_pairs(args.pairs, graph.num_nodes):
        core.check_node(graph, v)
        core.check_node(graph, u)
        block = mpnn.jacobian_exact(model, graph, H0, v, u)
        distance = int(distances[v, u])
        rows.append(dict(
            v=v, u=u, distance=distance, jacobian_l1=block.l1_norm,
            bound_sensitivity=bounds.bound_sensitivity(model, S, depth, v, u),
            bound_general=bounds.bound_general_for_model(model, graph, depth,
                                                         v, u),
            bound_distant=_distant_bound(model, graph, v, u, distance,
                                         depth)))

    payload = dict(config=dict(width=config.width, depth=config.depth,
                               c_r=config.c_r, c_a=config.c_a,
                               shift=config.shift,
                               nonlinearity=config.nonlinearity),
                   seed=args.seed, pairs=rows)
    if args.walk_diffusion is not None:
        weights = diffusion.walk_operators(graph, args.walk_diffusion)
        payload['walk_diffusion'] = dict(max_length=weights.max_length,
                                         gammas=weights.gammas,
                                         operators=weights.operators)
    return Report(payload, rows, SENSITIVITY_COLUMNS)


def run_obstruction(args):
    graph = io.load_graph(args.graph)
    decomp = decompose_graph(graph)
    mu = args.nu if args.mu is None else args.mu
    config = obstruction.ObstructionConfig(args.rho, args.nu, mu, args.cr,
                                           args.ca, args.depth)
    if args.mode == obstruction.ACCESS:
        compute = obstruction.jacobian_obstruction
        pairs = parse_pairs(args.pairs, graph.num_nodes, ordered=True)
    else:
        compute = obstruction.symmetric_obstruction
        pairs = parse_pairs(args.pairs, graph.num_nodes, ordered=False)

    rows = [compute(config, decomp, v, u).as_dict() for v, u in pairs]
    payload = dict(config=dict(rho=config.rho, nu=config.nu, mu=config.mu,
                               c_r=config.c_r, c_a=config.c_a,
                               depth=config.depth),
                   mode=args.mode, pairs=rows)
    if args.mode == obstruction.SYMMETRIC:
        payload['cheeger_bound'] = obstruction.cheeger_obstruction_bound(
            config, decomp, graph)
    return Report(payload, rows, OBSTRUCTION_COLUMNS)


def run_rewire(args):
    graph = io.load_graph(args.graph)
    if args.strategy == 'spatial':
        plan = rewire.spatial_rewire(graph, args.budget, args.threshold,
                                     args.target_diameter)
    else:
        plan = rewire.spectral_rewire(graph, args.budget, args.objective,
                                      seed=args.seed)
    rewired, result = rewire.rewire(graph, plan)
    if args.graph_out is not None:
        io.save_graph(rewired, args.graph_out)

    rows = [dict(step=i + 1, v=v, u=u, resistance_delta=delta)
            for i, ((v, u), delta) in enumerate(zip(result.added_edges,
                                                    result.resistance_deltas))]
    payload = dict(plan=plan, report=result, num_nodes=rewired.num_nodes,
                   edges=[list(edge) for edge in rewired.edges])
    return Report(payload, rows, REWIRE_COLUMNS)


def _loss_rows(outcome):
    return [dict(epoch=i + 1, loss=loss) for i, loss in enumerate(
        outcome.losses)]


def run_transfer(args):
    n_train, n_test = args.n_train, args.n_test
    if args.full_scale:
        n_train, n_test = transfer.FULL_N_TRAIN, transfer.FULL_N_TEST
    dataset = transfer.generate_transfer(args.task, args.r, n_train, n_test,
                                         width=args.width, seed=args.seed)
    outcome = transfer.train_transfer(args.model, dataset, epochs=args.epochs,
                                      hidden=args.hidden, lr=args.lr,
                                      seed=args.seed,
                                      batch_size=args.batch_size)
    payload = outcome.as_dict()
    payload.update(n_train=n_train, n_test=n_test)
    return Report(payload, _loss_rows(outcome), LOSS_COLUMNS)


def run_signal(args):
    if args.graphs:
        graphs = [io.load_graph(path) for path in args.graphs]
    else:
        graphs = signal.random_graph_suite(args.num_graphs, seed=args.seed)
    config = None
    if args.depth is not None:
        config = mpnn.MpnnConfig(args.width, args.depth, c_r=1., c_a=1.)
    elif args.width != signal.DEFAULT_WIDTH:
        config = signal.default_signal_config(graphs, args.width)
    experiment = signal.resistance_signal_experiment(
        graphs, config, samples=args.samples, seed=args.seed)
    return Report(experiment, experiment.rows, signal.SignalExperiment.COLUMNS)


def _add_graph_argument(parser):
    parser.add_argument('graph', help='Graph file (edge list or .json).')


def make_parser():
    """ Configure argument-parser.

    Returns
    -------
    argparse.ArgumentParser
    """
    parser = argparse.ArgumentParser(
        prog='oversquash', description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument('--seed', type=int, default=0,
                        help='Random seed (default 0).')
    parser.add_argument('--format', choices=report.FORMATS,
                        default=report.JSON,
                        help='Report format (default json).')
    parser.add_argument('--out', default=None,
                        help='Report file, stdout if omitted.')
    parser.add_argument('-l', '--log', default=None,
                        help='Log file, stderr if omitted.')
    parser.add_argument('-v', '--verbose', action='store_true',
                        help='Log debug messages.')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    generate = commands.add_parser('generate', help='Write a graph.')
    generate.add_argument('kind', choices=GRAPH_KINDS)
    generate.add_argument('--r', type=int, default=5,
                          help='Source-target distance of transfer graphs.')
    generate.add_argument('--n', type=int, default=10,
                          help='Nodes, or clique size for barbell graphs.')
    generate.add_argument('--edge-prob', type=float, default=.3,
                          help='Edge probability of random graphs.')
    generate.add_argument('--graph-out', default=None,
                          help='Also save the graph to this file.')
    generate.set_defaults(run=run_generate)

    metrics_parser = commands.add_parser(
        'metrics', help='Spectral gap, Cheeger bounds and resistances.')
    _add_graph_argument(metrics_parser)
    metrics_parser.add_argument('--matrices', default=None,
                                help='Directory for all-pairs CSV matrices.')
    metrics_parser.set_defaults(run=run_metrics)

    sensitivity = commands.add_parser(
        'sensitivity', help='Exact Jacobian norms against their bounds.')
    _add_graph_argument(sensitivity)
    sensitivity.add_argument('--depth', type=int, default=None,
                             help='Layers, the diameter if omitted.')
    sensitivity.add_argument('--width', type=int, default=3)
    sensitivity.add_argument('--cr', type=float, default=1.)
    sensitivity.add_argument('--ca', type=float, default=1.)
    sensitivity.add_argument('--sigma', choices=mpnn.Nonlinearity.ALL,
                             default=mpnn.Nonlinearity.RELU)
    sensitivity.add_argument('--shift', choices=core.ShiftKind.ALL,
                             default=core.ShiftKind.SYMMETRIC)
    sensitivity.add_argument('--pairs', default='all',
                             help='"all" or v:u,v:u,...')
    sensitivity.add_argument('--walk-diffusion', type=int, default=None,
                             metavar='M',
                             help='Add walk-diffusion operators up to M.')
    sensitivity.set_defaults(run=run_sensitivity)

    obstruction_parser = commands.add_parser(
        'obstruction', help='Jacobian obstruction per node pair.')
    _add_graph_argument(obstruction_parser)
    obstruction_parser.add_argument('--rho', type=float, default=1.)
    obstruction_parser.add_argument('--nu', type=float, default=.5)
    obstruction_parser.add_argument('--mu', type=float, default=None,
                                    help='Defaults to nu.')
    obstruction_parser.add_argument('--cr', type=float, default=1.)
    obstruction_parser.add_argument('--ca', type=float, default=1.)
    obstruction_parser.add_argument('--depth', type=int, default=32)
    obstruction_parser.add_argument('--mode', default=obstruction.SYMMETRIC,
                                    choices=(obstruction.ACCESS,
                                             obstruction.SYMMETRIC))
    obstruction_parser.add_argument('--pairs', default='all',
                                    help='"all" or v:u,v:u,...')
    obstruction_parser.set_defaults(run=run_obstruction)

    rewire_parser = commands.add_parser('rewire', help='Add edges greedily.')
    _add_graph_argument(rewire_parser)
    rewire_parser.add_argument('--strategy', choices=('spatial', 'spectral'),
                               default='spectral')
    rewire_parser.add_argument('--budget', type=int, default=1)
    rewire_parser.add_argument('--objective', choices=rewire.Objective.ALL,
                               default=rewire.Objective.MAX_GAP)
    rewire_parser.add_argument('--threshold', type=float, default=None,
                               help='Resistance cutoff of spatial rewiring.')
    rewire_parser.add_argument('--target-diameter', type=int, default=None,
                               help='Spatial rewiring by distance.')
    rewire_parser.add_argument('--graph-out', default=None,
                               help='File for the rewired graph.')
    rewire_parser.set_defaults(run=run_rewire)

    transfer_parser = commands.add_parser(
        'transfer', help='Train on a graph-transfer task.')
    transfer_parser.add_argument('--task', choices=topologies.TRANSFER_KINDS,
                                 default=topologies.RING)
    transfer_parser.add_argument('--r', type=int, default=5)
    transfer_parser.add_argument('--model', choices=transfer.MODEL_KINDS,
                                 default=transfer.GCN)
    transfer_parser.add_argument('--hidden', type=int,
                                 default=transfer.DEFAULT_HIDDEN)
    transfer_parser.add_argument('--width', type=int,
                                 default=transfer.DEFAULT_WIDTH)
    transfer_parser.add_argument('--epochs', type=int,
                                 default=transfer.DEFAULT_EPOCHS)
    transfer_parser.add_argument('--lr', type=float,
                                 default=transfer.DEFAULT_LR)
    transfer_parser.add_argument('--n-train', type=int,
                                 default=transfer.DEFAULT_N_TRAIN)
    transfer_parser.add_argument('--n-test', type=int,
                                 default=transfer.DEFAULT_N_TEST)
    transfer_parser.add_argument('--full-scale', action='store_true',
                                 help='{} train and {} test graphs.'.format(
                                     transfer.FULL_N_TRAIN,
                                     transfer.FULL_N_TEST))
    transfer_parser.add_argument('--batch-size', type=int, default=None,
                                 help='Mini-batch size, full batch if omitted.')
    transfer_parser.set_defaults(run=run_transfer)

    signal_parser = commands.add_parser(
        'signal', help='Signal propagation against total resistance.')
    signal_parser.add_argument('graphs', nargs='*',
                               help='Graph files, a random suite if omitted.')
    signal_parser.add_argument('--num-graphs', type=int,
                               default=signal.SUITE_SIZE)
    signal_parser.add_argument('--samples', type=int,
                               default=signal.DEFAULT_SAMPLES)
    signal_parser.add_argument('--width', type=int,
                               default=signal.DEFAULT_WIDTH)
    signal_parser.add_argument('--depth', type=int, default=None,
                               help='Layers, the mean diameter if omitted.')
    signal_parser.set_defaults(run=run_signal)

    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        filename=args.log,
                        format='%(asctime)s:%(levelname)s: %(message)s')
    try:
        result = args.run(args)
    except DivergedLoss as e:
        logging.error('{}'.format(e))
        if e.outcome is not None:
            partial = Report(e.outcome.as_dict(), _loss_rows(e.outcome),
                             LOSS_COLUMNS)
            report.write_text(partial.render(args.format), args.out)
        return EXIT_NUMERICAL
    except ValidationError as e:
        logging.error('Invalid input ({}): {}'.format(e.__class__.__name__, e))
        return EXIT_VALIDATION
    except (NumericalError, RuntimeError) as e:
        logging.error('Numerical failure ({}): {}'.format(
            e.__class__.__name__, e))
        return EXIT_NUMERICAL
    except (OSError, ValueError) as e:
        logging.error('{}'.format(e))
        return EXIT_VALIDATION

    report.write_text(result.render(args.format), args.out)
    return 0


if __name__ == '__main__':
    sys.exit(main())
