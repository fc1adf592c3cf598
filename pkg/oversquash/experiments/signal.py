""" How far a unit signal travels through an untrained network, and its
relation to the total effective resistance of the graph.

A unit L1 mass is placed at a source node and pushed through m random
message-passing layers. For each output channel f the absolute outputs
are normalized into a mass distribution over the nodes, and the
propagation distance

    h(f) = sum_{u != v} mass_f(u) d(v, u) / max_u d(v, u)

lies in [0, 1]. The reported value averages h(f) over the channels that
carry any mass.
"""
import logging
import math

import numpy as np
from scipy import stats

from oversquash.exceptions import InsufficientGraphs
from oversquash.graph.core import ShiftKind, bfs_distances, check_node
from oversquash.graph.topologies import random_connected_graph
from oversquash.sensitivity.mpnn import MpnnConfig, MpnnModel, Nonlinearity, \
    mpnn_forward
from oversquash.spectral import metrics
from oversquash.spectral.eigen import decompose_graph

DEFAULT_WIDTH = 5
DEFAULT_SAMPLES = 10
MIN_GRAPHS = 20
SUITE_SIZE = 50
SUITE_MIN_NODES = 8
SUITE_MAX_NODES = 20
SUITE_EDGE_PROBS = (.15, .6)


class SignalReport:

    """ Propagation distance of a signal started at `source`.

    `propagation` is 0 with `zero_mass` set when every output channel
    vanishes.
    """

    def __init__(self, graph_id, source, propagation, live_channels,
                 zero_mass, resistance_estimate=None):
        self.graph_id = graph_id
        self.source = source
        self.propagation = propagation
        self.live_channels = live_channels
        self.zero_mass = zero_mass
        self.resistance_estimate = resistance_estimate

    def as_dict(self):
        return dict(graph_id=self.graph_id, source=self.source,
                    propagation=self.propagation,
                    live_channels=self.live_channels,
                    zero_mass=self.zero_mass,
                    resistance_estimate=self.resistance_estimate)

    def __repr__(self):
        return '{}(graph_id={}, source={}, propagation={:.4f})'.format(
            self.__class__.__name__, self.graph_id, self.source,
            self.propagation)


def propagation_distance(output, distances, source):
    """ Mean normalized propagation distance of an n x p output.

    Returns
    -------
    float, int
        The distance averaged over live channels, and their number.
    """
    mass = np.abs(np.asarray(output, dtype=float))
    totals = mass.sum(axis=0)
    live = totals > 0
    if not live.any():
        return 0., 0
    eccentricity = distances.max()
    weights = np.array(distances, dtype=float)
    weights[source] = 0.
    per_channel = weights.dot(mass[:, live]) / totals[live] / eccentricity
    return float(per_channel.mean()), int(live.sum())


def signal_propagation(graph, model, source, features=None, graph_id=0):
    """ Push a unit mass from `source` through `model`.

    Parameters
    ----------
    graph : Graph
        Input graph.
    model : MpnnModel
        Network with m layers.
    source : int
        Node holding the initial mass.
    features : numpy.ndarray, optional
        Feature vector at `source`, rescaled to unit L1 mass. Uniform
        over the channels by default.
    graph_id : int
        Identifier copied into the report.

    Returns
    -------
    SignalReport
    """
    check_node(graph, source)
    p = model.config.width
    vector = np.ones(p) if features is None else \
        np.asarray(features, dtype=float)
    vector = vector / np.abs(vector).sum()

    H0 = np.zeros((graph.num_nodes, p))
    H0[source] = vector
    output = mpnn_forward(model, graph, H0).output
    propagation, live = propagation_distance(output,
                                             bfs_distances(graph, source),
                                             source)
    if not live:
        logging.debug('All output channels vanish on graph {} from node '
                      '{}'.format(graph_id, source))
    return SignalReport(graph_id, int(source), propagation, live, not live)


def sampled_total_resistance(resistance, nodes):
    """ Res_G estimated from the pairs among `nodes`.

    The mean resistance over the sampled pairs is scaled to all
    n (n - 1) / 2 pairs.
    """
    n = resistance.shape[0]
    nodes = sorted(int(v) for v in nodes)
    pairs = [(v, u) for i, v in enumerate(nodes) for u in nodes[i + 1:]]
    if not pairs:
        raise ValueError('Need at least two sampled nodes')
    mean = np.mean([resistance[v, u] for v, u in pairs])
    return float(mean * math.comb(n, 2))


def random_graph_suite(num_graphs=SUITE_SIZE, seed=0,
                       min_nodes=SUITE_MIN_NODES, max_nodes=SUITE_MAX_NODES,
                       edge_probs=SUITE_EDGE_PROBS):
    """ Connected Erdos-Renyi graphs of random size and density. """
    rng = np.random.default_rng(seed)
    graphs = list()
    for _ in range(num_graphs):
        n = int(rng.integers(min_nodes, max_nodes + 1))
        prob = float(rng.uniform(*edge_probs))
        graphs.append(random_connected_graph(n, prob,
                                             int(rng.integers(2 ** 32))))
    return graphs


def default_signal_config(graphs, width=DEFAULT_WIDTH):
    """ ReLU network of width p whose depth is the mean graph diameter. """
    depth = max(1, int(round(np.mean([g.diameter() for g in graphs]))))
    return MpnnConfig(width, depth, c_r=1., c_a=1.,
                      shift=ShiftKind.SYMMETRIC,
                      nonlinearity=Nonlinearity.RELU)


class SignalExperiment:

    """ Per-graph resistance estimates and propagation distances with
    their Spearman correlation.
    """

    COLUMNS = ('graph_id', 'num_nodes', 'num_edges', 'resistance_estimate',
               'propagation', 'zero_mass_sources')

    def __init__(self, rows, correlation, p_value, config):
        self.rows = rows
        self.correlation = correlation
        self.p_value = p_value
        self.config = config

    def as_dict(self):
        return dict(correlation=self.correlation, p_value=self.p_value,
                    depth=self.config.depth, width=self.config.width,
                    rows=self.rows)

    def __repr__(self):
        return '{}(graphs={}, correlation={:.4f})'.format(
            self.__class__.__name__, len(self.rows), self.correlation)


def resistance_signal_experiment(graphs, config=None,
                                 samples=DEFAULT_SAMPLES, seed=0):
    """ Correlate sampled Res_G with the mean propagation distance.

    For every graph a random network is drawn and `samples` nodes are
    chosen uniformly; they serve both as sources of the signal and as
    the sample for the resistance estimate.

    Parameters
    ----------
    graphs : list[Graph]
        At least 20 graphs.
    config : MpnnConfig, optional
        Network architecture, `default_signal_config` if None.
    samples : int
        Nodes sampled per graph.
    seed : int
        Seed of the networks and node samples.

    Returns
    -------
    SignalExperiment

    Raises
    ------
    InsufficientGraphs
        If fewer than 20 graphs are given.
    """
    if len(graphs) < MIN_GRAPHS:
        raise InsufficientGraphs('Need at least {} graphs, got {}'.format(
            MIN_GRAPHS, len(graphs)))
    if config is None:
        config = default_signal_config(graphs)
    rng = np.random.default_rng(seed)

    rows = list()
    for graph_id, graph in enumerate(graphs):
        model = MpnnModel.random(config, int(rng.integers(2 ** 32)))
        nodes = rng.choice(graph.num_nodes,
                           size=min(samples, graph.num_nodes), replace=False)
        resistance = metrics.resistance_matrix(decompose_graph(graph))
        estimate = sampled_total_resistance(resistance, nodes)
        reports = [signal_propagation(graph, model, int(v), graph_id=graph_id)
                   for v in nodes]
        for item in reports:
            item.resistance_estimate = estimate
        rows.append(dict(
            graph_id=graph_id,
            num_nodes=graph.num_nodes,
            num_edges=graph.num_edges,
            resistance_estimate=estimate,
            propagation=float(np.mean([r.propagation for r in reports])),
            zero_mass_sources=sum(r.zero_mass for r in reports)))

    correlation, p_value = stats.spearmanr(
        [row['resistance_estimate'] for row in rows],
        [row['propagation'] for row in rows])
    logging.info('Spearman correlation of Res_G and propagation distance over '
                 '{} graphs: {:.4f}'.format(len(rows), correlation))
    return SignalExperiment(rows, float(correlation), float(p_value), config)
