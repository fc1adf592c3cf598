""" Synthetic graph generators.

The three transfer topologies place a source and a target node at
distance r:

* ring - the cycle on 2r nodes.
* crossed_ring - the same cycle with ladder crosses between the arms.
* clique_path - an (r-1)-clique attached through one clique node to a
  path of r-1 nodes.
"""
import logging
import math

import networkx as nx
import numpy as np

from oversquash.exceptions import InvalidDistance
from oversquash.graph.core import Graph, ShiftKind, matrix_power_entry, \
    shift_operator

RING = 'ring'
CROSSED_RING = 'crossed_ring'
CLIQUE_PATH = 'clique_path'

TRANSFER_KINDS = (RING, CROSSED_RING, CLIQUE_PATH)


class TransferTopology:

    """ Placement of source and target on a transfer graph. """

    def __init__(self, kind, r, source, target):
        self.kind = kind
        self.r = r
        self.source = source
        self.target = target

    def __repr__(self):
        return '{}(kind="{}", r={}, source={}, target={})'.format(
            self.__class__.__name__, self.kind, self.r, self.source,
            self.target)


def _check_distance(r, minimum):
    if r < minimum:
        raise InvalidDistance('Distance must be at least {}, got {}'.format(
            minimum, r))


def make_ring(r):
    """ Cycle on 2r nodes with source 0 and target r.

    Raises
    ------
    InvalidDistance
        If r < 2.
    """
    _check_distance(r, 2)
    n = 2 * r
    edges = [(i, (i + 1) % n) for i in range(n)]
    return Graph(n, edges), TransferTopology(RING, r, 0, r)


def make_crossed_ring(r):
    """ Cycle on 2r nodes with crosses between the two arms.

    Arm nodes at distance j from the source are `j` (upper arm) and
    `2r - j` (lower arm). For every j in 1..r-2 each arm node at distance
    j is joined to the opposite arm node at distance j + 1, drawing an X
    between consecutive rungs. Source and target get no crosses, so the
    distance stays r.

    Raises
    ------
    InvalidDistance
        If r < 3.
    """
    _check_distance(r, 3)
    n = 2 * r
    edges = [(i, (i + 1) % n) for i in range(n)]

    def lower(j):
        return n - j

    for j in range(1, r - 1):
        edges.append((j, lower(j + 1)))
        edges.append((j + 1, lower(j)))

    return Graph(n, edges), TransferTopology(CROSSED_RING, r, 0, r)


def make_clique_path(r):
    """ (r-1)-clique joined to a path of r-1 nodes.

    Clique nodes are 0..r-2 with the source at 0. Clique node 1 is the
    only one attached to the path head, so the source needs one hop to
    reach the path. The target is the path end, at distance r.

    Raises
    ------
    InvalidDistance
        If r < 3.
    """
    _check_distance(r, 3)
    clique_size = r - 1
    path = list(range(clique_size, clique_size + r - 1))

    edges = list()
    for v in range(clique_size):
        for u in range(v + 1, clique_size):
            edges.append((v, u))
    edges.append((1, path[0]))
    edges.extend(zip(path[:-1], path[1:]))

    n = clique_size + len(path)
    return Graph(n, edges), TransferTopology(CLIQUE_PATH, r, 0, path[-1])


def make_topology(kind, r):
    """ Dispatch on topology name. """
    makers = {RING: make_ring,
              CROSSED_RING: make_crossed_ring,
              CLIQUE_PATH: make_clique_path}
    try:
        maker = makers[kind]
    except KeyError:
        raise ValueError('Unknown topology: {}'.format(kind))
    return maker(r)


def closed_form_power(kind, r):
    """ Published value of (A_hat^r)_{source, target}, symmetric shift.

    Returns
    -------
    float
    """
    if kind == RING:
        return 2. ** -(r - 1)
    elif kind == CROSSED_RING:
        return 1.5 ** -(r - 1)
    elif kind == CLIQUE_PATH:
        return 2. ** -(r - 2) / (r * math.sqrt(r - 2))
    else:
        raise ValueError('Unknown topology: {}'.format(kind))


def compare_closed_form(kind, r):
    """ Measure (A_hat^r)_{source, target} next to the published value.

    Returns
    -------
    dict
        Keys `measured`, `closed_form` and `relative_deviation`.
    """
    graph, topology = make_topology(kind, r)
    shift = shift_operator(graph, ShiftKind.SYMMETRIC)
    measured = matrix_power_entry(shift, r, topology.source, topology.target)
    closed = closed_form_power(kind, r)
    deviation = abs(measured - closed) / abs(closed)
    logging.info('{} r={}: measured {:.6g}, closed form {:.6g} '
                 '(relative deviation {:.3g})'.format(kind, r, measured,
                                                      closed, deviation))
    return dict(measured=measured, closed_form=closed,
                relative_deviation=deviation)


def path_graph(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n):
    return Graph(n, [(v, u) for v in range(n) for u in range(v + 1, n)])


def barbell_graph(clique_size):
    """ Two cliques joined by the single edge (clique_size - 1, clique_size).
    """
    nx_graph = nx.barbell_graph(clique_size, 0)
    return Graph(nx_graph.number_of_nodes(), nx_graph.edges())


def random_connected_graph(n, edge_prob, seed, max_tries=1000):
    """ Erdos-Renyi graph G(n, edge_prob) conditioned on connectivity.

    Draws are repeated with seeds derived from `seed` until a connected
    sample appears.

    Parameters
    ----------
    n : int
        Number of nodes, n >= 2.
    edge_prob : float
        Edge probability.
    seed : int
        Base seed.
    max_tries : int
        Maximum number of draws.

    Returns
    -------
    Graph
    """
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        draw_seed = int(rng.integers(2 ** 31 - 1))
        nx_graph = nx.gnp_random_graph(n, edge_prob, seed=draw_seed)
        if nx_graph.number_of_edges() and nx.is_connected(nx_graph):
            return Graph(n, nx_graph.edges())
    raise RuntimeError('No connected G({}, {}) in {} draws'.format(
        n, edge_prob, max_tries))
