""" Graph representation, shift operators and walk counting.

Graphs are simple, undirected and connected with nodes labelled
0..n-1. All matrices are dense numpy arrays.
"""
import logging

import networkx as nx
import numpy as np

from oversquash.exceptions import SelfLoop, DuplicateEdge, Disconnected, \
    NodeOutOfRange, EmptyGraph, TooLarge, NegativeCoefficient, \
    EdgeAlreadyPresent

MAX_NODES = 2048


class ShiftKind:

    """ Graph shift operator variants. """

    ADJACENCY = 'adjacency'
    RANDOM_WALK = 'random_walk'
    SYMMETRIC = 'symmetric'

    ALL = (ADJACENCY, RANDOM_WALK, SYMMETRIC)


class Graph:

    """ Simple, undirected and connected graph.

    Instances are validated on construction and never change afterwards;
    `add_edges` returns a new graph.

    Parameters
    ----------
    num_nodes : int
        Number of nodes n, nodes are labelled 0..n-1.
    edges : iterable[tuple[int, int]]
        Unordered node pairs.

    Raises
    ------
    EmptyGraph
        If n < 1 or no edges are given.
    TooLarge
        If n exceeds `MAX_NODES`.
    NodeOutOfRange, SelfLoop, DuplicateEdge, Disconnected
        If the edge list is not a simple connected graph.
    """

    def __init__(self, num_nodes, edges):
        num_nodes = int(num_nodes)
        if num_nodes < 1:
            raise EmptyGraph('Graph needs at least one node, got {}'.format(
                num_nodes))
        if num_nodes > MAX_NODES:
            raise TooLarge('Graph has {} nodes, cap is {}'.format(num_nodes,
                                                                  MAX_NODES))

        pairs = _validate_edges(num_nodes, edges)
        self.num_nodes = num_nodes
        self.edges = tuple(sorted(pairs))
        self._edge_set = frozenset(self.edges)

        adjacency = np.zeros((num_nodes, num_nodes))
        for v, u in self.edges:
            adjacency[v, u] = 1.
            adjacency[u, v] = 1.
        adjacency.setflags(write=False)
        self.adjacency = adjacency

        degrees = adjacency.sum(axis=1).astype(int)
        degrees.setflags(write=False)
        self.degrees = degrees

        _check_connected(self)

    @property
    def num_edges(self):
        return len(self.edges)

    @property
    def min_degree(self):
        return int(self.degrees.min())

    @property
    def max_degree(self):
        return int(self.degrees.max())

    def has_edge(self, v, u):
        return (min(v, u), max(v, u)) in self._edge_set

    def neighbors(self, v):
        return np.flatnonzero(self.adjacency[v])

    def non_edges(self):
        """ All absent node pairs (v, u), v < u, in lexicographic order. """
        pairs = list()
        for v in range(self.num_nodes):
            for u in range(v + 1, self.num_nodes):
                if (v, u) not in self._edge_set:
                    pairs.append((v, u))
        return pairs

    def add_edges(self, pairs):
        """ New graph with `pairs` added.

        Raises
        ------
        EdgeAlreadyPresent
            If any pair already is an edge of this graph.
        """
        pairs = list(pairs)
        for v, u in pairs:
            if self.has_edge(v, u):
                raise EdgeAlreadyPresent('Edge ({}, {}) already present'.format(
                    v, u))
        return Graph(self.num_nodes, list(self.edges) + pairs)

    def to_networkx(self):
        nx_graph = nx.Graph()
        nx_graph.add_nodes_from(range(self.num_nodes))
        nx_graph.add_edges_from(self.edges)
        return nx_graph

    def diameter(self):
        if self.num_nodes == 1:
            return 0
        return nx.diameter(self.to_networkx())

    def is_bipartite(self):
        return nx.is_bipartite(self.to_networkx())

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.num_nodes == other.num_nodes and self.edges == other.edges

    def __hash__(self):
        return hash((self.num_nodes, self.edges))

    def __repr__(self):
        return '{}(num_nodes={}, num_edges={})'.format(
            self.__class__.__name__, self.num_nodes, self.num_edges)


class MessagePassingMatrix:

    """ S = c_r * I + c_a * A_hat for a chosen shift operator A_hat. """

    def __init__(self, base, c_r, c_a, matrix):
        self.base = base
        self.c_r = c_r
        self.c_a = c_a
        self.matrix = matrix

    @property
    def size(self):
        return self.matrix.shape[0]

    def __repr__(self):
        return '{}(base="{}", c_r={}, c_a={}, n={})'.format(
            self.__class__.__name__, self.base, self.c_r, self.c_a, self.size)


def _validate_edges(num_nodes, edges):
    pairs = set()
    for edge in edges:
        v, u = (int(node) for node in edge)
        for node in (v, u):
            if not 0 <= node < num_nodes:
                raise NodeOutOfRange(
                    'Node {} in edge ({}, {}) outside [0, {})'.format(
                        node, v, u, num_nodes))
        if v == u:
            raise SelfLoop('Self-loop on node {}'.format(v))

        pair = (min(v, u), max(v, u))
        if pair in pairs:
            raise DuplicateEdge('Duplicate edge ({}, {})'.format(v, u))
        pairs.add(pair)

    if not pairs:
        raise EmptyGraph('Edge list is empty')
    return pairs


def _check_connected(graph):
    reached = bfs_distances(graph, 0) >= 0
    if not reached.all():
        missing = int(np.flatnonzero(~reached)[0])
        raise Disconnected('Node {} is unreachable from node 0'.format(missing))


def build_graph(num_nodes, edge_list):
    """ Validate an edge list and build a `Graph`.

    Parameters
    ----------
    num_nodes : int
        Number of nodes.
    edge_list : iterable[tuple[int, int]]
        Edges as node pairs, 0-based.

    Returns
    -------
    Graph
    """
    return Graph(num_nodes, edge_list)


def check_node(graph, node):
    if not 0 <= node < graph.num_nodes:
        raise NodeOutOfRange('Node {} outside [0, {})'.format(node,
                                                             graph.num_nodes))


def shift_operator(graph, kind):
    """ Dense graph shift operator.

    Parameters
    ----------
    graph : Graph
        Input graph.
    kind : str
        One of `ShiftKind.ALL`.

    Returns
    -------
    numpy.ndarray
        n x n matrix; entry (v, u) is non-zero exactly on edges.
    """
    adjacency = np.array(graph.adjacency)
    degrees = graph.degrees.astype(float)
    if kind == ShiftKind.ADJACENCY:
        return adjacency
    elif kind == ShiftKind.RANDOM_WALK:
        return adjacency / degrees[:, None]
    elif kind == ShiftKind.SYMMETRIC:
        inv_sqrt = 1. / np.sqrt(degrees)
        return adjacency * np.outer(inv_sqrt, inv_sqrt)
    else:
        raise ValueError('Unknown shift operator: {}'.format(kind))


def message_passing_matrix(graph, kind, c_r, c_a):
    """ Build S = c_r * I + c_a * A_hat.

    Raises
    ------
    NegativeCoefficient
        If c_r or c_a is negative.
    """
    for name, value in (('c_r', c_r), ('c_a', c_a)):
        if value < 0:
            raise NegativeCoefficient('{} must be non-negative, got {}'.format(
                name, value))

    matrix = c_r * np.eye(graph.num_nodes) + c_a * shift_operator(graph, kind)
    return MessagePassingMatrix(kind, c_r, c_a, matrix)


def _as_array(S):
    return np.asarray(getattr(S, 'matrix', S), dtype=float)


def matrix_power(S, m):
    """ S^m for a `MessagePassingMatrix` or a square array, m >= 0. """
    if m < 0:
        raise ValueError('Power must be non-negative, got {}'.format(m))
    return np.linalg.matrix_power(_as_array(S), m)


def matrix_power_entry(S, m, v, u):
    """ Entry (v, u) of S^m.

    The row e_v^T S^m is accumulated by repeated dense products.

    Parameters
    ----------
    S : MessagePassingMatrix or numpy.ndarray
        Square matrix.
    m : int
        Power, m >= 0.
    v, u : int
        Row and column.

    Returns
    -------
    float
    """
    if m < 0:
        raise ValueError('Power must be non-negative, got {}'.format(m))
    matrix = _as_array(S)
    row = np.zeros(matrix.shape[0])
    row[v] = 1.
    for _ in range(m):
        row = row.dot(matrix)
    return float(row[u])


def walk_count(graph, v, u, length):
    """ Number of walks from v to u of length at most `length`.

    Computed with exact integers on the unnormalized adjacency, so
    gamma_l(v, u) = sum_{i=0..l} (A^i)_{vu}.

    Returns
    -------
    int
    """
    if length < 0:
        raise ValueError('Walk length must be non-negative, got {}'.format(
            length))
    check_node(graph, v)
    check_node(graph, u)

    adjacency = graph.adjacency.astype(int).astype(object)
    vector = np.zeros(graph.num_nodes, dtype=object)
    vector[v] = 1
    total = int(vector[u])
    for _ in range(length):
        vector = adjacency.dot(vector)
        total += int(vector[u])
    return total


def bfs_distances(graph, v):
    """ Shortest-path distances from node `v`.

    Returns
    -------
    numpy.ndarray
        Integer distances, -1 for unreachable nodes.
    """
    check_node(graph, v)
    nx_graph = nx.Graph()
    nx_graph.add_nodes_from(range(graph.num_nodes))
    nx_graph.add_edges_from(graph.edges)
    distances = np.full(graph.num_nodes, -1, dtype=int)
    for node, dist in nx.single_source_shortest_path_length(nx_graph,
                                                            v).items():
        distances[node] = dist
    logging.debug('BFS from {} reached {} nodes'.format(
        v, int((distances >= 0).sum())))
    return distances


def distance_matrix(graph):
    """ All-pairs shortest-path distances as an n x n integer array. """
    distances = np.zeros((graph.num_nodes, graph.num_nodes), dtype=int)
    lengths = nx.all_pairs_shortest_path_length(graph.to_networkx())
    for v, row in lengths:
        for u, dist in row.items():
            distances[v, u] = dist
    return distances
