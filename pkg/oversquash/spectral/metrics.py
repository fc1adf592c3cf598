""" Spectral topology metrics: Cheeger bounds, effective resistance,
access and commute times.

Resistance and walk times come from the spectral sums over the
non-trivial eigenpairs of the normalized Laplacian, with
x_l(v) = psi_l(v) / sqrt(d_v):

    Res(v, u) = sum_l (x_l(v) - x_l(u))^2 / lambda_l
    t(a, b)   = 2|E| sum_l (x_l(b)^2 - x_l(a) x_l(b)) / lambda_l

t(a, b) is the expected number of steps a random walk started at a
needs to first reach b.
"""
import itertools

import numpy as np

from oversquash.exceptions import NodeOutOfRange, SameNode, SingularSystem, \
    TooLarge
from oversquash.graph.core import check_node
from oversquash.spectral.eigen import decompose_graph

EXACT_CHEEGER_MAX_NODES = 16


class TopologyMetrics:

    """ Connectivity summary of a graph.

    Attributes
    ----------
    spectral_gap : float
        lambda_1 of the normalized Laplacian.
    cheeger_lower, cheeger_upper : float
        lambda_1 / 2 and sqrt(2 lambda_1).
    cheeger_exact : float or None
        Exact Cheeger constant, only for small graphs.
    total_resistance : float
        Sum of Res(v, u) over unordered pairs.
    resistance, commute, access : numpy.ndarray
        All-pairs matrices; access[a, b] is the time from a to b.
    """

    def __init__(self, spectral_gap, cheeger_lower, cheeger_upper,
                 cheeger_exact, total_resistance, resistance, commute,
                 access):
        self.spectral_gap = spectral_gap
        self.cheeger_lower = cheeger_lower
        self.cheeger_upper = cheeger_upper
        self.cheeger_exact = cheeger_exact
        self.total_resistance = total_resistance
        self.resistance = resistance
        self.commute = commute
        self.access = access

    def summary(self):
        return dict(spectral_gap=self.spectral_gap,
                    cheeger_lower=self.cheeger_lower,
                    cheeger_upper=self.cheeger_upper,
                    cheeger_exact=self.cheeger_exact,
                    total_resistance=self.total_resistance,
                    max_commute=float(self.commute.max()))

    def __repr__(self):
        return '{}(spectral_gap={:.6g}, total_resistance={:.6g})'.format(
            self.__class__.__name__, self.spectral_gap, self.total_resistance)


def cheeger_bounds(lambda_1):
    """ Bounds on the Cheeger constant from the spectral gap.

    2h >= lambda_1 > h^2 / 2 gives lambda_1 / 2 <= h < sqrt(2 lambda_1).

    Returns
    -------
    float, float
        Lower and upper bound.
    """
    if lambda_1 <= 0:
        raise ValueError('Spectral gap must be positive, got {}'.format(
            lambda_1))
    return lambda_1 / 2., float(np.sqrt(2. * lambda_1))


def cheeger_exact(graph):
    """ Exact Cheeger constant by enumerating all node subsets.

    Raises
    ------
    TooLarge
        If the graph has more than 16 nodes.
    """
    n = graph.num_nodes
    if n > EXACT_CHEEGER_MAX_NODES:
        raise TooLarge('Exact Cheeger constant needs n <= {}, got {}'.format(
            EXACT_CHEEGER_MAX_NODES, n))

    codes = np.arange(1, 2 ** n - 1)
    members = ((codes[:, None] >> np.arange(n)) & 1).astype(bool)
    volume = members.dot(graph.degrees)
    total_volume = graph.degrees.sum()

    edges = np.array(graph.edges)
    cut = (members[:, edges[:, 0]] != members[:, edges[:, 1]]).sum(axis=1)
    ratio = cut / np.minimum(volume, total_volume - volume)
    return float(ratio.min())


def _check_pair(decomp, v, u):
    for node in (v, u):
        if not 0 <= node < decomp.size:
            raise NodeOutOfRange('Node {} outside [0, {})'.format(node,
                                                                 decomp.size))


def _resistance_kernel(decomp):
    scaled = decomp.scaled_eigenvectors()[:, 1:]
    return (scaled / decomp.eigenvalues[1:]).dot(scaled.T)


def effective_resistance(decomp, v, u):
    """ Effective resistance between v and u.

    Parameters
    ----------
    decomp : SpectralDecomposition
        Normalized Laplacian decomposition carrying graph degrees.
    v, u : int
        Nodes.

    Returns
    -------
    float
    """
    _check_pair(decomp, v, u)
    scaled = decomp.scaled_eigenvectors()
    diff = scaled[v, 1:] - scaled[u, 1:]
    return float(np.sum(diff ** 2 / decomp.eigenvalues[1:]))


def resistance_matrix(decomp):
    kernel = _resistance_kernel(decomp)
    diag = np.diag(kernel)
    resistance = diag[:, None] + diag[None, :] - 2. * kernel
    resistance = np.maximum(resistance, 0.)
    np.fill_diagonal(resistance, 0.)
    return resistance


def total_resistance(decomp):
    """ Res_G, summed over unordered node pairs. """
    return float(resistance_matrix(decomp).sum() / 2.)


def resistance_pinv_oracle(graph, v, u):
    """ Effective resistance from the combinatorial Laplacian D - A.

    Node u is grounded: its row and column are removed and the reduced
    system L' x = e_v solved, so Res(v, u) = x_v.

    Raises
    ------
    SingularSystem
        If the grounded Laplacian is singular.
    """
    check_node(graph, v)
    check_node(graph, u)
    if v == u:
        return 0.

    laplacian = np.diag(graph.degrees.astype(float)) - graph.adjacency
    keep = [node for node in range(graph.num_nodes) if node != u]
    reduced = laplacian[np.ix_(keep, keep)]
    rhs = np.zeros(len(keep))
    index = keep.index(v)
    rhs[index] = 1.
    try:
        potentials = np.linalg.solve(reduced, rhs)
    except np.linalg.LinAlgError as e:
        raise SingularSystem('Grounded Laplacian is singular: {}'.format(e))
    return float(potentials[index])


def _two_m(decomp):
    if decomp.num_edges is None:
        raise ValueError('Decomposition carries no edge count')
    return 2. * decomp.num_edges


def access_time(decomp, v, u):
    """ Expected steps of a random walk from v to first reach u.

    Raises
    ------
    SameNode
        If v == u.
    """
    _check_pair(decomp, v, u)
    if v == u:
        raise SameNode('Access time needs distinct nodes, got {} twice'.format(
            v))
    scaled = decomp.scaled_eigenvectors()[:, 1:]
    terms = (scaled[u] ** 2 - scaled[v] * scaled[u]) / decomp.eigenvalues[1:]
    return float(_two_m(decomp) * terms.sum())


def commute_time(decomp, v, u):
    """ t(v, u) + t(u, v) = 2|E| Res(v, u).

    Raises
    ------
    SameNode
        If v == u.
    """
    if v == u:
        raise SameNode('Commute time needs distinct nodes, got {} twice'.format(
            v))
    return _two_m(decomp) * effective_resistance(decomp, v, u)


def access_matrix(decomp):
    """ Matrix of access times, entry [a, b] from a to b. """
    kernel = _resistance_kernel(decomp)
    access = _two_m(decomp) * (np.diag(kernel)[None, :] - kernel)
    np.fill_diagonal(access, 0.)
    return access


def commute_matrix(decomp):
    return _two_m(decomp) * resistance_matrix(decomp)


def topology_metrics(graph, decomp=None, exact_cheeger=None):
    """ Spectral gap, Cheeger bounds and all-pairs resistance quantities.

    Parameters
    ----------
    graph : Graph
        Input graph.
    decomp : SpectralDecomposition, optional
        Reused if given.
    exact_cheeger : bool, optional
        Compute the exact Cheeger constant. Defaults to n <= 16.

    Returns
    -------
    TopologyMetrics
    """
    if decomp is None:
        decomp = decompose_graph(graph)
    if exact_cheeger is None:
        exact_cheeger = graph.num_nodes <= EXACT_CHEEGER_MAX_NODES

    lower, upper = cheeger_bounds(decomp.spectral_gap)
    resistance = resistance_matrix(decomp)
    return TopologyMetrics(
        spectral_gap=decomp.spectral_gap,
        cheeger_lower=lower,
        cheeger_upper=upper,
        cheeger_exact=cheeger_exact(graph) if exact_cheeger else None,
        total_resistance=float(resistance.sum() / 2.),
        resistance=resistance,
        commute=_two_m(decomp) * resistance,
        access=access_matrix(decomp))


def node_pairs(n):
    """ Unordered pairs (v, u), v < u, lexicographic. """
    return list(itertools.combinations(range(n), 2))
