""" Walk-importance diffusion.

For each walk length m the operator zeta_m rescales the rows of
A_bar^m by gamma(i; m) = 1 / lse(row i of A_bar^m), where A_bar is the
symmetric-normalized adjacency. The layer output is

    Z = sum_{m=1..M} zeta_m (X W_enc) W_m
"""
import numpy as np
from scipy.special import logsumexp

from oversquash.exceptions import EmptyVector, ShapeMismatch
from oversquash.graph.core import ShiftKind, shift_operator


class WalkWeights:

    """ Per-length walk matrices, row scalings and diffusion operators.

    Attributes
    ----------
    max_length : int
        Largest walk length M.
    walk_matrices : list[numpy.ndarray]
        A_bar^m for m = 1..M.
    gammas : numpy.ndarray
        M x n array, gammas[m - 1, i] = gamma(i; m).
    operators : list[numpy.ndarray]
        zeta_m for m = 1..M.
    """

    def __init__(self, max_length, walk_matrices, gammas, operators):
        self.max_length = max_length
        self.walk_matrices = walk_matrices
        self.gammas = gammas
        self.operators = operators

    def __repr__(self):
        return '{}(max_length={}, n={})'.format(
            self.__class__.__name__, self.max_length, self.gammas.shape[1])


def lse(vector):
    """ Log-sum-exp, shifted by the maximum.

    Raises
    ------
    EmptyVector
        If `vector` has no entries.
    """
    vector = np.asarray(vector, dtype=float).ravel()
    if vector.size == 0:
        raise EmptyVector('lse of an empty vector')
    return float(logsumexp(vector))


def walk_operators(graph, max_length):
    """ Build zeta_1..zeta_M for `graph`.

    Parameters
    ----------
    graph : Graph
        Input graph.
    max_length : int
        M >= 1.

    Returns
    -------
    WalkWeights
    """
    if max_length < 1:
        raise ValueError('Maximum walk length must be >= 1, got {}'.format(
            max_length))

    shift = shift_operator(graph, ShiftKind.SYMMETRIC)
    walk_matrices = list()
    operators = list()
    gammas = np.zeros((max_length, graph.num_nodes))

    power = np.eye(graph.num_nodes)
    for m in range(1, max_length + 1):
        power = power.dot(shift)
        row_gamma = np.array([1. / lse(row) for row in power])
        gammas[m - 1] = row_gamma
        walk_matrices.append(power)
        operators.append(row_gamma[:, None] * power)

    return WalkWeights(max_length, walk_matrices, gammas, operators)


def diffusion_forward(weights, features, encoder, length_weights):
    """ Z = sum_m zeta_m (X W_enc) W_m.

    Parameters
    ----------
    weights : WalkWeights
        Output of `walk_operators`.
    features : numpy.ndarray
        n x F input X.
    encoder : numpy.ndarray
        F x F' encoder W_enc.
    length_weights : sequence[numpy.ndarray]
        M matrices of shape F' x F''.

    Returns
    -------
    numpy.ndarray
        n x F'' output.
    """
    features = np.asarray(features, dtype=float)
    encoder = np.asarray(encoder, dtype=float)
    n = weights.gammas.shape[1]

    if features.ndim != 2 or features.shape[0] != n:
        raise ShapeMismatch('Features must be {} x F, got {}'.format(
            n, features.shape))
    if encoder.ndim != 2 or encoder.shape[0] != features.shape[1]:
        raise ShapeMismatch('Encoder must be {} x F\', got {}'.format(
            features.shape[1], encoder.shape))
    if len(length_weights) != weights.max_length:
        raise ShapeMismatch('Expected {} per-length weights, got {}'.format(
            weights.max_length, len(length_weights)))

    encoded = features.dot(encoder)
    out_dims = set(np.shape(w) for w in length_weights)
    if len(out_dims) != 1 or next(iter(out_dims))[0] != encoded.shape[1]:
        raise ShapeMismatch('Per-length weights must share shape {} x F\'\'; '
                            'got {}'.format(encoded.shape[1], sorted(out_dims)))

    output = np.zeros((n, np.shape(length_weights[0])[1]))
    for zeta, w_m in zip(weights.operators, length_weights):
        output += zeta.dot(encoded).dot(w_m)
    return output


def correction_tensor(weights, length):
    """ Diagnostic -log(Gamma_k * A_bar^k), +inf where A_bar^k is zero. """
    zeta = weights.operators[length - 1]
    result = np.full(zeta.shape, np.inf)
    positive = zeta > 0
    result[positive] = -np.log(zeta[positive])
    return result
