""" Normalized Laplacian and its eigendecomposition by cyclic Jacobi
rotations.
"""
import logging

import numpy as np

from oversquash.exceptions import NotSymmetric, NoConvergence, ShapeMismatch
from oversquash.graph.core import ShiftKind, shift_operator

SYMMETRY_TOL = 1e-12
OFF_DIAGONAL_TOL = 1e-12
SIGN_TOL = 1e-10
DEFAULT_SWEEP_CAP = 100


class SpectralDecomposition:

    """ Eigenpairs of a symmetric matrix, ascending.

    When built from a graph Laplacian, `degrees` and `num_edges` of the
    graph are kept alongside so resistance and random-walk quantities
    can be derived from the decomposition alone.

    Attributes
    ----------
    eigenvalues : numpy.ndarray
        Ascending eigenvalues.
    eigenvectors : numpy.ndarray
        Orthonormal eigenvectors as columns.
    degrees : numpy.ndarray or None
        Node degrees of the source graph.
    num_edges : int or None
        Edge count of the source graph.
    """

    def __init__(self, eigenvalues, eigenvectors, degrees=None,
                 num_edges=None):
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors
        self.degrees = degrees
        self.num_edges = num_edges

    @property
    def size(self):
        return len(self.eigenvalues)

    @property
    def spectral_gap(self):
        return float(self.eigenvalues[1])

    @property
    def largest(self):
        return float(self.eigenvalues[-1])

    def scaled_eigenvectors(self):
        """ Rows psi_l(v) / sqrt(d_v), one column per eigenvalue. """
        if self.degrees is None:
            raise ValueError('Decomposition carries no graph degrees')
        return self.eigenvectors / np.sqrt(self.degrees)[:, None]

    def __repr__(self):
        return '{}(n={}, gap={:.6g})'.format(self.__class__.__name__,
                                             self.size, self.spectral_gap)


def normalized_laplacian(graph):
    """ I - D^{-1/2} A D^{-1/2}. """
    return np.eye(graph.num_nodes) - shift_operator(graph, ShiftKind.SYMMETRIC)


def _rotate(a, vectors, p, q):
    a_pq = a[p, q]
    theta = (a[q, q] - a[p, p]) / (2. * a_pq)
    sign = 1. if theta >= 0 else -1.
    t = sign / (abs(theta) + np.sqrt(theta * theta + 1.))
    c = 1. / np.sqrt(t * t + 1.)
    s = t * c

    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - s * col_q
    a[:, q] = s * col_p + c * col_q

    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p - s * row_q
    a[q, :] = s * row_p + c * row_q
    a[p, q] = a[q, p] = 0.

    vec_p = vectors[:, p].copy()
    vec_q = vectors[:, q].copy()
    vectors[:, p] = c * vec_p - s * vec_q
    vectors[:, q] = s * vec_p + c * vec_q


def _off_diagonal_norm(a):
    return np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.))


def jacobi_eigh(matrix, max_sweeps=DEFAULT_SWEEP_CAP, tol=OFF_DIAGONAL_TOL):
    """ Eigenpairs of a symmetric matrix by cyclic Jacobi sweeps.

    Parameters
    ----------
    matrix : numpy.ndarray
        Square symmetric matrix.
    max_sweeps : int
        Sweep cap.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm falls below
        tol * max(1, ||matrix||_F).

    Returns
    -------
    numpy.ndarray, numpy.ndarray
        Unsorted eigenvalues and eigenvectors (columns).

    Raises
    ------
    NoConvergence
        If the sweep cap is reached.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    vectors = np.eye(n)
    threshold = tol * max(1., np.linalg.norm(a))

    for sweep in range(max_sweeps + 1):
        off = _off_diagonal_norm(a)
        logging.debug('Jacobi sweep {}: off-diagonal norm {:.3e}'.format(
            sweep, off))
        if off < threshold:
            return np.diag(a).copy(), vectors
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] != 0.:
                    _rotate(a, vectors, p, q)

    raise NoConvergence('Jacobi did not converge in {} sweeps '
                        '(off-diagonal norm {:.3e})'.format(max_sweeps, off))


def _fix_signs(vectors):
    for j in range(vectors.shape[1]):
        column = vectors[:, j]
        nonzero = np.flatnonzero(np.abs(column) > SIGN_TOL)
        if len(nonzero) and column[nonzero[0]] < 0:
            vectors[:, j] = -column
    return vectors


def eigendecompose(matrix, graph=None, max_sweeps=DEFAULT_SWEEP_CAP):
    """ Sorted eigendecomposition of a symmetric matrix.

    Eigenvalues are sorted ascending (stable on ties) and every
    eigenvector has its first non-zero component positive, so identical
    input yields identical output.

    Parameters
    ----------
    matrix : numpy.ndarray
        Symmetric matrix.
    graph : Graph, optional
        Graph the matrix was derived from; its degrees and edge count
        are stored on the result.
    max_sweeps : int
        Jacobi sweep cap.

    Returns
    -------
    SpectralDecomposition

    Raises
    ------
    NotSymmetric
        If max |M - M^T| exceeds 1e-12.
    NoConvergence
        If Jacobi sweeps do not converge.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ShapeMismatch('Expected a square matrix, got shape {}'.format(
            matrix.shape))
    asymmetry = np.abs(matrix - matrix.T).max() if matrix.size else 0.
    if asymmetry > SYMMETRY_TOL:
        raise NotSymmetric('Matrix asymmetry {:.3e} exceeds {}'.format(
            asymmetry, SYMMETRY_TOL))

    eigenvalues, vectors = jacobi_eigh(matrix, max_sweeps=max_sweeps)
    order = np.argsort(eigenvalues, kind='stable')
    eigenvalues = eigenvalues[order]
    vectors = _fix_signs(vectors[:, order])

    degrees, num_edges = None, None
    if graph is not None:
        degrees = graph.degrees.astype(float)
        num_edges = graph.num_edges
    return SpectralDecomposition(eigenvalues, vectors, degrees, num_edges)


def decompose_graph(graph):
    """ Eigendecomposition of the normalized Laplacian of `graph`. """
    return eigendecompose(normalized_laplacian(graph), graph=graph)
