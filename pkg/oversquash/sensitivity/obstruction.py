""" Expected Jacobians and Jacobian obstructions.

Every path of the computational graph is assumed to be active with the
same probability rho, so the expected Jacobian between layers k and m is
rho times the weight product times (S^{m-k})_{vu}. For the symmetric
shift S has eigenvalues s_l = c_r + c_a (1 - lambda_l), with lambda_l
the normalized Laplacian spectrum, and all obstruction quantities reduce
to spectral sums over l >= 1 with x_l(v) = psi_l(v) / sqrt(d_v):

* access mode, pair terms a_l = x_l(v)^2 - x_l(v) x_l(u):
  O(v, u) = sum_{k=0..m} rho nu^{m-k} |sum_l s_l^{m-k} a_l|
* symmetric mode, pair terms b_l = (x_l(v) - x_l(u))^2:
  O~(v, u) = sum_{k=0..m} rho w^{m-k} sum_l s_l^{m-k} b_l, w in {nu, mu}

The weight products are bounded by nu^{m-k} from below and mu^{m-k}
from above.
"""
import numpy as np

from oversquash.exceptions import BipartiteGraph, ModePreconditionViolated, \
    SameNode
from oversquash.graph.core import ShiftKind, matrix_power_entry
from oversquash.spectral import metrics

MODE_TOL = 1e-9
BIPARTITE_TOL = 1e-9

ACCESS = 'access'
SYMMETRIC = 'symmetric'


class ObstructionConfig:

    """ Parameters of the expected-Jacobian model.

    Parameters
    ----------
    rho : float
        Path activation probability in (0, 1].
    nu, mu : float
        Smallest singular value and largest spectral norm of the weights.
    c_r, c_a : float
        Residual and aggregation coefficients.
    depth : int
        Number of layers m.
    """

    def __init__(self, rho, nu, mu, c_r, c_a, depth):
        if not 0 < rho <= 1:
            raise ModePreconditionViolated('rho must lie in (0, 1], got '
                                           '{}'.format(rho))
        if nu > mu:
            raise ModePreconditionViolated('nu = {} exceeds mu = {}'.format(
                nu, mu))
        if nu <= 0 or c_a <= 0 or c_r < 0:
            raise ModePreconditionViolated(
                'Need nu > 0, c_a > 0 and c_r >= 0; got nu={}, c_a={}, '
                'c_r={}'.format(nu, c_a, c_r))
        if depth < 1:
            raise ValueError('Depth must be positive, got {}'.format(depth))
        self.rho = rho
        self.nu = nu
        self.mu = mu
        self.c_r = c_r
        self.c_a = c_a
        self.depth = depth

    @classmethod
    def scalar(cls, weight, c_r, c_a, depth, rho=1.):
        """ Single scalar weight, so nu = mu = weight. """
        return cls(rho, weight, weight, c_r, c_a, depth)

    def __repr__(self):
        return '{}(rho={}, nu={}, mu={}, c_r={}, c_a={}, depth={})'.format(
            self.__class__.__name__, self.rho, self.nu, self.mu, self.c_r,
            self.c_a, self.depth)


class ObstructionReport:

    """ Obstruction of one node pair with its bound envelope.

    Attributes
    ----------
    pair : tuple[int, int]
        (v, u).
    mode : str
        'access' or 'symmetric'.
    per_layer : numpy.ndarray
        Terms for k = 0..m, weight products bounded by nu^{m-k}.
    per_layer_upper : numpy.ndarray
        Same terms with mu^{m-k}.
    total, total_upper : float
        Sums of the per-layer terms.
    lower, upper : float or None
        Bound envelope; `upper` is None in access mode.
    correction : float
        Size of the finite-depth correction entering `lower`.
    epsilon_g : float or None
        Spectral slack factor of the symmetric lower bound.
    lambda_star : float
        Eigenvalue with the slowest decaying correction.
    reference : float
        t(u, v) / 2|E| in access mode, Res(v, u) in symmetric mode.
    """

    def __init__(self, pair, mode, per_layer, per_layer_upper, lower, upper,
                 correction, epsilon_g, lambda_star, reference):
        self.pair = pair
        self.mode = mode
        self.per_layer = per_layer
        self.per_layer_upper = per_layer_upper
        self.lower = lower
        self.upper = upper
        self.correction = correction
        self.epsilon_g = epsilon_g
        self.lambda_star = lambda_star
        self.reference = reference

    @property
    def total(self):
        return float(np.sum(self.per_layer))

    @property
    def total_upper(self):
        return float(np.sum(self.per_layer_upper))

    def as_dict(self):
        return dict(v=int(self.pair[0]), u=int(self.pair[1]), mode=self.mode,
                    total=self.total, total_upper=self.total_upper,
                    lower=self.lower, upper=self.upper,
                    correction=self.correction, epsilon_g=self.epsilon_g,
                    lambda_star=self.lambda_star, reference=self.reference)

    def __repr__(self):
        return '{}(pair={}, mode="{}", total={:.6g})'.format(
            self.__class__.__name__, self.pair, self.mode, self.total)


class CheegerObstructionBound:

    """ Uniform bound on O~ over all pairs with its intermediate steps. """

    def __init__(self, max_resistance_bound, spectral_form, cheeger_form,
                 cheeger_constant, cheeger_is_exact):
        self.max_resistance_bound = max_resistance_bound
        self.spectral_form = spectral_form
        self.cheeger_form = cheeger_form
        self.cheeger_constant = cheeger_constant
        self.cheeger_is_exact = cheeger_is_exact

    def as_dict(self):
        return dict(max_resistance_bound=self.max_resistance_bound,
                    spectral_form=self.spectral_form,
                    cheeger_form=self.cheeger_form,
                    cheeger_constant=self.cheeger_constant,
                    cheeger_is_exact=self.cheeger_is_exact)

    def __repr__(self):
        return '{}(spectral_form={:.6g}, cheeger_form={:.6g})'.format(
            self.__class__.__name__, self.spectral_form, self.cheeger_form)


def weight_product(weights, k, m):
    """ W^{(m)} ... W^{(k+1)} for 1-based layer weights `weights[t-1]`. """
    p = np.shape(weights[0])[0]
    product = np.eye(p)
    for t in range(k + 1, m + 1):
        product = np.dot(weights[t - 1], product)
    return product


def expected_jacobian(config, product, S, m, k, v, u):
    """ rho W (S^{m-k})_{vu}, the expected d h_v^{(m)} / d h_u^{(k)}.

    Parameters
    ----------
    config : ObstructionConfig
        Supplies rho.
    product : numpy.ndarray or float
        Weight product W^{(m)} ... W^{(k+1)}.
    S : MessagePassingMatrix
        Symmetric-shift message-passing matrix.
    m, k : int
        Layers, k < m.
    v, u : int
        Target and source.

    Returns
    -------
    numpy.ndarray
    """
    if getattr(S, 'base', ShiftKind.SYMMETRIC) != ShiftKind.SYMMETRIC:
        raise ModePreconditionViolated('Expected Jacobians need the symmetric '
                                       'shift operator')
    if not 0 <= k < m:
        raise ValueError('Need 0 <= k < m, got k={}, m={}'.format(k, m))
    return config.rho * np.asarray(product, dtype=float) * \
        matrix_power_entry(S, m - k, v, u)


def _spectral_parts(config, decomp):
    eigenvalues = decomp.eigenvalues[1:]
    scaled = decomp.scaled_eigenvectors()[:, 1:]
    spectrum = config.c_r + config.c_a * (1. - eigenvalues)
    return eigenvalues, scaled, spectrum


def _layer_exponents(config):
    # m - k for k = 0..m
    return np.arange(config.depth, -1, -1)


def _check_pair(decomp, v, u):
    if v == u:
        raise SameNode('Obstruction needs distinct nodes, got {} twice'.format(
            v))


def check_access_mode(config):
    scale = config.nu * (config.c_r + config.c_a)
    if abs(scale - 1.) > MODE_TOL:
        raise ModePreconditionViolated('Access mode needs nu (c_r + c_a) = 1, '
                                       'got {}'.format(scale))


def check_symmetric_mode(config, decomp):
    scale = config.mu * (config.c_r + config.c_a)
    if scale > 1. + MODE_TOL:
        raise ModePreconditionViolated('Symmetric mode needs mu (c_r + c_a) '
                                       '<= 1, got {}'.format(scale))
    if config.c_r < config.c_a:
        raise ModePreconditionViolated('Symmetric mode needs c_r >= c_a, got '
                                       'c_r={}, c_a={}'.format(config.c_r,
                                                               config.c_a))
    if decomp.largest >= 2. - BIPARTITE_TOL:
        raise BipartiteGraph('Symmetric mode needs a non-bipartite graph '
                             '(largest eigenvalue {:.12g})'.format(
                                 decomp.largest))


def _slowest_eigenvalue(config, eigenvalues, spectrum):
    index = int(np.argmax(np.abs(config.nu * spectrum)))
    return float(eigenvalues[index]), float(abs(config.nu * spectrum[index]))


def jacobian_obstruction(config, decomp, v, u):
    """ Jacobian obstruction O(v, u) with the access-time lower bound.

        O >= (rho / nu c_a) t(u, v) / 2|E|
             - rho |1 - nu c_a lambda*|^{m+1} (n - 1) / (nu c_a lambda_1 d_min)

    Parameters
    ----------
    config : ObstructionConfig
        Must satisfy nu (c_r + c_a) = 1.
    decomp : SpectralDecomposition
        Normalized Laplacian decomposition with graph degrees.
    v, u : int
        Distinct nodes.

    Returns
    -------
    ObstructionReport

    Raises
    ------
    ModePreconditionViolated
        If nu (c_r + c_a) != 1.
    """
    check_access_mode(config)
    _check_pair(decomp, v, u)
    eigenvalues, scaled, spectrum = _spectral_parts(config, decomp)
    pair_terms = scaled[v] ** 2 - scaled[v] * scaled[u]

    exponents = _layer_exponents(config)
    sums = np.abs((spectrum[None, :] ** exponents[:, None]).dot(pair_terms))
    per_layer = config.rho * config.nu ** exponents * sums
    per_layer_upper = config.rho * config.mu ** exponents * sums

    lambda_star, decay = _slowest_eigenvalue(config, eigenvalues, spectrum)
    nu_ca = config.nu * config.c_a
    n = decomp.size
    correction = config.rho * decay ** (config.depth + 1) * (n - 1) / (
        nu_ca * decomp.spectral_gap * decomp.degrees.min())
    reference = float(np.sum(pair_terms / eigenvalues))
    lower = config.rho / nu_ca * reference - correction

    return ObstructionReport((v, u), ACCESS, per_layer, per_layer_upper,
                             float(lower), None, float(correction), None,
                             lambda_star, reference)


def symmetric_obstruction(config, decomp, v, u):
    """ Symmetric Jacobian obstruction O~(v, u) with its commute-time
    envelope

        eps_G (1 - o(m)) (rho / nu c_a) Res(v, u) <= O~
        O~ <= (rho / mu c_a) Res(v, u)

    where o(m) = max_l |nu s_l|^{m+1} and
    eps_G = lambda_1 / (lambda_1 + (1 - nu (c_r + c_a)) / (nu c_a)).

    Raises
    ------
    ModePreconditionViolated
        If mu (c_r + c_a) > 1 or c_r < c_a.
    BipartiteGraph
        If the largest Laplacian eigenvalue is 2.
    """
    check_symmetric_mode(config, decomp)
    _check_pair(decomp, v, u)
    eigenvalues, scaled, spectrum = _spectral_parts(config, decomp)
    pair_terms = (scaled[v] - scaled[u]) ** 2

    exponents = _layer_exponents(config)
    sums = (spectrum[None, :] ** exponents[:, None]).dot(pair_terms)
    per_layer = config.rho * config.nu ** exponents * sums
    per_layer_upper = config.rho * config.mu ** exponents * sums

    lambda_star, decay = _slowest_eigenvalue(config, eigenvalues, spectrum)
    tail = decay ** (config.depth + 1)
    lambda_1 = decomp.spectral_gap
    slack = (1. - config.nu * (config.c_r + config.c_a)) / (config.nu *
                                                            config.c_a)
    epsilon_g = lambda_1 / (lambda_1 + slack)

    resistance = float(np.sum(pair_terms / eigenvalues))
    lower = epsilon_g * (1. - tail) * config.rho / (config.nu * config.c_a) * \
        resistance
    upper = config.rho / (config.mu * config.c_a) * resistance

    return ObstructionReport((v, u), SYMMETRIC, per_layer, per_layer_upper,
                             float(lower), float(upper), float(tail),
                             float(epsilon_g), lambda_star, resistance)


def access_obstruction_matrix(config, decomp):
    """ O(v, u) for all ordered pairs, zero on the diagonal. """
    n = decomp.size
    result = np.zeros((n, n))
    for v in range(n):
        for u in range(n):
            if v != u:
                result[v, u] = jacobian_obstruction(config, decomp, v, u).total
    return result


def symmetric_obstruction_matrix(config, decomp):
    """ O~(v, u) for all pairs, zero on the diagonal. """
    n = decomp.size
    result = np.zeros((n, n))
    for v, u in metrics.node_pairs(n):
        result[v, u] = result[u, v] = symmetric_obstruction(config, decomp, v,
                                                            u).total
    return result


def cheeger_obstruction_bound(config, decomp, graph=None):
    """ Uniform upper bound on O~ over all node pairs.

    Follows O~ <= (rho / mu c_a) Res <= (rho / mu c_a) 2 / lambda_1
    <= (rho / mu c_a) 4 / h^2. The exact Cheeger constant is used when
    `graph` is given and small enough, otherwise h >= lambda_1 / 2.

    Returns
    -------
    CheegerObstructionBound
    """
    check_symmetric_mode(config, decomp)
    scale = config.rho / (config.mu * config.c_a)
    lambda_1 = decomp.spectral_gap

    exact = graph is not None and \
        graph.num_nodes <= metrics.EXACT_CHEEGER_MAX_NODES
    if exact:
        cheeger = metrics.cheeger_exact(graph)
    else:
        cheeger = metrics.cheeger_bounds(lambda_1)[0]

    return CheegerObstructionBound(
        max_resistance_bound=2. / lambda_1,
        spectral_form=scale * 2. / lambda_1,
        cheeger_form=scale * 4. / cheeger ** 2,
        cheeger_constant=cheeger,
        cheeger_is_exact=exact)
