""" Upper bounds on Jacobian sensitivity and on loss gradients.

All Jacobian bounds control `JacobianBlock.l1_norm`.
"""
import numpy as np

from oversquash.exceptions import DistanceMismatch, \
    ModePreconditionViolated
from oversquash.graph.core import ShiftKind, bfs_distances, \
    matrix_power_entry, shift_operator, walk_count
from oversquash.sensitivity.mpnn import mpnn_forward


def _check_matching(model, S):
    config = model.config
    for name in ('c_r', 'c_a'):
        if hasattr(S, name) and not np.isclose(getattr(S, name),
                                               getattr(config, name)):
            raise ValueError('Message-passing matrix {} differs from the '
                             'model'.format(name))
    if hasattr(S, 'base') and S.base != config.shift:
        raise ValueError('Message-passing matrix uses shift "{}", model uses '
                         '"{}"'.format(S.base, config.shift))


def bound_sensitivity(model, S, m, v, u):
    """ (c_sigma w p)^m (S^m)_{vu}.

    Parameters
    ----------
    model : MpnnModel
        Network supplying c_sigma, w and p.
    S : MessagePassingMatrix
        Built with the model's c_r, c_a and shift.
    m : int
        Number of layers between input and output.
    v, u : int
        Target and source.

    Returns
    -------
    float
    """
    _check_matching(model, S)
    factor = model.c_sigma * model.max_entry * model.config.width
    return factor ** m * matrix_power_entry(S, m, v, u)


def regularity_constants(model):
    """ Constants (c_up, c_rs, c_mp) of the general bound for `model`.

    c_up = c_sigma, c_rs = c_r max_t ||W_r^{(t)}||_1 and
    c_mp = c_a max_t ||W_a^{(t)}||_1, with ||.||_1 the largest absolute
    column sum.
    """
    config = model.config

    def column_norm(weights):
        return max(float(np.abs(w).sum(axis=0).max()) for w in weights)

    return (model.c_sigma,
            config.c_r * column_norm(model.residual_weights),
            config.c_a * column_norm(model.aggregate_weights))


def bound_general(c_up, c_rs, c_mp, shift, m, v, u, p):
    """ p c_up^m ((c_rs I + c_mp A)^m)_{vu} for any regular MPNN.

    Returns
    -------
    float
    """
    for name, value in (('c_up', c_up), ('c_rs', c_rs), ('c_mp', c_mp)):
        if value < 0:
            raise ValueError('{} must be non-negative, got {}'.format(name,
                                                                     value))
    shift = np.asarray(shift, dtype=float)
    operator = c_rs * np.eye(shift.shape[0]) + c_mp * shift
    return p * c_up ** m * matrix_power_entry(operator, m, v, u)


def bound_general_for_model(model, graph, m, v, u):
    c_up, c_rs, c_mp = regularity_constants(model)
    shift = shift_operator(graph, model.config.shift)
    return bound_general(c_up, c_rs, c_mp, shift, m, v, u, model.config.width)


def distant_constant(model, k):
    """ C_k = (c_sigma (c_r + c_a) w p (k + 1))^k. """
    config = model.config
    return (model.c_sigma * (config.c_r + config.c_a) * model.max_entry *
            config.width * (k + 1)) ** k


def bound_distant(model, graph, v, u, r, k):
    """ Bound on d h_v^{(r+k)} / d h_u^{(0)} for nodes at distance r.

        gamma_{r+k}(v, u) C_k (2 c_sigma w p c_a / d_min)^r

    Parameters
    ----------
    model : MpnnModel
        Network with a normalized shift operator.
    graph : Graph
        Input graph.
    v, u : int
        Target and source.
    r : int
        Distance between v and u.
    k : int
        Extra layers, 0 <= k < r.

    Returns
    -------
    float

    Raises
    ------
    DistanceMismatch
        If d_G(v, u) != r.
    ModePreconditionViolated
        For the unnormalized adjacency or c_a > 1.
    """
    config = model.config
    distance = int(bfs_distances(graph, v)[u])
    if distance != r:
        raise DistanceMismatch('d_G({}, {}) = {}, not {}'.format(v, u,
                                                                distance, r))
    if not 0 <= k < r:
        raise ValueError('Need 0 <= k < r, got k={}, r={}'.format(k, r))
    if config.shift == ShiftKind.ADJACENCY:
        raise ModePreconditionViolated('Distant-node bound needs a normalized '
                                       'shift operator')
    if config.c_a > 1:
        raise ModePreconditionViolated('Distant-node bound needs c_a <= 1, '
                                       'got {}'.format(config.c_a))

    walks = walk_count(graph, v, u, r + k)
    decay = 2. * model.c_sigma * model.max_entry * config.width * \
        config.c_a / graph.min_degree
    return walks * distant_constant(model, k) * decay ** r


def contraction_factor(model):
    """ q = c_sigma mu (c_r + c_a). """
    config = model.config
    return model.c_sigma * model.max_spectral_norm * (config.c_r + config.c_a)


def feature_norm_bound(model, h0_norm, m):
    """ ||H^{(m)}||_F <= q^m ||H^{(0)}||_F, symmetric shift and
    sigma(0) = 0.
    """
    return contraction_factor(model) ** m * h0_norm


def bound_vanishing(model, k, m, h0_norm, target_norm=0., constant=1.,
                    num_nodes=1):
    """ C q^{m-k} (1 + q^m), q = c_sigma mu (c_r + c_a).

    C is `constant * num_nodes * p * max(||H0||_F, ||Y||_F)`; see
    `bound_vanishing_explicit` for a `constant` derived from the forward
    pass and `fit_vanishing_constant` for one measured from gradients.

    Returns
    -------
    float
    """
    q = contraction_factor(model)
    scale = constant * num_nodes * model.config.width * max(h0_norm,
                                                            target_norm)
    return scale * q ** (m - k) * (1. + q ** m)


def theta_constant(model, graph, state, layer, which):
    """ Largest |d h_u^{(k), beta} / d theta| over nodes for a weight in
    layer k: c_sigma c_r max |h^{(k-1)}| for residual weights and
    c_sigma c_a max |A_hat h^{(k-1)}| for aggregation weights.
    """
    config = model.config
    previous = state.features[layer - 1]
    if which == 'residual':
        return model.c_sigma * config.c_r * float(np.abs(previous).max())
    elif which == 'aggregate':
        shift = shift_operator(graph, config.shift)
        return model.c_sigma * config.c_a * float(
            np.abs(shift.dot(previous)).max())
    raise ValueError('Unknown weight kind: {}'.format(which))


def bound_vanishing_explicit(model, graph, H0, targets, layer, m=None,
                             state=None):
    """ Bound on |dL/dtheta| for any weight of `layer` with all factors
    explicit:

        C_theta n p (q^m ||H0||_F + ||Y||_F) q^{m-k}

    with C_theta the larger of the residual and aggregation constants.

    Raises
    ------
    ModePreconditionViolated
        Unless the shift is symmetric and sigma(0) = 0.
    """
    config = model.config
    if config.shift != ShiftKind.SYMMETRIC:
        raise ModePreconditionViolated('Explicit vanishing bound needs the '
                                       'symmetric shift operator')
    m = config.depth if m is None else m
    if state is None:
        state = mpnn_forward(model, graph, H0)
    c_theta = max(theta_constant(model, graph, state, layer, which)
                  for which in ('residual', 'aggregate'))
    q = contraction_factor(model)
    return c_theta * graph.num_nodes * config.width * \
        (q ** m * np.linalg.norm(H0) + np.linalg.norm(targets)) * \
        q ** (m - layer)


def fit_vanishing_constant(model, k, depths, gradient_norms):
    """ Smallest C with |dL/dtheta| <= C q^{m-k} (1 + q^m) on the given
    measurements.
    """
    q = contraction_factor(model)
    ratios = [g / (q ** (m - k) * (1. + q ** m))
              for m, g in zip(depths, gradient_norms)]
    return float(max(ratios))

