""" Message-passing networks of the form

    h_v^{(t+1)} = sigma(c_r W_r^{(t)} h_v^{(t)}
                        + c_a W_a^{(t)} sum_u A_hat_{vu} h_u^{(t)})

with exact Jacobians and hand-written backpropagation.

Features are stored as n x p matrices with one row per node, so a layer
reads Z = c_r H W_r^T + c_a (A_hat H) W_a^T. The layer helpers accept
any number of leading batch dimensions.
"""
import warnings

import numpy as np

from oversquash.exceptions import KinkProximityWarning, NegativeCoefficient, \
    ShapeMismatch
from oversquash.graph.core import ShiftKind, shift_operator

KINK_TOL = 1e-7
DEFAULT_WEIGHT_SCALE = .5


class Nonlinearity:

    RELU = 'relu'
    TANH = 'tanh'
    IDENTITY = 'identity'

    ALL = (RELU, TANH, IDENTITY)


def activate(kind, z):
    if kind == Nonlinearity.RELU:
        return np.maximum(z, 0.)
    elif kind == Nonlinearity.TANH:
        return np.tanh(z)
    elif kind == Nonlinearity.IDENTITY:
        return np.array(z, dtype=float)
    raise ValueError('Unknown nonlinearity: {}'.format(kind))


def derivative(kind, z):
    """ sigma'(z); the ReLU derivative at 0 is 0. """
    if kind == Nonlinearity.RELU:
        return (z > 0).astype(float)
    elif kind == Nonlinearity.TANH:
        return 1. - np.tanh(z) ** 2
    elif kind == Nonlinearity.IDENTITY:
        return np.ones_like(z, dtype=float)
    raise ValueError('Unknown nonlinearity: {}'.format(kind))


def lipschitz_constant(kind):
    if kind not in Nonlinearity.ALL:
        raise ValueError('Unknown nonlinearity: {}'.format(kind))
    return 1.


class MpnnConfig:

    """ Architecture of a message-passing network.

    Parameters
    ----------
    width : int
        Feature width p.
    depth : int
        Number of layers m.
    c_r, c_a : float
        Residual and aggregation coefficients.
    shift : str
        Shift operator kind, see `ShiftKind`.
    nonlinearity : str
        See `Nonlinearity`.
    weight_scale : float
        Random weights are drawn uniform in [-weight_scale, weight_scale].
    """

    def __init__(self, width, depth, c_r=1., c_a=1., shift=ShiftKind.SYMMETRIC,
                 nonlinearity=Nonlinearity.RELU,
                 weight_scale=DEFAULT_WEIGHT_SCALE):
        if width < 1 or depth < 1:
            raise ValueError('Width and depth must be positive, got {} and '
                             '{}'.format(width, depth))
        for name, value in (('c_r', c_r), ('c_a', c_a)):
            if value < 0:
                raise NegativeCoefficient(
                    '{} must be non-negative, got {}'.format(name, value))
        if shift not in ShiftKind.ALL:
            raise ValueError('Unknown shift operator: {}'.format(shift))
        if nonlinearity not in Nonlinearity.ALL:
            raise ValueError('Unknown nonlinearity: {}'.format(nonlinearity))

        self.width = width
        self.depth = depth
        self.c_r = c_r
        self.c_a = c_a
        self.shift = shift
        self.nonlinearity = nonlinearity
        self.weight_scale = weight_scale

    @property
    def residual_dominates(self):
        """ c_r >= c_a, needed for the symmetric obstruction results. """
        return self.c_r >= self.c_a

    def __repr__(self):
        return ('{}(width={}, depth={}, c_r={}, c_a={}, shift="{}", '
                'nonlinearity="{}")').format(self.__class__.__name__,
                                             self.width, self.depth, self.c_r,
                                             self.c_a, self.shift,
                                             self.nonlinearity)


class MpnnModel:

    """ Weights of a message-passing network.

    `residual_weights[t]` and `aggregate_weights[t]` map H^{(t)} to
    H^{(t+1)}. Regularity constants are derived from the current weights
    every time they are read.
    """

    def __init__(self, config, residual_weights, aggregate_weights):
        p = config.width
        for name, weights in (('residual', residual_weights),
                              ('aggregate', aggregate_weights)):
            if len(weights) != config.depth:
                raise ShapeMismatch('Expected {} {} weight matrices, got '
                                    '{}'.format(config.depth, name,
                                                len(weights)))
            for w in weights:
                if np.shape(w) != (p, p):
                    raise ShapeMismatch('{} weight has shape {}, expected '
                                        '({}, {})'.format(name, np.shape(w),
                                                          p, p))
        self.config = config
        self.residual_weights = [np.array(w, dtype=float)
                                 for w in residual_weights]
        self.aggregate_weights = [np.array(w, dtype=float)
                                  for w in aggregate_weights]

    @classmethod
    def random(cls, config, seed):
        """ Weights uniform in [-weight_scale, weight_scale]. """
        rng = np.random.default_rng(seed)
        scale = config.weight_scale
        shape = (config.depth, config.width, config.width)
        return cls(config, list(rng.uniform(-scale, scale, size=shape)),
                   list(rng.uniform(-scale, scale, size=shape)))

    @classmethod
    def scaled_orthogonal(cls, config, mu, seed):
        """ Every weight matrix is mu times a random orthogonal matrix, so
        all singular values equal mu.
        """
        rng = np.random.default_rng(seed)

        def draw():
            q, r = np.linalg.qr(rng.normal(size=(config.width, config.width)))
            return mu * q * np.sign(np.diag(r))

        return cls(config, [draw() for _ in range(config.depth)],
                   [draw() for _ in range(config.depth)])

    @property
    def all_weights(self):
        return self.residual_weights + self.aggregate_weights

    @property
    def c_sigma(self):
        return lipschitz_constant(self.config.nonlinearity)

    @property
    def max_entry(self):
        """ w, the largest absolute weight entry. """
        return float(max(np.abs(w).max() for w in self.all_weights))

    @property
    def max_spectral_norm(self):
        """ mu, the largest spectral norm over all weights. """
        return float(max(np.linalg.norm(w, 2) for w in self.all_weights))

    @property
    def min_singular_value(self):
        """ nu, the smallest singular value over all weights. """
        return float(min(np.linalg.svd(w, compute_uv=False).min()
                         for w in self.all_weights))

    def __repr__(self):
        return '{}({!r})'.format(self.__class__.__name__, self.config)


class FeatureState:

    """ Node features of every layer, plus the pre-activations.

    `features[t]` is H^{(t)} for t = 0..m, `pre_activations[t]` the
    input Z of sigma producing H^{(t+1)}.
    """

    def __init__(self, features, pre_activations):
        self.features = features
        self.pre_activations = pre_activations

    @property
    def output(self):
        return self.features[-1]

    def __repr__(self):
        return '{}(layers={}, shape={})'.format(
            self.__class__.__name__, len(self.features) - 1,
            self.features[0].shape)


class JacobianBlock:

    """ d h_v^{(m)} / d h_u^{(k)} as a p x p matrix.

    `l1_norm` is the induced l1 norm (largest absolute column sum), the
    norm the sensitivity bounds control per input coordinate.
    `entrywise_l1` is the plain sum of absolute entries.
    """

    def __init__(self, target, source, k, m, matrix):
        self.target = target
        self.source = source
        self.k = k
        self.m = m
        self.matrix = matrix

    @property
    def l1_norm(self):
        return float(np.abs(self.matrix).sum(axis=0).max())

    @property
    def entrywise_l1(self):
        return float(np.abs(self.matrix).sum())

    def __repr__(self):
        return '{}(v={}, u={}, k={}, m={}, l1={:.4g})'.format(
            self.__class__.__name__, self.target, self.source, self.k, self.m,
            self.l1_norm)


def layer_forward(features, shift, residual, aggregate, c_r, c_a,
                  nonlinearity):
    """ One message-passing layer.

    Parameters
    ----------
    features : numpy.ndarray
        (..., n, p) input.
    shift : numpy.ndarray
        n x n shift operator.
    residual, aggregate : numpy.ndarray
        p_out x p_in weights.
    c_r, c_a : float
        Coefficients.
    nonlinearity : str
        Activation.

    Returns
    -------
    numpy.ndarray, numpy.ndarray
        Pre-activation Z and output sigma(Z).
    """
    messages = np.matmul(shift, features)
    z = c_r * np.matmul(features, residual.T) + \
        c_a * np.matmul(messages, aggregate.T)
    return z, activate(nonlinearity, z)


def layer_backward(grad_output, features, z, shift, residual, aggregate,
                   c_r, c_a, nonlinearity):
    """ Reverse pass through `layer_forward`.

    Parameters
    ----------
    grad_output : numpy.ndarray
        dL/dH^{(t+1)}, same shape as the layer output.
    features, z : numpy.ndarray
        Layer input H^{(t)} and pre-activation from the forward pass.

    Returns
    -------
    numpy.ndarray, numpy.ndarray, numpy.ndarray
        dL/dH^{(t)}, dL/dW_r, dL/dW_a (summed over batch dimensions).
    """
    grad_z = grad_output * derivative(nonlinearity, z)
    messages = np.matmul(shift, features)

    flat_grad_z = grad_z.reshape(-1, grad_z.shape[-1])
    grad_residual = c_r * np.einsum(
        'vi,vj->ij', flat_grad_z, features.reshape(-1, features.shape[-1]))
    grad_aggregate = c_a * np.einsum(
        'vi,vj->ij', flat_grad_z, messages.reshape(-1, messages.shape[-1]))
    grad_features = c_r * np.matmul(grad_z, residual) + \
        c_a * np.matmul(shift.T, np.matmul(grad_z, aggregate))
    return grad_features, grad_residual, grad_aggregate


def _check_features(model, graph, features):
    features = np.asarray(features, dtype=float)
    expected = (graph.num_nodes, model.config.width)
    if features.shape != expected:
        raise ShapeMismatch('Features have shape {}, expected {}'.format(
            features.shape, expected))
    return features


def forward_from(model, graph, features, start, stop, shift=None):
    """ Run layers start..stop-1 from H^{(start)}; returns H^{(stop)}. """
    config = model.config
    if shift is None:
        shift = shift_operator(graph, config.shift)
    for t in range(start, stop):
        _, features = layer_forward(features, shift,
                                    model.residual_weights[t],
                                    model.aggregate_weights[t], config.c_r,
                                    config.c_a, config.nonlinearity)
    return features


def mpnn_forward(model, graph, H0):
    """ Forward pass storing every intermediate state.

    Parameters
    ----------
    model : MpnnModel
        Network.
    graph : Graph
        Input graph.
    H0 : numpy.ndarray
        n x p input features.

    Returns
    -------
    FeatureState

    Raises
    ------
    ShapeMismatch
        If H0 is not n x p.
    """
    config = model.config
    features = _check_features(model, graph, H0)
    shift = shift_operator(graph, config.shift)

    states, pre_activations = [features], list()
    for t in range(config.depth):
        z, features = layer_forward(features, shift,
                                    model.residual_weights[t],
                                    model.aggregate_weights[t], config.c_r,
                                    config.c_a, config.nonlinearity)
        pre_activations.append(z)
        states.append(features)
    return FeatureState(states, pre_activations)


def near_kinks(model, state, start=0, stop=None, tol=KINK_TOL):
    """ True if a ReLU pre-activation of layers start..stop-1 is within
    `tol` of zero.
    """
    if model.config.nonlinearity != Nonlinearity.RELU:
        return False
    stop = model.config.depth if stop is None else stop
    return any(np.abs(z).min() < tol
               for z in state.pre_activations[start:stop])


def sample_kink_free_input(model, graph, seed, max_tries=100, tol=KINK_TOL):
    """ Gaussian input features with no ReLU pre-activation near zero.

    Raises
    ------
    RuntimeError
        If no kink-free draw is found.
    """
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        H0 = rng.normal(size=(graph.num_nodes, model.config.width))
        if not near_kinks(model, mpnn_forward(model, graph, H0), tol=tol):
            return H0
    raise RuntimeError('No kink-free input in {} draws'.format(max_tries))


def _check_layers(model, k, m):
    m = model.config.depth if m is None else m
    if not 0 <= k <= m <= model.config.depth:
        raise ValueError('Need 0 <= k <= m <= {}, got k={}, m={}'.format(
            model.config.depth, k, m))
    return m


def jacobian_exact(model, graph, H0, v, u, k=0, m=None):
    """ Exact d h_v^{(m)} / d h_u^{(k)} by forward-mode chain rule.

    The sensitivities G_w = d h_w^{(t)} / d h_u^{(k)} of all nodes are
    propagated layer by layer:

        G^{(t+1)} = sigma'(Z^{(t)}) * (c_r W_r G^{(t)} + c_a W_a A_hat G^{(t)})

    starting from G_w^{(k)} = delta_{wu} I.

    Parameters
    ----------
    model : MpnnModel
        Network.
    graph : Graph
        Input graph.
    H0 : numpy.ndarray
        n x p input features.
    v, u : int
        Target and source nodes.
    k, m : int
        Source and target layers, 0 <= k <= m <= depth.

    Returns
    -------
    JacobianBlock

    Warns
    -----
    KinkProximityWarning
        If a ReLU pre-activation of layers k..m-1 is within 1e-7 of zero.
    """
    m = _check_layers(model, k, m)
    config = model.config
    state = mpnn_forward(model, graph, H0)
    if near_kinks(model, state, k, m):
        warnings.warn('ReLU pre-activation within {} of zero, derivative is '
                      'ill-posed'.format(KINK_TOL), KinkProximityWarning)

    shift = shift_operator(graph, config.shift)
    p = config.width
    sensitivities = np.zeros((graph.num_nodes, p, p))
    sensitivities[u] = np.eye(p)

    for t in range(k, m):
        spread = np.einsum('vw,wjb->vjb', shift, sensitivities)
        inner = config.c_r * np.einsum('ij,vjb->vib',
                                       model.residual_weights[t],
                                       sensitivities) + \
            config.c_a * np.einsum('ij,vjb->vib', model.aggregate_weights[t],
                                   spread)
        gate = derivative(config.nonlinearity, state.pre_activations[t])
        sensitivities = gate[:, :, None] * inner

    return JacobianBlock(v, u, k, m, sensitivities[v])


def jacobian_fd_oracle(model, graph, H0, v, u, step=1e-6, k=0, m=None):
    """ d h_v^{(m)} / d h_u^{(k)} by central finite differences.

    Each input coordinate of h_u^{(k)} is perturbed by +-step and layers
    k..m-1 are rerun.

    Returns
    -------
    JacobianBlock
    """
    if step <= 0:
        raise ValueError('Step must be positive, got {}'.format(step))
    m = _check_layers(model, k, m)
    H0 = _check_features(model, graph, H0)
    shift = shift_operator(graph, model.config.shift)
    base = forward_from(model, graph, H0, 0, k, shift)

    p = model.config.width
    matrix = np.zeros((p, p))
    for beta in range(p):
        plus, minus = base.copy(), base.copy()
        plus[u, beta] += step
        minus[u, beta] -= step
        out_plus = forward_from(model, graph, plus, k, m, shift)
        out_minus = forward_from(model, graph, minus, k, m, shift)
        matrix[:, beta] = (out_plus[v] - out_minus[v]) / (2. * step)
    return JacobianBlock(v, u, k, m, matrix)


def quadratic_loss(output, targets):
    return .5 * float(np.sum((output - targets) ** 2))


def loss_gradients(model, graph, H0, targets):
    """ Quadratic loss 1/2 sum_v ||h_v^{(m)} - y_v||^2 and its gradients.

    Returns
    -------
    float, list[numpy.ndarray], list[numpy.ndarray]
        Loss, then dL/dW_r^{(t)} and dL/dW_a^{(t)} for t = 0..m-1.

    Raises
    ------
    ShapeMismatch
        If features or targets are not n x p.
    """
    config = model.config
    targets = _check_features(model, graph, targets)
    state = mpnn_forward(model, graph, H0)
    shift = shift_operator(graph, config.shift)

    grad = state.output - targets
    grads_residual = [None] * config.depth
    grads_aggregate = [None] * config.depth
    for t in reversed(range(config.depth)):
        grad, grads_residual[t], grads_aggregate[t] = layer_backward(
            grad, state.features[t], state.pre_activations[t], shift,
            model.residual_weights[t], model.aggregate_weights[t], config.c_r,
            config.c_a, config.nonlinearity)

    return quadratic_loss(state.output, targets), grads_residual, \
        grads_aggregate


def loss_gradient(model, graph, H0, targets, layer, weight_index):
    """ Derivative of the quadratic loss with respect to a single weight.

    Parameters
    ----------
    layer : int
        Layer k in 1..m; its weights produce H^{(k)}.
    weight_index : tuple
        ('residual' | 'aggregate', row, column).

    Returns
    -------
    float
    """
    if not 1 <= layer <= model.config.depth:
        raise ValueError('Layer must be in [1, {}], got {}'.format(
            model.config.depth, layer))
    which, row, col = weight_index
    _, grads_residual, grads_aggregate = loss_gradients(model, graph, H0,
                                                        targets)
    if which == 'residual':
        return float(grads_residual[layer - 1][row, col])
    elif which == 'aggregate':
        return float(grads_aggregate[layer - 1][row, col])
    raise ValueError('Unknown weight kind: {}'.format(which))
