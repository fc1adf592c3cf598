""" Graph-transfer tasks: dataset generation, training and evaluation.

A transfer graph has a source and a target node at distance r. The
target carries a random one-hot vector, the source zeros and every other
node ones; a network of depth r must reproduce the one-hot vector at the
source. Loss and accuracy only look at the source node.

The network is a linear encoder, r message-passing layers with ReLU and
c_r = c_a = 1, and a linear decoder read at the source. GCN, SAGE and
GIN differ in their shift operator only.
"""
import collections
import logging

import numpy as np

from oversquash.exceptions import DivergedLoss, InvalidDistance
from oversquash.graph.core import ShiftKind, shift_operator
from oversquash.graph.topologies import TRANSFER_KINDS, make_topology
from oversquash.sensitivity.mpnn import MpnnConfig, MpnnModel, Nonlinearity, \
    layer_backward, layer_forward

GCN = 'gcn'
SAGE = 'sage'
GIN = 'gin'

MODEL_SHIFTS = {GCN: ShiftKind.SYMMETRIC,
                SAGE: ShiftKind.RANDOM_WALK,
                GIN: ShiftKind.ADJACENCY}
MODEL_KINDS = (GCN, SAGE, GIN)

DEFAULT_WIDTH = 5
DEFAULT_N_TRAIN = 500
DEFAULT_N_TEST = 100
FULL_N_TRAIN = 5000
FULL_N_TEST = 500
DEFAULT_HIDDEN = 64
DEFAULT_EPOCHS = 100
DEFAULT_LR = 1e-3

TransferSample = collections.namedtuple(
    'TransferSample', ['graph', 'features', 'target', 'source_mask'])


class TransferDataset:

    """ Train and test samples of one transfer task.

    All samples share the task graph; they differ in the target's one-hot
    vector.

    Attributes
    ----------
    task : str
        'ring', 'crossed_ring' or 'clique_path'.
    r : int
        Source-target distance.
    width : int
        Input feature width p.
    seed : int
        Generation seed.
    graph : Graph
        Task graph.
    topology : TransferTopology
        Source and target nodes.
    train, test : list[TransferSample]
    """

    def __init__(self, task, r, width, seed, graph, topology, train, test):
        self.task = task
        self.r = r
        self.width = width
        self.seed = seed
        self.graph = graph
        self.topology = topology
        self.train = train
        self.test = test

    def stacked(self, split):
        """ Batch features (B x n x p) and label indices (B,) of a split. """
        samples = self.train if split == 'train' else self.test
        features = np.stack([s.features for s in samples])
        labels = np.array([int(np.argmax(s.target)) for s in samples])
        return features, labels

    def __repr__(self):
        return '{}(task="{}", r={}, train={}, test={})'.format(
            self.__class__.__name__, self.task, self.r, len(self.train),
            len(self.test))


def _sample(graph, topology, width, label):
    features = np.ones((graph.num_nodes, width))
    features[topology.source] = 0.
    target = np.zeros(width)
    target[label] = 1.
    features[topology.target] = target
    mask = np.zeros(graph.num_nodes, dtype=bool)
    mask[topology.source] = True
    return TransferSample(graph, features, target, mask)


def generate_transfer(task, r, n_train=DEFAULT_N_TRAIN, n_test=DEFAULT_N_TEST,
                      width=DEFAULT_WIDTH, seed=0):
    """ Reproducible graph-transfer dataset.

    Parameters
    ----------
    task : str
        One of `TRANSFER_KINDS`.
    r : int
        Source-target distance, >= 3.
    n_train, n_test : int
        Number of samples per split.
    width : int
        Feature width p >= 2.
    seed : int
        Seed of the one-hot labels.

    Returns
    -------
    TransferDataset

    Raises
    ------
    InvalidDistance
        If r < 3.
    """
    if task not in TRANSFER_KINDS:
        raise ValueError('Unknown transfer task: {}'.format(task))
    if r < 3:
        raise InvalidDistance('Transfer tasks need r >= 3, got {}'.format(r))
    if width < 2:
        raise ValueError('Feature width must be at least 2, got {}'.format(
            width))
    graph, topology = make_topology(task, r)
    rng = np.random.default_rng(seed)
    labels = rng.integers(width, size=n_train + n_test)
    samples = [_sample(graph, topology, width, int(label))
               for label in labels]
    return TransferDataset(task, r, width, seed, graph, topology,
                           samples[:n_train], samples[n_train:])


class TransferNetwork:

    """ Encoder, message-passing layers and source-node decoder.

    Parameters
    ----------
    kind : str
        'gcn', 'sage' or 'gin'.
    width : int
        Input and output width p.
    hidden : int
        Hidden width.
    depth : int
        Number of message-passing layers.
    seed : int
        Initialization seed.
    """

    def __init__(self, kind, width, hidden, depth, seed=0):
        if kind not in MODEL_KINDS:
            raise ValueError('Unknown model kind: {}'.format(kind))
        rng = np.random.default_rng(seed)
        self.kind = kind
        config = MpnnConfig(hidden, depth, c_r=1., c_a=1.,
                            shift=MODEL_SHIFTS[kind],
                            nonlinearity=Nonlinearity.RELU,
                            weight_scale=1. / np.sqrt(hidden))
        self.mpnn = MpnnModel.random(config, int(rng.integers(2 ** 32)))
        self.encoder = rng.uniform(-1., 1., size=(hidden, width)) / \
            np.sqrt(width)
        self.encoder_bias = np.zeros(hidden)
        self.decoder = rng.uniform(-1., 1., size=(width, hidden)) / \
            np.sqrt(hidden)
        self.decoder_bias = np.zeros(width)

    @property
    def parameters(self):
        return [self.encoder, self.encoder_bias] + \
            self.mpnn.residual_weights + self.mpnn.aggregate_weights + \
            [self.decoder, self.decoder_bias]

    def forward(self, shift, features, source):
        """ Source-node outputs (B x p) and the cache for `backward`. """
        config = self.mpnn.config
        states = [np.matmul(features, self.encoder.T) + self.encoder_bias]
        pre_activations = list()
        for t in range(config.depth):
            z, out = layer_forward(states[-1], shift,
                                   self.mpnn.residual_weights[t],
                                   self.mpnn.aggregate_weights[t], config.c_r,
                                   config.c_a, config.nonlinearity)
            pre_activations.append(z)
            states.append(out)
        output = states[-1][:, source].dot(self.decoder.T) + \
            self.decoder_bias
        return output, (features, states, pre_activations)

    def backward(self, shift, source, grad_output, cache):
        """ Gradients of all parameters, in `parameters` order. """
        features, states, pre_activations = cache
        config = self.mpnn.config

        grad_decoder = grad_output.T.dot(states[-1][:, source])
        grad_decoder_bias = grad_output.sum(axis=0)
        grad = np.zeros_like(states[-1])
        grad[:, source] = grad_output.dot(self.decoder)

        grads_residual = [None] * config.depth
        grads_aggregate = [None] * config.depth
        for t in reversed(range(config.depth)):
            grad, grads_residual[t], grads_aggregate[t] = layer_backward(
                grad, states[t], pre_activations[t], shift,
                self.mpnn.residual_weights[t], self.mpnn.aggregate_weights[t],
                config.c_r, config.c_a, config.nonlinearity)

        grad_encoder = np.einsum('bvi,bvj->ij', grad, features)
        grad_encoder_bias = grad.sum(axis=(0, 1))
        return [grad_encoder, grad_encoder_bias] + grads_residual + \
            grads_aggregate + [grad_decoder, grad_decoder_bias]

    def predict(self, shift, features, source):
        return np.argmax(self.forward(shift, features, source)[0], axis=1)

    def __repr__(self):
        return '{}(kind="{}", {!r})'.format(self.__class__.__name__,
                                            self.kind, self.mpnn.config)


class Adam:

    """ Gradient descent with per-parameter scaling by running first and
    second moment estimates. Parameters are updated in place.
    """

    def __init__(self, parameters, lr=DEFAULT_LR, beta1=.9, beta2=.999,
                 eps=1e-8):
        self.parameters = parameters
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.steps = 0
        self.first = [np.zeros_like(p) for p in parameters]
        self.second = [np.zeros_like(p) for p in parameters]

    def step(self, grads):
        self.steps += 1
        correction1 = 1. - self.beta1 ** self.steps
        correction2 = 1. - self.beta2 ** self.steps
        for param, grad, first, second in zip(self.parameters, grads,
                                              self.first, self.second):
            first *= self.beta1
            first += (1. - self.beta1) * grad
            second *= self.beta2
            second += (1. - self.beta2) * grad ** 2
            param -= self.lr * (first / correction1) / \
                (np.sqrt(second / correction2) + self.eps)


def masked_loss(output, labels):
    """ Quadratic loss at the source node against one-hot labels, averaged
    over the batch. Returns the loss and its gradient w.r.t. `output`.
    """
    targets = np.zeros_like(output)
    targets[np.arange(len(labels)), labels] = 1.
    diff = output - targets
    batch = len(labels)
    return .5 * float(np.sum(diff ** 2)) / batch, diff / batch


class TrainOutcome:

    """ Result of one training run.

    `accuracy` is None when training stopped on a diverging loss;
    `network` holds the trained parameters.
    """

    def __init__(self, kind, task, r, hidden, seed, losses, accuracy,
                 network=None):
        self.kind = kind
        self.task = task
        self.r = r
        self.hidden = hidden
        self.seed = seed
        self.losses = losses
        self.accuracy = accuracy
        self.network = network

    @property
    def epochs(self):
        return len(self.losses)

    def as_dict(self):
        return dict(kind=self.kind, task=self.task, r=self.r,
                    hidden=self.hidden, seed=self.seed, epochs=self.epochs,
                    losses=list(self.losses), accuracy=self.accuracy)

    def __repr__(self):
        return '{}(kind="{}", task="{}", r={}, hidden={}, accuracy={})'.format(
            self.__class__.__name__, self.kind, self.task, self.r,
            self.hidden, self.accuracy)


def evaluate_transfer(network, dataset, split='test'):
    """ Fraction of samples whose source output argmax hits the label. """
    shift = _shift(network, dataset)
    features, labels = dataset.stacked(split)
    if not len(labels):
        raise ValueError('Split "{}" is empty'.format(split))
    predictions = network.predict(shift, features, dataset.topology.source)
    return float(np.mean(predictions == labels))


def _shift(network, dataset):
    return shift_operator(dataset.graph, network.mpnn.config.shift)


def train_transfer(kind, dataset, epochs=DEFAULT_EPOCHS, hidden=DEFAULT_HIDDEN,
                   lr=DEFAULT_LR, seed=0, batch_size=None):
    """ Train a network of depth r on a transfer dataset.

    Parameters
    ----------
    kind : str
        'gcn', 'sage' or 'gin'.
    dataset : TransferDataset
        Training and test samples.
    epochs : int
        Passes over the training set.
    hidden : int
        Hidden width.
    lr : float
        Step size.
    seed : int
        Seed of the initialization and of the batch order.
    batch_size : int, optional
        Mini-batch size; the full training set when None.

    Returns
    -------
    TrainOutcome

    Raises
    ------
    DivergedLoss
        If the loss stops being finite; carries the partial outcome.
    """
    rng = np.random.default_rng(seed)
    network = TransferNetwork(kind, dataset.width, hidden, dataset.r,
                              seed=int(rng.integers(2 ** 32)))
    optimizer = Adam(network.parameters, lr=lr)
    shift = _shift(network, dataset)
    source = dataset.topology.source
    features, labels = dataset.stacked('train')
    size = len(labels)
    batch_size = size if batch_size is None else min(batch_size, size)

    losses = list()
    for epoch in range(epochs):
        order = rng.permutation(size) if batch_size < size else \
            np.arange(size)
        total = 0.
        for start in range(0, size, batch_size):
            batch = order[start:start + batch_size]
            output, cache = network.forward(shift, features[batch], source)
            loss, grad_output = masked_loss(output, labels[batch])
            if not np.isfinite(loss):
                outcome = TrainOutcome(kind, dataset.task, dataset.r, hidden,
                                       seed, losses, None, network)
                raise DivergedLoss('Loss is {} at epoch {}'.format(loss,
                                                                   epoch),
                                   outcome=outcome)
            optimizer.step(network.backward(shift, source, grad_output,
                                            cache))
            total += loss * len(batch)
        losses.append(total / size)
        logging.debug('{} {} r={} epoch {}: loss {:.6g}'.format(
            kind, dataset.task, dataset.r, epoch + 1, losses[-1]))

    accuracy = evaluate_transfer(network, dataset, 'test')
    logging.info('Trained {} on {} r={} (hidden {}, seed {}): accuracy '
                 '{:.3f}'.format(kind, dataset.task, dataset.r, hidden, seed,
                                 accuracy))
    return TrainOutcome(kind, dataset.task, dataset.r, hidden, seed, losses,
                        accuracy, network)


def mean_accuracy(kind, task, r, hidden, seeds, n_train=DEFAULT_N_TRAIN,
                  n_test=DEFAULT_N_TEST, **kwargs):
    """ Test accuracy averaged over seeds, one dataset per seed. """
    accuracies = list()
    for seed in seeds:
        dataset = generate_transfer(task, r, n_train, n_test, seed=seed)
        outcome = train_transfer(kind, dataset, hidden=hidden, seed=seed,
                                 **kwargs)
        accuracies.append(outcome.accuracy)
    return float(np.mean(accuracies))
