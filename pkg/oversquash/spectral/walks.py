""" Monte-Carlo random walks for checking access and commute times. """
import logging

import numpy as np

from oversquash.exceptions import SameNode
from oversquash.graph.core import check_node

DEFAULT_STEP_CAP = 10 ** 6


class WalkEstimate:

    """ Sample means and standard errors of hitting and commute times.

    Walks that do not hit within the step cap are censored: they are
    counted in `censored` and left out of the means.
    """

    def __init__(self, hitting_mean, hitting_stderr, commute_mean,
                 commute_stderr, num_walks, censored):
        self.hitting_mean = hitting_mean
        self.hitting_stderr = hitting_stderr
        self.commute_mean = commute_mean
        self.commute_stderr = commute_stderr
        self.num_walks = num_walks
        self.censored = censored

    def __repr__(self):
        return ('{}(hitting={:.4g}+-{:.2g}, commute={:.4g}+-{:.2g}, '
                'censored={})').format(self.__class__.__name__,
                                       self.hitting_mean, self.hitting_stderr,
                                       self.commute_mean, self.commute_stderr,
                                       self.censored)


def neighbor_table(graph):
    """ n x d_max table of neighbours, rows padded with -1. """
    table = np.full((graph.num_nodes, graph.max_degree), -1, dtype=int)
    for v in range(graph.num_nodes):
        neighbors = graph.neighbors(v)
        table[v, :len(neighbors)] = neighbors
    return table


def hitting_samples(graph, start, target, num_walks, rng,
                    step_cap=DEFAULT_STEP_CAP):
    """ Steps needed by `num_walks` independent walks from `start` to
    first reach `target`.

    All walks advance together; each step moves every live walker to a
    uniformly chosen neighbour.

    Returns
    -------
    numpy.ndarray
        Hitting steps as floats, nan for censored walks.
    """
    table = neighbor_table(graph)
    degrees = np.asarray(graph.degrees)

    steps = np.full(num_walks, np.nan)
    positions = np.full(num_walks, start, dtype=int)
    live = np.arange(num_walks)

    for step in range(1, step_cap + 1):
        if not len(live):
            break
        current = positions[live]
        choice = (rng.random(len(live)) * degrees[current]).astype(int)
        moved = table[current, choice]
        positions[live] = moved
        hit = moved == target
        steps[live[hit]] = step
        live = live[~hit]

    return steps


def _mean_and_stderr(samples):
    if not len(samples):
        return float('nan'), float('nan')
    stderr = samples.std(ddof=1) / np.sqrt(len(samples)) if \
        len(samples) > 1 else 0.
    return float(samples.mean()), float(stderr)


def random_walk_oracle(graph, v, u, num_walks, seed,
                       step_cap=DEFAULT_STEP_CAP):
    """ Empirical hitting time from v to u and commute time of (v, u).

    Commute samples pair each v -> u walk with an independent u -> v
    walk. The two directions use child streams of `seed`.

    Parameters
    ----------
    graph : Graph
        Input graph.
    v, u : int
        Distinct nodes.
    num_walks : int
        Walks per direction.
    seed : int
        Seed.
    step_cap : int
        Maximum steps per walk.

    Returns
    -------
    WalkEstimate
    """
    check_node(graph, v)
    check_node(graph, u)
    if v == u:
        raise SameNode('Walk oracle needs distinct nodes, got {} twice'.format(
            v))
    if num_walks < 1:
        raise ValueError('Need at least one walk, got {}'.format(num_walks))

    forward_seed, backward_seed = np.random.SeedSequence(seed).spawn(2)
    forward = hitting_samples(graph, v, u, num_walks,
                              np.random.default_rng(forward_seed), step_cap)
    backward = hitting_samples(graph, u, v, num_walks,
                               np.random.default_rng(backward_seed), step_cap)

    commute = forward + backward
    censored = int(np.isnan(commute).sum())
    if censored:
        logging.warning('{} of {} walks censored at {} steps'.format(
            censored, num_walks, step_cap))

    hitting_mean, hitting_stderr = _mean_and_stderr(
        forward[~np.isnan(forward)])
    commute_mean, commute_stderr = _mean_and_stderr(
        commute[~np.isnan(commute)])
    return WalkEstimate(hitting_mean, hitting_stderr, commute_mean,
                        commute_stderr, num_walks, censored)
