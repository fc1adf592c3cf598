""" Graph rewiring by edge addition.

A rewiring replaces the graph messages are exchanged on with a denser
one over the same nodes. Four greedy strategies build a `RewiringPlan`:

* spatial threshold: join the pair of largest effective resistance,
  until every non-edge is at most `threshold`,
* spatial diameter: join the pair of largest distance, until the
  diameter is at most `threshold`,
* spectral gap: add the non-edge raising lambda_1 the most,
* total resistance: add the non-edge lowering Res_G the most.

`rewire` applies a plan and reports connectivity before and after.
Ties are broken towards the lexicographically smallest pair.
"""
import logging

import numpy as np

from oversquash.exceptions import BudgetExceeded
from oversquash.graph.core import distance_matrix
from oversquash.spectral import metrics
from oversquash.spectral.eigen import decompose_graph

TIE_TOL = 1e-12
GAIN_TOL = 1e-12
MAX_EXHAUSTIVE_NODES = 256
DEFAULT_CANDIDATE_SAMPLE = 2000


class Strategy:

    SPATIAL_THRESHOLD = 'spatial_threshold'
    SPATIAL_DIAMETER = 'spatial_diameter'
    SPECTRAL_GAP_GREEDY = 'spectral_gap_greedy'
    RESISTANCE_GREEDY = 'resistance_greedy'

    ALL = (SPATIAL_THRESHOLD, SPATIAL_DIAMETER, SPECTRAL_GAP_GREEDY,
           RESISTANCE_GREEDY)


class Objective:

    MAX_GAP = 'max_gap'
    MIN_TOTAL_RESISTANCE = 'min_total_resistance'

    ALL = (MAX_GAP, MIN_TOTAL_RESISTANCE)


class RewiringPlan:

    """ Edges to add to a graph.

    Parameters
    ----------
    strategy : str
        See `Strategy`.
    budget : int
        Largest number of edges the plan may add.
    threshold : float, optional
        Resistance cutoff or target diameter of the spatial strategies.
    added_edges : list[tuple[int, int]]
        Edges in the order they were chosen.
    """

    def __init__(self, strategy, budget, threshold=None, added_edges=None):
        if strategy not in Strategy.ALL:
            raise ValueError('Unknown rewiring strategy: {}'.format(strategy))
        self.strategy = strategy
        self.budget = budget
        self.threshold = threshold
        self.added_edges = list() if added_edges is None else \
            [tuple(int(node) for node in pair) for pair in added_edges]

    def as_dict(self):
        return dict(strategy=self.strategy, budget=self.budget,
                    threshold=self.threshold,
                    added_edges=[list(pair) for pair in self.added_edges])

    def __len__(self):
        return len(self.added_edges)

    def __repr__(self):
        return '{}(strategy="{}", budget={}, added={})'.format(
            self.__class__.__name__, self.strategy, self.budget,
            self.added_edges)


class RewiringReport:

    """ Connectivity of a graph before and after a rewiring.

    `before` and `after` hold diameter, spectral gap, Cheeger bounds,
    total resistance and the largest commute time. `resistance_deltas`
    lists the change of Res_G caused by each added edge, in plan order.
    """

    def __init__(self, added_edges, before, after, resistance_deltas):
        self.added_edges = added_edges
        self.before = before
        self.after = after
        self.resistance_deltas = resistance_deltas

    def as_dict(self):
        return dict(added_edges=[list(pair) for pair in self.added_edges],
                    before=self.before, after=self.after,
                    resistance_deltas=self.resistance_deltas)

    def __repr__(self):
        return '{}(added={}, total_resistance={:.6g} -> {:.6g})'.format(
            self.__class__.__name__, len(self.added_edges),
            self.before['total_resistance'], self.after['total_resistance'])


def connectivity_summary(graph, decomp=None):
    """ Connectivity measures reported around a rewiring. """
    summary = metrics.topology_metrics(graph, decomp).summary()
    summary['diameter'] = graph.diameter()
    return summary


def rewire(graph, plan):
    """ Apply `plan` to `graph`.

    Parameters
    ----------
    graph : Graph
        Input graph; left untouched.
    plan : RewiringPlan
        Edges to add.

    Returns
    -------
    Graph, RewiringReport

    Raises
    ------
    BudgetExceeded
        If the plan adds more edges than its budget.
    EdgeAlreadyPresent
        If a planned edge already is an edge of `graph`.
    """
    if len(plan.added_edges) > plan.budget:
        raise BudgetExceeded('Plan adds {} edges, budget is {}'.format(
            len(plan.added_edges), plan.budget))
    rewired = graph.add_edges(plan.added_edges)

    before = connectivity_summary(graph)
    deltas = list()
    current, resistance = graph, before['total_resistance']
    for pair in plan.added_edges:
        current = current.add_edges([pair])
        updated = metrics.total_resistance(decompose_graph(current))
        deltas.append(updated - resistance)
        resistance = updated
    after = connectivity_summary(rewired)

    logging.info('Rewired with {} edges: Res_G {:.6g} -> {:.6g}, lambda_1 '
                 '{:.6g} -> {:.6g}'.format(len(plan.added_edges),
                                           before['total_resistance'],
                                           after['total_resistance'],
                                           before['spectral_gap'],
                                           after['spectral_gap']))
    return rewired, RewiringReport(list(plan.added_edges), before, after,
                                   deltas)


def _check_budget(budget):
    if budget < 1:
        raise ValueError('Budget must be at least 1, got {}'.format(budget))


def _pick(scores, pairs):
    """ Pair with the largest score, smallest pair among ties. """
    scores = np.asarray(scores, dtype=float)
    best = scores.max()
    tied = np.flatnonzero(scores >= best - TIE_TOL * max(1., abs(best)))
    index = min(tied, key=lambda i: pairs[i])
    return pairs[index], float(scores[index])


def _resistance_scores(graph, pairs):
    resistance = metrics.resistance_matrix(decompose_graph(graph))
    return [resistance[v, u] for v, u in pairs]


def _distance_scores(graph, pairs):
    distances = distance_matrix(graph)
    return [distances[v, u] for v, u in pairs]


def spatial_rewire(graph, budget, threshold=None, target_diameter=None):
    """ Greedily join the currently worst connected pair.

    With `target_diameter` the worst pair is the one at largest distance
    and edges are added until the diameter is at most `target_diameter`.
    Otherwise the worst pair has the largest effective resistance and
    edges are added until no non-edge exceeds `threshold`.

    Parameters
    ----------
    graph : Graph
        Input graph.
    budget : int
        Largest number of edges to add, >= 1.
    threshold : float, optional
        Resistance cutoff; without one only the budget stops the search.
    target_diameter : int, optional
        Switches to distance mode.

    Returns
    -------
    RewiringPlan
    """
    _check_budget(budget)
    if target_diameter is not None:
        strategy, cutoff, score = Strategy.SPATIAL_DIAMETER, \
            target_diameter, _distance_scores
    else:
        strategy, cutoff, score = Strategy.SPATIAL_THRESHOLD, threshold, \
            _resistance_scores

    added, current = list(), graph
    while len(added) < budget:
        pairs = current.non_edges()
        if not pairs:
            break
        pair, value = _pick(score(current, pairs), pairs)
        if cutoff is not None and value <= cutoff:
            break
        added.append(pair)
        current = current.add_edges([pair])
        logging.info('Spatial rewiring step {}: added {} (score {:.6g})'.format(
            len(added), pair, value))
    return RewiringPlan(strategy, budget, cutoff, added)


def _normalized_gap(adjacency):
    degrees = adjacency.sum(axis=1)
    inv_sqrt = 1. / np.sqrt(degrees)
    laplacian = np.eye(len(degrees)) - adjacency * np.outer(inv_sqrt, inv_sqrt)
    return float(np.linalg.eigvalsh(laplacian)[1])


def _total_resistance(adjacency):
    # Res_G = n trace(L^+) for the combinatorial Laplacian
    laplacian = np.diag(adjacency.sum(axis=1)) - adjacency
    eigenvalues = np.linalg.eigvalsh(laplacian)
    return float(len(eigenvalues) * np.sum(1. / eigenvalues[1:]))


def candidate_edges(graph, rng=None, sample_size=DEFAULT_CANDIDATE_SAMPLE):
    """ Non-edges considered by one greedy step.

    All non-edges for graphs with at most 256 nodes, otherwise a seeded
    sample of `sample_size` of them in lexicographic order, drawn with
    the numpy Generator `rng`.
    """
    pairs = graph.non_edges()
    if graph.num_nodes <= MAX_EXHAUSTIVE_NODES or len(pairs) <= sample_size:
        return pairs
    if rng is None:
        rng = np.random.default_rng()
    chosen = np.sort(rng.choice(len(pairs), size=sample_size, replace=False))
    return [pairs[i] for i in chosen]


def spectral_rewire(graph, budget, objective=Objective.MAX_GAP, seed=None,
                    sample_size=DEFAULT_CANDIDATE_SAMPLE):
    """ Greedily add the non-edge that most improves a spectral objective.

    Every step recomputes the spectrum of each candidate augmented graph.
    With `max_gap` the search stops once no candidate raises lambda_1, so
    lambda_1 never decreases.

    Parameters
    ----------
    graph : Graph
        Input graph.
    budget : int
        Largest number of edges to add, >= 1.
    objective : str
        'max_gap' or 'min_total_resistance'.
    seed : int, optional
        Candidate sampling seed for graphs above 256 nodes.

    Returns
    -------
    RewiringPlan
    """
    _check_budget(budget)
    if objective == Objective.MAX_GAP:
        strategy, evaluate = Strategy.SPECTRAL_GAP_GREEDY, _normalized_gap
    elif objective == Objective.MIN_TOTAL_RESISTANCE:
        strategy = Strategy.RESISTANCE_GREEDY

        def evaluate(adjacency):
            return -_total_resistance(adjacency)
    else:
        raise ValueError('Unknown rewiring objective: {}'.format(objective))

    added, current = list(), graph
    rng = np.random.default_rng(seed)
    while len(added) < budget:
        pairs = candidate_edges(current, rng, sample_size)
        if not pairs:
            break
        adjacency = np.array(current.adjacency)
        baseline = evaluate(adjacency)
        scores = list()
        for v, u in pairs:
            adjacency[v, u] = adjacency[u, v] = 1.
            scores.append(evaluate(adjacency))
            adjacency[v, u] = adjacency[u, v] = 0.
        pair, value = _pick(scores, pairs)
        if objective == Objective.MAX_GAP and value <= baseline + GAIN_TOL:
            logging.info('No candidate edge raises lambda_1 above {:.6g}; '
                         'stopping after {} edges'.format(baseline,
                                                          len(added)))
            break
        added.append(pair)
        current = current.add_edges([pair])
        logging.info('Spectral rewiring step {}: added {} ({} {:.6g} -> '
                     '{:.6g})'.format(len(added), pair, objective,
                                      abs(baseline), abs(value)))
    return RewiringPlan(strategy, budget, None, added)
