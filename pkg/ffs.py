"""Exemplar selection.

Farthest-first search repeatedly adds the point with the largest
self-representation cost f_lam(x_j, X_0). ffs_naive re-evaluates every
candidate each round; ffs_lazy keeps the previous round's costs as upper
bounds (costs never increase as X_0 grows) and stops scanning once the best
fresh value dominates every remaining stale bound. Both break ties by the
lowest index and therefore select the same sequence.
"""
import logging
import numpy as np
from sklearn.metrics import pairwise_distances
from constants import *
from models import ExemplarSet, TraceEntry, SelectionMethods
from lib.errors import ValidationError
from selfrep import SelfRepresentationCost
from dataset import make_rng
import worker

logger = logging.getLogger('exsel.ffs')


def _check_k(data, k, allow_zero=False):
    low = 0 if allow_zero else 1
    if not low <= k <= data.count:
        raise ValidationError("k must lie in [" + str(low) + ", " + str(data.count) + "], got " + str(k))


def first_pick(count, seed, first_index=None):
    if first_index is not None:
        if not 0 <= first_index < count:
            raise ValidationError("first index " + str(first_index) + " is out of range")
        return int(first_index)
    return int(make_rng(seed).integers(count))


def ffs_naive(data, lam, k, seed, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, first_index=None, n_jobs=None):
    _check_k(data, k)
    cost = SelfRepresentationCost(data, lam, tol, max_iter)
    selected = [first_pick(data.count, seed, first_index)]
    trace = [TraceEntry(selected[0], lam / 2.0, 0)]

    for iteration in range(1, k):
        current = list(selected)
        values = np.array(worker.parallel_map(lambda j: cost.evaluate(j, current), range(data.count), n_jobs))
        # every point is evaluated, but exemplars already chosen cannot be picked again
        values[current] = -np.inf
        best = int(np.argmax(values))
        selected.append(best)
        trace.append(TraceEntry(best, float(values[best]), data.count))
        logger.debug("Iteration " + str(iteration) + " picked " + str(best) + " at cost " + str(values[best]))

    logger.info("Naive search selected " + str(len(selected)) + " exemplars")
    return ExemplarSet(selected, k, seed, lam, SelectionMethods.ffs_naive, trace)


def ffs_lazy(data, lam, k, seed, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, first_index=None):
    _check_k(data, k)
    cost = SelfRepresentationCost(data, lam, tol, max_iter)
    selected = [first_pick(data.count, seed, first_index)]
    bounds = np.array([cost.evaluate(j, selected) for j in range(data.count)])
    trace = [TraceEntry(selected[0], lam / 2.0, cost.evaluations)]

    for iteration in range(1, k):
        chosen = set(selected)
        order = sorted((j for j in range(data.count) if j not in chosen), key=lambda j: (-bounds[j], j))
        current = list(selected)
        max_cost = -np.inf
        new_index = None
        before = cost.evaluations
        for position, j in enumerate(order):
            # against an unchanged set this is a memo hit, not a fresh solve
            bounds[j] = cost.evaluate(j, current)
            if bounds[j] > max_cost or (bounds[j] == max_cost and j < new_index):
                max_cost = bounds[j]
                new_index = j
            if position + 1 == len(order):
                break
            following = order[position + 1]
            if max_cost > bounds[following] or (max_cost == bounds[following] and new_index < following):
                break
        evals = cost.evaluations - before
        selected.append(new_index)
        trace.append(TraceEntry(new_index, float(max_cost), evals))
        logger.debug("Iteration " + str(iteration) + " picked " + str(new_index) + " after " + str(evals)
                     + " evaluations")

    result = ExemplarSet(selected, k, seed, lam, SelectionMethods.ffs, trace)
    logger.info("Lazy search selected " + str(len(selected)) + " exemplars with " + str(result.evaluations)
                + " cost evaluations")
    return result


def select_random(data, k, seed):
    _check_k(data, k, allow_zero=True)
    indices = make_rng(seed).permutation(data.count)[:k]
    return ExemplarSet(indices, k, seed, None, SelectionMethods.random,
                       [TraceEntry(int(i), None, 0) for i in indices])


def select_kcenters(data, k, seed, first_index=None):
    """Farthest-first traversal in Euclidean distance (k-centers greedy)."""
    _check_k(data, k)
    samples = data.points.T
    selected = [first_pick(data.count, seed, first_index)]
    trace = [TraceEntry(selected[0], None, data.count)]
    distances = pairwise_distances(samples, samples[selected]).ravel()
    for _ in range(1, k):
        distances[selected] = -1.0
        index = int(np.argmax(distances))
        trace.append(TraceEntry(index, float(distances[index]), data.count))
        selected.append(index)
        distances = np.minimum(distances, pairwise_distances(samples, samples[[index]]).ravel())
    return ExemplarSet(selected, k, seed, None, SelectionMethods.kcenters, trace)


def select_exemplars(data, method, k, seed, lam=DEFAULT_LAMBDA, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                     first_index=None, n_jobs=None):
    method = SelectionMethods(method)
    if method == SelectionMethods.ffs:
        return ffs_lazy(data, lam, k, seed, tol, max_iter, first_index)
    elif method == SelectionMethods.ffs_naive:
        return ffs_naive(data, lam, k, seed, tol, max_iter, first_index, n_jobs)
    elif method == SelectionMethods.random:
        return select_random(data, k, seed)
    elif method == SelectionMethods.kcenters:
        return select_kcenters(data, k, seed, first_index)
    raise ValidationError("Unknown selection method " + str(method))


def class_counts(exemplars, labels, classes):
    """Number of exemplars per class, in the order of classes (zeros included)."""
    picked = np.asarray(labels)[list(exemplars)]
    return [int(np.sum(picked == label)) for label in classes]
