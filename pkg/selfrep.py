import logging
import threading
import numpy as np
from constants import *
from models import LassoProblem, CostReport, as_points
from lib.errors import TooFewPoints, InvalidProblem
import lasso

logger = logging.getLogger('exsel.selfrep')


def f_cost(x_j, exemplars, data, lam, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Self-representation cost of x_j over the exemplar columns of data."""
    exemplars = list(exemplars)
    if not lam > 1:
        raise InvalidProblem("lambda must be greater than 1, got " + str(lam))
    if not exemplars:
        return lam / 2.0
    problem = LassoProblem(as_points(data)[:, exemplars], x_j, lam)
    return lasso.solve_lasso(problem, tol, max_iter).objective


def F_cost(exemplars, data, lam, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, n_jobs=None):
    """Worst-case cost over all points; ties in the argmax go to the lowest index."""
    points = as_points(data)
    exemplars = list(exemplars)
    if not lam > 1:
        raise InvalidProblem("lambda must be greater than 1, got " + str(lam))
    if not exemplars:
        per_point = np.full(points.shape[1], lam / 2.0)
    else:
        codes = lasso.solve_lasso_batch(points[:, exemplars], points, lam, tol, max_iter, n_jobs=n_jobs)
        per_point = np.array([code.objective for code in codes])
    low, high = 1.0 - 1.0 / (2.0 * lam), lam / 2.0
    if np.any(per_point < low - 1e-6) or np.any(per_point > high + 1e-6):
        logger.warning("Cost outside [" + str(low) + ", " + str(high) + "]; are the columns unit norm?")
    argmax_index = int(np.argmax(per_point))
    return CostReport(per_point, float(per_point[argmax_index]), argmax_index)


def lambda_threshold(data):
    """1 / max |<x', x''>| over distinct points; below it every non-exemplar costs lam / 2."""
    points = as_points(data)
    if points.shape[1] < 2:
        raise TooFewPoints("lambda_threshold needs at least 2 points, got " + str(points.shape[1]))
    gram = np.abs(points.T @ points)
    np.fill_diagonal(gram, 0.0)
    coherence = float(gram.max())
    if coherence == 0.0:
        return float('inf')
    return 1.0 / coherence


class SelfRepresentationCost(object):
    """Evaluates f_lam(x_j, X_0) for points of one dataset against a growing exemplar list.

    The dataset Gram matrix is formed once. Values are memoized per (point, set
    version) where the version is the exemplar count, so exemplar lists handed
    to one instance must only grow by appending. Each point keeps its last code
    as a warm start for the next, larger dictionary.
    """

    def __init__(self, data, lam, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, warm_start=True):
        if not lam > 1:
            raise InvalidProblem("lambda must be greater than 1, got " + str(lam))
        self.points = as_points(data)
        self.lam = float(lam)
        self.tol = tol
        self.max_iter = max_iter
        self.warm_start = warm_start
        self.gram = self.points.T @ self.points
        self.evaluations = 0
        self._lock = threading.Lock()
        self._memo = {}
        self._codes = {}

    @property
    def count(self):
        return self.points.shape[1]

    def evaluate(self, j, exemplars):
        version = len(exemplars)
        key = (j, version)
        if key in self._memo:
            return self._memo[key]
        if version == 0:
            value = self.lam / 2.0
        else:
            index = np.asarray(exemplars, dtype=int)
            warm = None
            if self.warm_start and j in self._codes:
                previous = self._codes[j]
                warm = np.zeros(version)
                warm[:previous.size] = previous
            try:
                solution = lasso.solve_gram(self.points[:, index], self.points[:, j],
                                            self.gram[np.ix_(index, index)], self.gram[index, j],
                                            float(self.gram[j, j]), self.lam, self.tol, self.max_iter, warm)
            except Exception as e:
                logger.error("Failed to evaluate cost of point " + str(j) + " because " + str(e))
                raise
            value = solution.objective
            self._codes[j] = solution.coeffs
        with self._lock:
            self._memo[key] = value
            self.evaluations += 1
        logger.debug("f(" + str(j) + ", |X0|=" + str(version) + ") = " + str(value))
        return value
