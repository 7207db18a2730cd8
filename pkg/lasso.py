"""l1-regularized least squares over a restricted dictionary.

    min_c ||c||_1 + (lam / 2) ||x - X c||_2^2

The coordinate-descent kernel is scikit-learn's (cyclic, soft-thresholding,
Gram form). Its iterate is then polished on the support by solving the KKT
system exactly. Overcomplete dictionaries go through the exact LARS-lasso path
first. Every returned code carries its duality gap.
"""
import logging
import traceback
import warnings
import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import lars_path_gram, lasso_path
from constants import *
from models import LassoProblem, SparseCode, GramSolution, as_points
from lib.errors import NoConvergence
import worker

logger = logging.getLogger('exsel.lasso')

POLISH_THRESHOLDS = (SNAP_THRESHOLD, 1e-9, 1e-6)


def lasso_objective(coeffs, residual, lam):
    return float(np.sum(np.abs(coeffs)) + 0.5 * lam * np.dot(residual, residual))


def duality_gap(gram, corr, target_sq, coeffs, lam):
    """Gap between the primal objective at coeffs and the dual value at the scaled residual.

    With r = x - Xc the dual point is u = lam * s * r, s = min(1, 1 / (lam ||X^T r||_inf)),
    and D(u) = u^T x - ||u||^2 / (2 lam).
    """
    if coeffs.size == 0:
        return 0.0
    grad = corr - gram @ coeffs
    corr_dot = float(np.dot(corr, coeffs))
    resid_sq = max(target_sq - 2.0 * corr_dot + float(np.dot(coeffs, gram @ coeffs)), 0.0)
    primal = float(np.sum(np.abs(coeffs))) + 0.5 * lam * resid_sq
    dual_norm = float(np.max(np.abs(grad)))
    scale = 1.0 if lam * dual_norm <= 1.0 else 1.0 / (lam * dual_norm)
    dual = lam * scale * (target_sq - corr_dot) - 0.5 * lam * scale ** 2 * resid_sq
    return max(primal - dual, 0.0)


def optimality_violation(dictionary, target, lam, coeffs):
    """Largest violation of the subgradient conditions, computed from the explicit residual."""
    dictionary = as_points(dictionary)
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size == 0:
        return 0.0
    grad = dictionary.T @ (target - dictionary @ coeffs)
    zero = coeffs == 0
    off = np.maximum(np.abs(grad[zero]) - 1.0 / lam, 0.0)
    on = np.abs(grad[~zero] - np.sign(coeffs[~zero]) / lam)
    return float(max(off.max(initial=0.0), on.max(initial=0.0)))


def _polish(gram, corr, coeffs, lam):
    """Solve the KKT system on the support of coeffs; None unless the result is optimal."""
    scale = float(np.max(np.abs(coeffs), initial=0.0))
    tried = set()
    for threshold in POLISH_THRESHOLDS:
        support = np.flatnonzero(np.abs(coeffs) > threshold * max(scale, 1.0))
        key = tuple(support)
        if key in tried:
            continue
        tried.add(key)
        candidate = np.zeros_like(coeffs)
        if support.size:
            signs = np.sign(coeffs[support])
            try:
                values = np.linalg.solve(gram[np.ix_(support, support)], corr[support] - signs / lam)
            except np.linalg.LinAlgError:
                continue
            if np.any(np.sign(values) != signs):
                continue
            candidate[support] = values
        grad = corr - gram @ candidate
        off = np.ones(coeffs.size, dtype=bool)
        off[support] = False
        if off.any() and np.max(np.abs(grad[off])) > 1.0 / lam + KKT_SLACK:
            continue
        return candidate
    return None


def _coordinate_descent(dictionary, target, gram, corr, lam, tol, max_iter, warm_start):
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', category=ConvergenceWarning)
        # sklearn scales the data term by 1 / n_samples
        alpha = 1.0 / (lam * dictionary.shape[0])
        _, coefs, _, n_iters = lasso_path(dictionary, target, alphas=[alpha], precompute=gram, Xy=corr,
                                          coef_init=warm_start, max_iter=max_iter, tol=tol / lam,
                                          return_n_iter=True)
    return coefs[:, 0].copy(), int(n_iters[0])


def _lars(gram, corr, dim, lam):
    """Exact lasso homotopy from the zero code down to lam; its active set stays linearly independent."""
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', category=ConvergenceWarning)
        _, _, coef, steps = lars_path_gram(corr, gram, n_samples=dim, alpha_min=1.0 / (lam * dim), method='lasso',
                                           max_iter=max(LARS_MIN_STEPS, LARS_STEPS_PER_ATOM * corr.size),
                                           return_path=False, return_n_iter=True)
    return np.asarray(coef, dtype=float).copy(), int(steps)


def solve_gram(dictionary, target, gram, corr, target_sq, lam, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
               warm_start=None):
    """Solve one problem given its Gram block G = X^T X and correlations q = X^T x.

    Coordinate descent goes first unless the dictionary has more atoms than
    dimensions, where it can stall on a support that is not linearly
    independent; there the LARS path goes first. The first iterate whose KKT
    polish succeeds is returned.
    """
    size = corr.size
    if size == 0:
        return GramSolution(np.zeros(0), 0.5 * lam * target_sq, 0.0, 0)

    if np.max(np.abs(corr)) <= 1.0 / lam:
        coeffs = np.zeros(size)
        return GramSolution(coeffs, 0.5 * lam * target_sq, duality_gap(gram, corr, target_sq, coeffs, lam), 0)

    if warm_start is not None:
        warm_start = np.asarray(warm_start, dtype=float)
        if warm_start.shape != (size,):
            warm_start = None

    solvers = ['descent', 'lars']
    if size > dictionary.shape[0]:
        solvers.reverse()
    iterations = 0
    rejected = []
    for solver in solvers:
        if solver == 'descent':
            coeffs, steps = _coordinate_descent(dictionary, target, gram, corr, lam, tol, max_iter, warm_start)
        else:
            coeffs, steps = _lars(gram, corr, dictionary.shape[0], lam)
        iterations += steps
        polished = _polish(gram, corr, coeffs, lam)
        if polished is not None:
            coeffs = polished
            break
        logger.debug("KKT polish rejected the " + solver + " iterate after " + str(steps) + " steps")
        rejected.append(coeffs)
    else:
        coeffs = min(rejected, key=lambda candidate: duality_gap(gram, corr, target_sq, candidate, lam))
    coeffs[np.abs(coeffs) < SNAP_THRESHOLD] = 0.0

    gap = duality_gap(gram, corr, target_sq, coeffs, lam)
    if gap > tol:
        raise NoConvergence(iterations, gap)
    corr_dot = float(np.dot(corr, coeffs))
    resid_sq = max(target_sq - 2.0 * corr_dot + float(np.dot(coeffs, gram @ coeffs)), 0.0)
    objective = float(np.sum(np.abs(coeffs))) + 0.5 * lam * resid_sq
    return GramSolution(coeffs, objective, gap, iterations)


def solve_lasso(problem, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, warm_start=None):
    dictionary = problem.dictionary
    target = problem.target
    gram = dictionary.T @ dictionary
    corr = dictionary.T @ target
    solution = solve_gram(dictionary, target, gram, corr, float(np.dot(target, target)), problem.lam, tol,
                          max_iter, warm_start)
    residual = target - dictionary @ solution.coeffs
    return SparseCode(solution.coeffs, residual, lasso_objective(solution.coeffs, residual, problem.lam),
                      solution.gap, solution.iterations)


def solve_lasso_batch(dictionary, targets, lam, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, warm_starts=None,
                      n_jobs=None):
    """Code every column of targets over the dictionary; results follow target order."""
    dictionary = as_points(dictionary)
    targets = as_points(targets)
    count = targets.shape[1]
    # validate every target up front so a bad column fails before any solve
    problems = [LassoProblem(dictionary, targets[:, j], lam) for j in range(count)]
    gram = dictionary.T @ dictionary
    correlations = dictionary.T @ targets
    target_sq = np.sum(targets * targets, axis=0)

    def solve_one(j):
        warm = warm_starts[j] if warm_starts is not None else None
        try:
            solution = solve_gram(dictionary, targets[:, j], gram, correlations[:, j], float(target_sq[j]),
                                  problems[j].lam, tol, max_iter, warm)
        except NoConvergence as e:
            logger.error("Failed to code target " + str(j) + " because " + str(e))
            raise e.for_target(j)
        residual = targets[:, j] - dictionary @ solution.coeffs
        return SparseCode(solution.coeffs, residual, lasso_objective(solution.coeffs, residual, lam),
                          solution.gap, solution.iterations)

    try:
        codes = worker.parallel_map(solve_one, range(count), n_jobs)
    except NoConvergence:
        raise
    except Exception as e:
        logger.error("Failed to finish batch solve because " + str(e))
        logger.error(traceback.format_exc())
        raise
    logger.debug("Coded " + str(count) + " targets over " + str(dictionary.shape[1]) + " atoms")
    return codes
