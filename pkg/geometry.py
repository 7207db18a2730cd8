"""Brute-force geometric oracles.

Exact equality-constrained l1 minimization and the gauge of K_0 = conv(+-X_0)
by linear programming, the inradius of K_0 from its facets, and the covering
radius of a point set on S^1 or S^2 by grid search. The audit functions cross
check these against each other and against the lasso solver.
"""
import math
import logging
import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull
from constants import *
from models import SymmetricHull, DataMatrix, LassoProblem, SparseCode, as_points
from lib.errors import UnsupportedDim, DegenerateHull, ValidationError, NotInSpan
from dataset import make_rng
import lasso
import selfrep
import worker

logger = logging.getLogger('exsel.geometry')

LP_OPTIONS = {
    'primal_feasibility_tolerance': LP_TOLERANCE,
    'dual_feasibility_tolerance': LP_TOLERANCE
}


def in_span(columns, target):
    if columns.shape[1] == 0:
        return not np.any(target)
    coeffs = np.linalg.lstsq(columns, target, rcond=None)[0]
    return np.linalg.norm(columns @ coeffs - target) <= SPAN_TOL * max(1.0, np.linalg.norm(target))


def _nonnegative_combination(columns, target, extra_row=False):
    """Minimum-sum nonnegative weights w with columns @ w = target.

    The LP vertex is refined by re-solving on its support, which removes the
    solver's feasibility tolerance from the reported value.
    """
    count = columns.shape[1]
    if extra_row:
        # variables (w, t): minimize t subject to columns @ w = target, sum(w) = t
        a_eq = np.vstack([np.hstack([columns, np.zeros((columns.shape[0], 1))]),
                          np.hstack([np.ones((1, count)), -np.ones((1, 1))])])
        b_eq = np.append(target, 0.0)
        cost = np.zeros(count + 1)
        cost[-1] = 1.0
    else:
        a_eq, b_eq, cost = columns, target, np.ones(count)
    result = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method='highs', options=LP_OPTIONS)
    if result.status != 0:
        logger.debug("LP ended with status " + str(result.status) + ": " + str(result.message))
        return None
    weights = np.maximum(result.x[:count], 0.0)

    support = np.flatnonzero(weights > SNAP_THRESHOLD * max(1.0, weights.max(initial=0.0)))
    if support.size:
        refined = np.linalg.lstsq(columns[:, support], target, rcond=None)[0]
        exact = np.linalg.norm(columns[:, support] @ refined - target) <= SPAN_TOL
        if exact and np.all(refined >= 0) and refined.sum() <= weights.sum() + SPAN_TOL:
            weights = np.zeros(count)
            weights[support] = refined
    return weights


def l1_min_exact(dictionary, target):
    """min ||c||_1 subject to x = X c; (inf, None) when x is outside span(X)."""
    dictionary = as_points(dictionary)
    target = np.asarray(target, dtype=float)
    if not in_span(dictionary, target):
        return math.inf, None
    size = dictionary.shape[1]
    if size == 0 or not np.any(target):
        return 0.0, np.zeros(size)
    split = _nonnegative_combination(np.hstack([dictionary, -dictionary]), target)
    if split is None:
        return math.inf, None
    coeffs = split[:size] - split[size:]
    return float(np.sum(np.abs(coeffs))), coeffs


def exact_codes(dictionary, targets, n_jobs=None):
    """lam = inf codes of every target column: min ||c||_1 subject to x_j = X c."""
    dictionary = as_points(dictionary)
    targets = as_points(targets)

    def code_one(j):
        value, coeffs = l1_min_exact(dictionary, targets[:, j])
        if coeffs is None:
            raise NotInSpan(j)
        return SparseCode(coeffs, targets[:, j] - dictionary @ coeffs, value, 0.0, 0)

    codes = worker.parallel_map(code_one, range(targets.shape[1]), n_jobs)
    logger.debug("Exact codes for " + str(targets.shape[1]) + " targets over " + str(dictionary.shape[1]) + " atoms")
    return codes


def minkowski_functional(hull, x):
    """inf{t > 0 : x / t in K_0}, as the smallest total weight of a conic combination of the generators."""
    x = np.asarray(x, dtype=float)
    if not in_span(hull.generators, x):
        return math.inf
    if not np.any(x):
        return 0.0
    weights = _nonnegative_combination(hull.generators, x, extra_row=True)
    if weights is None:
        return math.inf
    return float(weights.sum())


def sphere_grid(dim, resolution):
    """Deterministic grid on the unit sphere of R^dim (dim 2 or 3), one point per row."""
    if dim == 2:
        count = int(math.ceil(2 * math.pi / resolution))
        angles = np.arange(count) * (2 * math.pi / count)
        return np.column_stack([np.cos(angles), np.sin(angles)])
    if dim == 3:
        rings = int(math.ceil(math.pi / resolution))
        blocks = []
        for polar in np.arange(rings + 1) * (math.pi / rings):
            count = max(1, int(math.ceil(2 * math.pi * math.sin(polar) / resolution)))
            angles = np.arange(count) * (2 * math.pi / count)
            blocks.append(np.column_stack([math.sin(polar) * np.cos(angles), math.sin(polar) * np.sin(angles),
                                           np.full(count, math.cos(polar))]))
        return np.vstack(blocks)
    raise UnsupportedDim("Grid search needs D in {2, 3}, got " + str(dim))


def _default_resolution(dim, grid_resolution):
    if grid_resolution is not None:
        return grid_resolution
    return GRID_RESOLUTION_S1 if dim == 2 else GRID_RESOLUTION_S2


def _chunks(grid):
    for start in range(0, grid.shape[0], GRID_CHUNK_SIZE):
        yield grid[start:start + GRID_CHUNK_SIZE]


def covering_radius(points_on_sphere, grid_resolution=None):
    """max over grid directions w of the angle to the nearest point (radians)."""
    points = as_points(points_on_sphere)
    dim = points.shape[0]
    if dim not in (2, 3):
        raise UnsupportedDim("Covering radius grid search needs D in {2, 3}, got " + str(dim))
    if np.any(np.abs(np.linalg.norm(points, axis=0) - 1.0) > UNIT_NORM_TOL):
        raise ValidationError("Covering radius needs unit-norm points")
    grid = sphere_grid(dim, _default_resolution(dim, grid_resolution))
    worst = 1.0
    for chunk in _chunks(grid):
        worst = min(worst, float((chunk @ points).max(axis=1).min()))
    return float(np.arccos(np.clip(worst, -1.0, 1.0)))


def inradius(hull, grid_resolution=None):
    """min over grid directions u of 1 / ||u||_K0, the gauge taken from the facets of K_0."""
    dim = hull.dim
    if dim not in (2, 3):
        raise UnsupportedDim("Inradius grid search needs D in {2, 3}, got " + str(dim))
    if np.linalg.matrix_rank(hull.generators) < dim:
        raise DegenerateHull("Generators do not span R^" + str(dim))
    facets = ConvexHull(hull.generators.T).equations
    # facet a.x + b <= 0 with b < 0 since the origin is interior; gauge(u) = max (a.u) / (-b)
    scaled = facets[:, :dim] / (-facets[:, dim])[:, None]
    grid = sphere_grid(dim, _default_resolution(dim, grid_resolution))
    largest = 0.0
    for chunk in _chunks(grid):
        largest = max(largest, float((chunk @ scaled.T).max(axis=1).max()))
    return 1.0 / largest


def sup_l1_cost(exemplars, grid_resolution=None, n_jobs=None):
    """F_inf(X_0) estimated as the grid maximum of the exact l1 cost over unit directions."""
    exemplars = as_points(exemplars)
    dim = exemplars.shape[0]
    grid = sphere_grid(dim, _default_resolution(dim, grid_resolution))
    values = worker.parallel_map(lambda w: l1_min_exact(exemplars, w)[0], grid, n_jobs)
    return float(max(values))


def covering_chain(exemplars, lp_resolution, grid_resolution, n_jobs=None):
    """F_inf, 1 / r(K_0) and 1 / cos(gamma(+-X_0)), each computed on its own."""
    hull = SymmetricHull(exemplars)
    return {
        'f_inf': sup_l1_cost(hull.exemplars, lp_resolution, n_jobs),
        'inverse_inradius': 1.0 / inradius(hull, grid_resolution),
        'inverse_cos_covering': 1.0 / math.cos(covering_radius(hull.generators, grid_resolution))
    }


def _unit_columns(rng, dim, count):
    matrix = rng.standard_normal((dim, count))
    return matrix / np.linalg.norm(matrix, axis=0)


def random_circle_set(rng, max_count=8, max_gap=2 * math.pi / 3):
    """Random points on S^1 whose symmetrized set leaves no gap wider than max_gap."""
    while True:
        count = int(rng.integers(2, max_count + 1))
        angles = np.sort(rng.uniform(0.0, math.pi, count))
        symmetric = np.concatenate([angles, angles + math.pi])
        gaps = np.diff(np.append(symmetric, symmetric[0] + 2 * math.pi))
        if gaps.max() <= max_gap:
            return np.vstack([np.cos(angles), np.sin(angles)])


def audit_gauge(trials, seed, dim=3):
    rng = make_rng(seed)
    deviations = []
    for _ in range(trials):
        exemplars = _unit_columns(rng, dim, int(rng.integers(dim, 2 * dim + 1)))
        x = _unit_columns(rng, dim, 1)[:, 0]
        value, _ = l1_min_exact(exemplars, x)
        deviations.append(abs(minkowski_functional(SymmetricHull(exemplars), x) - value))
    return {'check': 'gauge', 'trials': trials, 'max_deviation': max(deviations),
            'mean_deviation': float(np.mean(deviations))}


def audit_covering(trials, seed, lp_resolution=2e-2, grid_resolution=2e-4, n_jobs=None):
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(trials):
        chain = covering_chain(random_circle_set(rng), lp_resolution, grid_resolution, n_jobs)
        values = list(chain.values())
        worst = max(worst, max(abs(a - b) for a in values for b in values))
    return {'check': 'covering', 'trials': trials, 'max_pairwise_deviation': worst,
            'lp_resolution': lp_resolution, 'grid_resolution': grid_resolution}


def audit_lasso(trials, seed, lam=LAMBDA_INFINITY, tol=DEFAULT_TOL):
    rng = make_rng(seed)
    worst_violation = 0.0
    worst_lp = 0.0
    for _ in range(trials):
        dim = int(rng.integers(2, 7))
        dictionary = _unit_columns(rng, dim, int(rng.integers(dim, 2 * dim + 1)))
        target = _unit_columns(rng, dim, 1)[:, 0]
        code = lasso.solve_lasso(LassoProblem(dictionary, target, lam), tol)
        worst_violation = max(worst_violation, lasso.optimality_violation(dictionary, target, lam, code.coeffs))
        worst_lp = max(worst_lp, abs(code.objective - l1_min_exact(dictionary, target)[0]))
    return {'check': 'lasso', 'trials': trials, 'lambda': lam, 'max_violation': worst_violation,
            'max_lp_deviation': worst_lp}


def audit_threshold(trials, seed, tol=DEFAULT_TOL):
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(trials):
        dim = int(rng.integers(3, 9))
        count = int(rng.integers(5, 21))
        data = DataMatrix(_unit_columns(rng, dim, count))
        threshold = selfrep.lambda_threshold(data)
        lam = 10.0 if math.isinf(threshold) else (1.0 + threshold) / 2.0
        exemplars = sorted(rng.choice(count, int(rng.integers(1, count)), replace=False).tolist())
        for j in range(count):
            if j in exemplars:
                continue
            worst = max(worst, abs(selfrep.f_cost(data.points[:, j], exemplars, data, lam, tol) - lam / 2.0))
    return {'check': 'threshold', 'trials': trials, 'max_deviation': worst}
