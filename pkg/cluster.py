"""Exemplar-based subspace clustering.

Every point is coded over the exemplars, codes are normalized, each point is
linked to its t most similar codes with positive inner product, and the
symmetrized graph is split by spectral clustering.
"""
import logging
import traceback
import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from sklearn.cluster import KMeans
from sklearn.preprocessing import normalize
from constants import *
from models import AffinityGraph, ClusterAssignment, SparseCode, SelectionMethods
from lib.errors import ZeroCode, EmptyGraph, ValidationError
from lib.helpers import relabel_by_first_appearance
import ffs
import lasso
import worker

logger = logging.getLogger('exsel.cluster')


def code_matrix(codes):
    """Stack coefficient vectors as rows of an N x M matrix."""
    if isinstance(codes, np.ndarray):
        return np.asarray(codes, dtype=float)
    return np.vstack([np.asarray(code.coeffs if isinstance(code, SparseCode) else code, dtype=float)
                      for code in codes])


def zero_codes(codes):
    norms = np.linalg.norm(code_matrix(codes), axis=1)
    return np.flatnonzero(norms < ZERO_CODE_NORM)


def build_knn_graph(codes, t, n_jobs=None):
    if t < 1:
        raise ValidationError("t must be at least 1")
    matrix = code_matrix(codes)
    norms = np.linalg.norm(matrix, axis=1)
    zero = np.flatnonzero(norms < ZERO_CODE_NORM)
    if zero.size:
        raise ZeroCode(int(zero[0]))
    unit = matrix / norms[:, None]
    count = unit.shape[0]

    def neighbors_of(i):
        similarity = unit @ unit[i]
        similarity[i] = -np.inf
        # stable sort: equal similarities keep the lower index first
        order = np.argsort(-similarity, kind='stable')[:t]
        return order[similarity[order] > 0]

    neighbors = worker.parallel_map(neighbors_of, range(count), n_jobs)
    rows = np.repeat(np.arange(count), [len(row) for row in neighbors])
    cols = np.concatenate(neighbors) if count else np.zeros(0, dtype=int)
    knn = sparse.csr_matrix((np.ones(rows.size, dtype=int), (rows, cols)), shape=(count, count))
    affinity = (knn + knn.T).tocsr()
    affinity.sort_indices()
    logger.debug("Graph over " + str(count) + " codes has " + str(affinity.nnz) + " nonzero entries")
    return AffinityGraph(affinity, neighbors)


def spectral_cluster(g, n_clusters, seed):
    """Normalized-Laplacian embedding, row normalization, seeded k-means.

    When the graph has at least n_clusters connected components the Laplacian
    null space is degenerate and eigh may return any basis of it; the
    component indicators are used as the embedding instead.
    """
    affinity = sparse.csr_matrix(g.affinity, dtype=float)
    if affinity.nnz == 0 or not np.any(affinity.data):
        raise EmptyGraph("Affinity graph has no edges")
    if not 1 <= n_clusters <= g.size:
        raise ValidationError("n_clusters must lie in [1, " + str(g.size) + "], got " + str(n_clusters))

    degree = g.degrees().astype(float)
    isolated = g.isolated()
    if isolated.size:
        logger.warning(str(isolated.size) + " isolated vertices get degree 1: " + str(isolated.tolist()[:10]))
        degree[isolated] = 1.0
    components, membership = connected_components(affinity, directed=False)
    report = {'isolated': isolated.tolist(), 'components': int(components)}
    if n_clusters == 1:
        return ClusterAssignment(np.zeros(g.size, dtype=int), 1, report)

    if components >= n_clusters:
        if components > n_clusters:
            logger.warning("Graph has " + str(components) + " components for " + str(n_clusters) + " clusters")
        embedding = np.eye(components)[membership]
    else:
        scale = sparse.diags(1.0 / np.sqrt(degree))
        laplacian = np.eye(g.size) - (scale @ affinity @ scale).toarray()
        _, vectors = scipy.linalg.eigh(laplacian, subset_by_index=[0, n_clusters - 1])
        embedding = normalize(vectors)
    kmeans = KMeans(n_clusters=n_clusters, init='k-means++', n_init=KMEANS_N_INIT, max_iter=KMEANS_MAX_ITER,
                    tol=KMEANS_TOL, random_state=seed).fit(embedding)
    labels = relabel_by_first_appearance(kmeans.labels_)
    logger.debug("k-means inertia " + str(kmeans.inertia_))
    return ClusterAssignment(labels, n_clusters, report)


def bridge_components(graph, codes):
    """Link graph components whose codes use a common atom.

    A bridge weighs BRIDGE_WEIGHT times the inner product of the absolute
    normalized codes. Subspace-preserving codes only share atoms within a
    subspace, so the bridges rejoin pieces of one subspace that the t-NN graph
    split apart.
    """
    _, membership = connected_components(graph.affinity, directed=False)
    support = sparse.csr_matrix(normalize(np.abs(code_matrix(codes))))
    shared = (support @ support.T).tocoo()
    cross = membership[shared.row] != membership[shared.col]
    bridges = sparse.csr_matrix((BRIDGE_WEIGHT * shared.data[cross], (shared.row[cross], shared.col[cross])),
                                shape=graph.affinity.shape)
    logger.debug("Added " + str(bridges.nnz) + " bridge entries between components")
    return AffinityGraph((graph.affinity + bridges).tocsr(), graph.neighbors)


def assign_from_codes(data, codes, exemplar_indices, t, n_clusters, seed, n_jobs=None):
    """Graph and spectral steps; points with zero codes join their best exemplar's cluster."""
    zero = zero_codes(codes)
    labels = np.full(data.count, -1, dtype=int)
    if zero.size:
        logger.warning(str(zero.size) + " points have zero codes and follow their nearest exemplar")
    keep = np.setdiff1d(np.arange(data.count), zero)
    if keep.size < n_clusters:
        raise ValidationError("Only " + str(keep.size) + " points have nonzero codes; cannot form "
                              + str(n_clusters) + " clusters")
    kept_codes = [codes[j] for j in keep]
    graph = build_knn_graph(kept_codes, t, n_jobs)
    components = connected_components(graph.affinity, directed=False)[0]
    if components > n_clusters:
        logger.info("t-NN graph has " + str(components) + " components; bridging by shared exemplars")
        graph = bridge_components(graph, kept_codes)
    inner = spectral_cluster(graph, n_clusters, seed)
    labels[keep] = inner.labels

    if zero.size:
        exemplar_indices = np.asarray(exemplar_indices, dtype=int)
        # only exemplars that were clustered themselves can pass on a label
        exemplar_indices = exemplar_indices[labels[exemplar_indices] >= 0]
        affinity = np.abs(data.points[:, exemplar_indices].T @ data.points[:, zero])
        for column, j in enumerate(zero):
            nearest = exemplar_indices[int(np.argmax(affinity[:, column]))]
            labels[j] = labels[nearest]
    report = {
        'zero_codes': zero.tolist(),
        'isolated': [int(keep[i]) for i in inner.report['isolated']],
        'edges': int(graph.affinity.nnz),
        'components': inner.report['components']
    }
    assignment = ClusterAssignment(labels, n_clusters, report)
    assignment.codes = codes
    return assignment


def esc_pipeline(data, lam, k, t, n_clusters, seed, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                 method=SelectionMethods.ffs, first_index=None, n_jobs=None):
    try:
        exemplars = ffs.select_exemplars(data, method, k, seed, lam, tol, max_iter, first_index, n_jobs)
        logger.info("Selected " + str(len(exemplars)) + " exemplars by " + exemplars.method.value)
        codes = lasso.solve_lasso_batch(data.select(exemplars.indices), data, lam, tol, max_iter, n_jobs=n_jobs)
        assignment = assign_from_codes(data, codes, exemplars.indices, t, n_clusters, seed, n_jobs)
    except Exception as e:
        logger.error("Failed to cluster because " + str(e))
        logger.error(traceback.format_exc())
        raise
    assignment.exemplars = exemplars
    assignment.report['exemplars'] = list(exemplars.indices)
    logger.info("Clustered " + str(data.count) + " points into " + str(n_clusters) + " groups")
    return assignment


def self_expressive_codes(data, lam, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, n_jobs=None):
    """Code every point over all the other points; the coefficient on itself is zero."""
    points = data.points
    gram = points.T @ points

    def code_one(j):
        others = np.delete(np.arange(data.count), j)
        try:
            solution = lasso.solve_gram(points[:, others], points[:, j], gram[np.ix_(others, others)],
                                        gram[others, j], float(gram[j, j]), lam, tol, max_iter)
        except Exception as e:
            logger.error("Failed to code point " + str(j) + " because " + str(e))
            raise
        coeffs = np.zeros(data.count)
        coeffs[others] = solution.coeffs
        residual = points[:, j] - points @ coeffs
        return SparseCode(coeffs, residual, lasso.lasso_objective(coeffs, residual, lam), solution.gap,
                          solution.iterations)

    return worker.parallel_map(code_one, range(data.count), n_jobs)


def ssc_pipeline(data, lam, t, n_clusters, seed, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, n_jobs=None):
    """Baseline: the whole dataset is the dictionary."""
    codes = self_expressive_codes(data, lam, tol, max_iter, n_jobs)
    assignment = assign_from_codes(data, codes, np.arange(data.count), t, n_clusters, seed, n_jobs)
    logger.info("Self-expressive baseline clustered " + str(data.count) + " points")
    return assignment
