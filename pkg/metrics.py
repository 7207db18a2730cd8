import logging
import numpy as np
from scipy.optimize import linear_sum_assignment
from models import ContingencyTable, SparseCode
from lib.errors import LengthMismatch, EmptySelection

logger = logging.getLogger('exsel.metrics')


def contingency_table(truth, pred):
    """Counts n_ij = |C_i & G_j|, padded with empty classes or groups to a square table."""
    truth = np.asarray(truth)
    pred = np.asarray(pred)
    if truth.shape != pred.shape or truth.ndim != 1:
        raise LengthMismatch("truth has " + str(truth.size) + " labels, pred has " + str(pred.size))
    classes, truth_index = np.unique(truth, return_inverse=True)
    groups, pred_index = np.unique(pred, return_inverse=True)
    size = max(classes.size, groups.size)
    counts = np.zeros((size, size), dtype=int)
    np.add.at(counts, (truth_index, pred_index), 1)
    return ContingencyTable(counts, classes, groups, counts.sum(axis=1), counts.sum(axis=0))


def clustering_accuracy(truth, pred):
    table = contingency_table(truth, pred)
    total = table.counts.sum()
    if total == 0:
        return 100.0
    rows, cols = linear_sum_assignment(-table.counts)
    return 100.0 * table.counts[rows, cols].sum() / total


def fscore_matrix(table):
    counts = table.counts.astype(float)
    with np.errstate(divide='ignore', invalid='ignore'):
        precision = np.where(table.group_sizes > 0, counts / table.group_sizes[None, :], 0.0)
        recall = np.where(table.class_sizes[:, None] > 0, counts / table.class_sizes[:, None], 0.0)
        fscores = np.where(counts > 0, 2.0 * precision * recall / (precision + recall), 0.0)
    return fscores


def clustering_fscore(truth, pred):
    """Average over true classes of F_{i, pi(i)} under the best matching pi."""
    table = contingency_table(truth, pred)
    if table.classes.size == 0:
        return 100.0
    fscores = fscore_matrix(table)
    rows, cols = linear_sum_assignment(-fscores)
    return 100.0 * fscores[rows, cols].sum() / table.classes.size


def imbalance(selected_class_counts):
    """1 - entropy of the class proportions, with logarithms in base n."""
    counts = np.asarray(selected_class_counts, dtype=float)
    total = counts.sum()
    if counts.size == 0 or total <= 0:
        raise EmptySelection("No exemplars were selected")
    if counts.size == 1:
        return 0.0
    proportions = counts[counts > 0] / total
    entropy = -np.sum(proportions * np.log(proportions)) / np.log(counts.size)
    return float(min(max(1.0 - entropy, 0.0), 1.0))


def subspace_preserving_rate(codes, exemplar_labels, point_labels, with_excluded=False):
    """Mean fraction of l1 mass on exemplars of the point's own class; zero codes are left out.

    With with_excluded the number of zero codes left out is returned as well.
    """
    exemplar_labels = np.asarray(exemplar_labels)
    rates = []
    excluded = 0
    for code, label in zip(codes, point_labels):
        coeffs = np.abs(code.coeffs if isinstance(code, SparseCode) else np.asarray(code, dtype=float))
        mass = coeffs.sum()
        if mass == 0:
            excluded += 1
            continue
        rates.append(coeffs[exemplar_labels == label].sum() / mass)
    if excluded:
        logger.warning(str(excluded) + " zero codes left out of the subspace-preserving rate")
    rate = float(np.mean(rates)) if rates else float('nan')
    if with_excluded:
        return rate, excluded
    return rate


def metrics_report(truth=None, pred=None, exemplar_counts=None, codes=None, exemplar_labels=None):
    report = {'accuracy': None, 'fscore': None, 'imbalance': None, 'sp_rate': None, 'sp_excluded': None}
    if truth is not None and pred is not None:
        report['accuracy'] = clustering_accuracy(truth, pred)
        report['fscore'] = clustering_fscore(truth, pred)
    if exemplar_counts is not None:
        report['imbalance'] = imbalance(exemplar_counts)
    if codes is not None and exemplar_labels is not None and truth is not None:
        report['sp_rate'], report['sp_excluded'] = subspace_preserving_rate(codes, exemplar_labels, truth,
                                                                            with_excluded=True)
    return report
