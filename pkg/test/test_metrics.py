import itertools
import math
import numpy as np
import pytest
import metrics
from models import SparseCode
from lib.errors import LengthMismatch, EmptySelection


def brute_force_accuracy(truth, pred):
    classes = sorted(set(truth))
    groups = sorted(set(pred))
    size = max(len(classes), len(groups))
    groups = groups + [None] * (size - len(groups))
    classes = classes + [object()] * (size - len(classes))
    best = 0
    for perm in itertools.permutations(groups):
        matched = sum(1 for t, p in zip(truth, pred) if perm[classes.index(t)] == p)
        best = max(best, matched)
    return 100.0 * best / len(truth)


def test_accuracy_is_permutation_invariant():
    truth = [0, 0, 1, 1, 2, 2]
    assert metrics.clustering_accuracy(truth, [5, 5, 3, 3, 9, 9]) == 100.0
    assert metrics.clustering_accuracy(truth, [1, 1, 2, 2, 0, 0]) == 100.0


def test_accuracy_counts_best_matching():
    assert metrics.clustering_accuracy([0, 0, 0, 1, 1, 1], [0, 0, 1, 1, 1, 1]) == pytest.approx(500.0 / 6.0)


def test_accuracy_with_more_groups_than_classes():
    assert metrics.clustering_accuracy([0, 0, 0, 0], [0, 0, 1, 2]) == 50.0


@pytest.mark.parametrize('seed', range(10))
def test_accuracy_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    truth = rng.integers(0, 4, 30).tolist()
    pred = rng.integers(0, int(rng.integers(2, 6)), 30).tolist()
    assert metrics.clustering_accuracy(truth, pred) == pytest.approx(brute_force_accuracy(truth, pred))


def test_accuracy_length_mismatch():
    with pytest.raises(LengthMismatch):
        metrics.clustering_accuracy([0, 1], [0])


def test_contingency_table_is_square():
    table = metrics.contingency_table([0, 0, 1], [4, 5, 6])
    assert table.counts.shape == (3, 3)
    assert table.counts.sum() == 3
    assert list(table.class_sizes) == [2, 1, 0]
    assert list(table.groups) == [4, 5, 6]


def test_fscore_perfect_clustering():
    assert metrics.clustering_fscore([0, 0, 1, 1], [1, 1, 0, 0]) == pytest.approx(100.0)


def test_fscore_hand_computed():
    # class 0 = {0, 1, 2}, class 1 = {3}; one group holds everything
    # F = 2 * (3/4) * 1 / (3/4 + 1) = 6/7 for class 0, unmatched class 1 scores 0
    assert metrics.clustering_fscore([0, 0, 0, 1], [0, 0, 0, 0]) == pytest.approx(100.0 * (6.0 / 7.0) / 2.0)


def test_fscore_matches_brute_force():
    rng = np.random.default_rng(3)
    truth = rng.integers(0, 3, 25)
    pred = rng.integers(0, 3, 25)
    table = metrics.contingency_table(truth, pred)
    scores = metrics.fscore_matrix(table)
    best = max(sum(scores[i, perm[i]] for i in range(3)) for perm in itertools.permutations(range(3)))
    assert metrics.clustering_fscore(truth, pred) == pytest.approx(100.0 * best / 3.0)


@pytest.mark.parametrize('counts, expected', [
    ([5, 5], 0.0),
    ([4, 4, 4], 0.0),
    ([10, 0], 1.0),
    ([7], 0.0),
])
def test_imbalance_extremes(counts, expected):
    assert metrics.imbalance(counts) == pytest.approx(expected, abs=1e-12)


def test_imbalance_hand_computed():
    p = np.array([0.25, 0.75])
    expected = 1.0 + np.sum(p * np.log(p)) / math.log(2)
    assert metrics.imbalance([1, 3]) == pytest.approx(expected)


def test_imbalance_needs_exemplars():
    with pytest.raises(EmptySelection):
        metrics.imbalance([0, 0])
    with pytest.raises(EmptySelection):
        metrics.imbalance([])


def test_subspace_preserving_rate():
    codes = [np.array([1.0, 0.0, 0.0]), np.array([0.5, 0.0, 0.5]), SparseCode(np.array([0.0, 2.0, 0.0]), None, 0, 0, 0)]
    rate = metrics.subspace_preserving_rate(codes, [0, 0, 1], [0, 1, 1])
    assert rate == pytest.approx((1.0 + 0.5 + 0.0) / 3.0)


def test_subspace_preserving_rate_skips_zero_codes():
    codes = [np.zeros(2), np.array([1.0, 0.0])]
    assert metrics.subspace_preserving_rate(codes, [0, 1], [1, 0]) == 1.0
    assert math.isnan(metrics.subspace_preserving_rate([np.zeros(2)], [0, 1], [0]))
    assert metrics.subspace_preserving_rate(codes, [0, 1], [1, 0], with_excluded=True) == (1.0, 1)


def test_metrics_report_counts_zero_codes():
    codes = [np.zeros(2), np.array([1.0, 0.0]), np.array([0.0, 3.0])]
    report = metrics.metrics_report([0, 0, 1], [0, 0, 1], codes=codes, exemplar_labels=[0, 1])
    assert report['sp_rate'] == 1.0
    assert report['sp_excluded'] == 1


def test_metrics_report_fields():
    report = metrics.metrics_report([0, 0, 1, 1], [0, 0, 1, 1], exemplar_counts=[2, 2])
    assert report['accuracy'] == 100.0
    assert report['fscore'] == pytest.approx(100.0)
    assert report['imbalance'] == pytest.approx(0.0)
    assert report['sp_rate'] is None
    assert metrics.metrics_report() == {'accuracy': None, 'fscore': None, 'imbalance': None, 'sp_rate': None,
                                        'sp_excluded': None}
