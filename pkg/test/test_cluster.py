import numpy as np
import pytest
from scipy import sparse
import cluster
import dataset
import metrics
from models import AffinityGraph, DataMatrix, SparseCode, SubspaceSpec
from lib.errors import ZeroCode, EmptyGraph, ValidationError


def unit_columns(*columns):
    points = np.column_stack([np.asarray(column, dtype=float) for column in columns])
    return points / np.linalg.norm(points, axis=0)


def two_block_codes():
    return np.array([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [1.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 1.0],
        [1.0, 0.5, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.3],
    ])


def two_cliques():
    block = np.ones((3, 3)) - np.eye(3)
    affinity = sparse.csr_matrix(np.block([[block, np.zeros((3, 3))], [np.zeros((3, 3)), block]]))
    return AffinityGraph(affinity, None)


def test_knn_graph_is_symmetric_without_self_loops():
    graph = cluster.build_knn_graph(two_block_codes(), 2)
    dense = graph.affinity.toarray()
    assert np.array_equal(dense, dense.T)
    assert np.all(np.diag(dense) == 0)
    assert set(np.unique(dense)) <= {0, 1, 2}


def test_knn_graph_links_only_positive_similarities():
    dense = cluster.build_knn_graph(two_block_codes(), 3).affinity.toarray()
    first_block = [0, 1, 4, 6]
    second_block = [2, 3, 5, 7]
    assert not np.any(dense[np.ix_(first_block, second_block)])


def test_knn_graph_neighbor_lists():
    graph = cluster.build_knn_graph(two_block_codes(), 2)
    assert list(graph.neighbors[0]) == [6, 4]
    assert list(graph.neighbors[4]) == [6, 0]
    # mutual neighbors are counted from both sides
    assert graph.affinity[0, 6] == 2


def test_knn_graph_ties_keep_lower_index():
    codes = np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
    graph = cluster.build_knn_graph(codes, 2)
    assert list(graph.neighbors[3]) == [0, 1]


def test_knn_graph_rejects_zero_code():
    codes = two_block_codes()
    codes[5] = 0.0
    with pytest.raises(ZeroCode) as info:
        cluster.build_knn_graph(codes, 2)
    assert info.value.index == 5


def test_knn_graph_rejects_bad_t():
    with pytest.raises(ValidationError):
        cluster.build_knn_graph(two_block_codes(), 0)


def test_knn_graph_accepts_sparse_codes():
    codes = [SparseCode(row, None, None, 0.0, 0) for row in two_block_codes()]
    dense = cluster.build_knn_graph(codes, 2).affinity.toarray()
    assert np.array_equal(dense, cluster.build_knn_graph(two_block_codes(), 2).affinity.toarray())


def test_spectral_splits_components():
    assignment = cluster.spectral_cluster(two_cliques(), 2, seed=0)
    assert list(assignment.labels) == [0, 0, 0, 1, 1, 1]
    assert assignment.report['isolated'] == []


def test_spectral_is_seed_stable():
    graph = cluster.build_knn_graph(two_block_codes(), 2)
    first = cluster.spectral_cluster(graph, 2, seed=5).labels
    second = cluster.spectral_cluster(graph, 2, seed=5).labels
    assert np.array_equal(first, second)


def test_spectral_single_cluster():
    assignment = cluster.spectral_cluster(two_cliques(), 1, seed=0)
    assert list(assignment.labels) == [0] * 6


def test_spectral_empty_graph():
    with pytest.raises(EmptyGraph):
        cluster.spectral_cluster(AffinityGraph(sparse.csr_matrix((4, 4)), None), 2, seed=0)


def test_spectral_reports_isolated_vertices():
    dense = np.zeros((7, 7))
    dense[:6, :6] = two_cliques().affinity.toarray()
    assignment = cluster.spectral_cluster(AffinityGraph(sparse.csr_matrix(dense), None), 2, seed=0)
    assert assignment.report['isolated'] == [6]
    assert len(assignment.labels) == 7


def test_spectral_rejects_too_many_clusters():
    with pytest.raises(ValidationError):
        cluster.spectral_cluster(two_cliques(), 7, seed=0)


def test_assign_from_codes_with_zero_code():
    data = DataMatrix(unit_columns([1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 1, 0, 0],
                                   [0, 0, 1, 1], [1, 0.5, 0, 0], [0, 0, 1, 0.3], [0, 0.1, 0.9, 0.1]))
    codes = list(two_block_codes()) + [np.zeros(4)]
    assignment = cluster.assign_from_codes(data, codes, [0, 1, 2, 3], 2, 2, seed=0)
    assert list(assignment.labels) == [0, 0, 1, 1, 0, 1, 0, 1, 1]
    assert assignment.report['zero_codes'] == [8]
    assert assignment.report['edges'] > 0


def test_esc_clusters_independent_subspaces(two_subspaces):
    assignment = cluster.esc_pipeline(two_subspaces, 1e4, 12, 6, 2, seed=0)
    assert len(assignment.labels) == two_subspaces.count
    assert assignment.report['exemplars'] == assignment.exemplars.indices
    assert len(assignment.codes) == two_subspaces.count
    assert metrics.clustering_accuracy(two_subspaces.labels, assignment.labels) >= 90.0
    sp_rate = metrics.subspace_preserving_rate(assignment.codes, two_subspaces.labels[assignment.exemplars.indices],
                                               two_subspaces.labels)
    assert sp_rate >= 0.99


def test_esc_is_deterministic(two_subspaces):
    first = cluster.esc_pipeline(two_subspaces, 100.0, 10, 3, 2, seed=4)
    second = cluster.esc_pipeline(two_subspaces, 100.0, 10, 3, 2, seed=4)
    assert np.array_equal(first.labels, second.labels)
    assert first.exemplars.indices == second.exemplars.indices


def test_self_expressive_codes_skip_the_point_itself():
    data = dataset.synth_union_of_subspaces(SubspaceSpec(6, [2, 2], [8, 8], 0.0, 3))
    codes = cluster.self_expressive_codes(data, 50.0)
    assert len(codes) == data.count
    for j, code in enumerate(codes):
        assert code.coeffs.shape == (data.count,)
        assert code.coeffs[j] == 0.0


def test_ssc_baseline_clusters_independent_subspaces():
    data = dataset.synth_union_of_subspaces(SubspaceSpec(6, [2, 2], [12, 12], 0.0, 5))
    assignment = cluster.ssc_pipeline(data, 100.0, 4, 2, seed=0)
    assert metrics.clustering_accuracy(data.labels, assignment.labels) >= 90.0


def three_cliques():
    blocks = [np.ones((size, size)) - np.eye(size) for size in (3, 4, 3)]
    dense = np.zeros((10, 10))
    start = 0
    for block in blocks:
        end = start + block.shape[0]
        dense[start:end, start:end] = block
        start = end
    return AffinityGraph(sparse.csr_matrix(dense), None)


def test_spectral_more_components_than_clusters():
    first = cluster.spectral_cluster(three_cliques(), 2, seed=3)
    second = cluster.spectral_cluster(three_cliques(), 2, seed=3)
    assert np.array_equal(first.labels, second.labels)
    assert first.report['components'] == 3
    for members in ([0, 1, 2], [3, 4, 5, 6], [7, 8, 9]):
        assert len(set(first.labels[members])) == 1
    assert set(first.labels) == {0, 1}


def test_spectral_one_cluster_per_component():
    assignment = cluster.spectral_cluster(three_cliques(), 3, seed=0)
    assert list(assignment.labels) == [0, 0, 0, 1, 1, 1, 1, 2, 2, 2]


def split_class_codes():
    return np.array([
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 0.01, 0.0, 0.0],
        [0.01, 1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0, 0.01],
    ])


def test_bridge_components_links_shared_atoms():
    codes = split_class_codes()
    graph = cluster.build_knn_graph(codes, 1)
    bridged = cluster.bridge_components(graph, codes).affinity.toarray()
    assert bridged[1, 2] > 0 and bridged[0, 2] > 0
    assert not np.any(bridged[:4, 4:])
    # edges inside a component are left alone
    assert bridged[0, 1] == graph.affinity[0, 1]


def test_assign_rejoins_split_subspace():
    codes = split_class_codes()
    assignment = cluster.assign_from_codes(DataMatrix(np.eye(6)), list(codes), [0, 3, 4], 1, 2, seed=0)
    assert list(assignment.labels) == [0, 0, 0, 0, 1, 1]
    assert assignment.report['components'] == 2
