import numpy as np
import pytest
import dataset
from models import DataMatrix, SubspaceSpec


@pytest.fixture
def unit_data():
    """Factory for random unit-norm datasets."""
    def make(dim, count, seed):
        points = np.random.default_rng(seed).standard_normal((dim, count))
        return DataMatrix(points / np.linalg.norm(points, axis=0))
    return make


@pytest.fixture
def two_subspaces():
    """Two independent 3-dimensional subspaces of R^10, 25 and 35 points."""
    return dataset.synth_union_of_subspaces(SubspaceSpec(10, [3, 3], [25, 35], 0.0, 11))
