import csv
import sys
import logging
import numpy as np
from sklearn.decomposition import PCA
from constants import *
from models import DataMatrix, SubspaceSpec
from lib.errors import ZeroColumn, BadDim, InvalidSpec, ParseError, RaggedRows, ValidationError

logger = logging.getLogger('exsel.dataset')


def make_rng(seed):
    """Counter-based generator determined by the seed alone."""
    return np.random.Generator(np.random.Philox(int(seed)))


def normalize_columns(m):
    norms = np.linalg.norm(m.points, axis=0)
    small = np.flatnonzero(norms < ZERO_COLUMN_NORM)
    if small.size:
        raise ZeroColumn(int(small[0]))
    # exact unit columns are left untouched so normalization is idempotent bitwise
    norms = np.where(norms == 1.0, 1.0, norms)
    return DataMatrix(m.points / norms, m.labels)


def pca_project(m, target_dim):
    if not 1 <= target_dim <= min(m.dim, m.count):
        raise BadDim("target_dim must lie in [1, " + str(min(m.dim, m.count)) + "], got " + str(target_dim))
    pca = PCA(n_components=target_dim, svd_solver='full')
    projected = pca.fit_transform(m.points.T).T
    logger.debug("PCA kept " + str(float(np.sum(pca.explained_variance_ratio_))) + " of the variance")
    return DataMatrix(projected, m.labels)


def preprocess(m, target_dim=None):
    """Optional PCA followed by column normalization."""
    if target_dim is not None:
        m = pca_project(m, target_dim)
    return normalize_columns(m)


def validate_spec(spec):
    if len(spec.dims) < 1 or len(spec.dims) != len(spec.counts):
        raise InvalidSpec("dims and counts must be non-empty and of equal length")
    if spec.ambient_dim < 1:
        raise InvalidSpec("Ambient dimension must be positive")
    for d, n in zip(spec.dims, spec.counts):
        if d < 1:
            raise InvalidSpec("Subspace dimensions must be at least 1")
        if n < d:
            raise InvalidSpec("Subspace of dimension " + str(d) + " needs at least " + str(d)
                              + " points, got " + str(n))
        if d > spec.ambient_dim:
            raise InvalidSpec("Subspace dimension " + str(d) + " exceeds ambient dimension "
                              + str(spec.ambient_dim))
    if spec.noise_sigma < 0:
        raise InvalidSpec("noise_sigma must be nonnegative")
    if sum(spec.dims) > spec.ambient_dim:
        logger.warning("Subspace dimensions sum to " + str(sum(spec.dims)) + " > D=" + str(spec.ambient_dim)
                       + "; the subspaces are not independent")


def synth_union_of_subspaces(spec):
    validate_spec(spec)
    rng = make_rng(spec.seed)
    blocks = []
    for d, n in zip(spec.dims, spec.counts):
        basis, _ = np.linalg.qr(rng.standard_normal((spec.ambient_dim, d)))
        coefficients = rng.standard_normal((d, n))
        coefficients /= np.linalg.norm(coefficients, axis=0)
        blocks.append(basis @ coefficients)
    points = np.hstack(blocks)
    if spec.noise_sigma > 0:
        points = points + spec.noise_sigma * rng.standard_normal(points.shape)
    labels = np.repeat(np.arange(len(spec.dims)), spec.counts)
    logger.info("Generated " + str(points.shape[1]) + " points on " + str(len(spec.dims)) + " subspaces of R^"
                + str(spec.ambient_dim))
    return normalize_columns(DataMatrix(points, labels))


def load_csv(path, with_labels=False):
    with open(path, mode='rt', newline='') as file:
        return read_csv(file, with_labels)


def read_csv(file, with_labels=False):
    reader = csv.reader(file, delimiter=',')
    rows = []
    labels = []
    width = None
    header_seen = not with_labels
    for row in reader:
        if not row:
            continue
        if not header_seen:
            if row[-1].strip() != LABEL_COLUMN:
                raise ParseError(reader.line_num, "expected a header ending in '" + LABEL_COLUMN + "'")
            header_seen = True
            continue
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise RaggedRows(reader.line_num, width, len(row))
        values = row[:-1] if with_labels else row
        try:
            rows.append([float(value) for value in values])
        except ValueError:
            raise ParseError(reader.line_num)
        if with_labels:
            try:
                labels.append(int(row[-1]))
            except ValueError:
                raise ParseError(reader.line_num, "label '" + row[-1] + "' is not an integer")
    if not rows or (with_labels and width < 2):
        raise ParseError(reader.line_num, "no data rows")
    logger.debug("Read " + str(len(rows)) + " rows")
    return DataMatrix(np.array(rows).T, labels if with_labels else None)


def save_csv(m, path=None, with_labels=False):
    if path is None or path == '-':
        write_csv(m, sys.stdout, with_labels)
    else:
        with open(path, mode='wt', newline='') as file:
            write_csv(m, file, with_labels)


def write_csv(m, file, with_labels=False):
    if with_labels and m.labels is None:
        raise ValidationError("Cannot write a label column for unlabeled data")
    writer = csv.writer(file, delimiter=',', lineterminator='\n')
    if with_labels:
        writer.writerow(['x' + str(i) for i in range(m.dim)] + [LABEL_COLUMN])
    for j in range(m.count):
        row = [format(value, CSV_FLOAT_FORMAT) for value in m.points[:, j]]
        if with_labels:
            row.append(str(int(m.labels[j])))
        writer.writerow(row)
