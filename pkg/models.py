import enum
import logging
import numpy as np
from collections import namedtuple
from constants import *
from lib.errors import BadDim, LengthMismatch, InvalidProblem, ValidationError, NoExemplarsForClass

logger = logging.getLogger('exsel.models')


class SelectionMethods(enum.Enum):
    ffs = 'ffs'
    ffs_naive = 'ffs-naive'
    random = 'random'
    kcenters = 'kcenters'


class Checks(enum.Enum):
    gauge = 'gauge'
    covering = 'covering'
    lasso = 'lasso'
    threshold = 'threshold'

    @classmethod
    def _missing_(cls, value):
        if value in CHECK_ALIASES:
            return cls(CHECK_ALIASES[value])
        return None


SubspaceSpec = namedtuple('SubspaceSpec', 'ambient_dim dims counts noise_sigma seed')

SparseCode = namedtuple('SparseCode', 'coeffs residual objective gap iterations')

GramSolution = namedtuple('GramSolution', 'coeffs objective gap iterations')

CostReport = namedtuple('CostReport', 'per_point sup_value argmax_index')

TraceEntry = namedtuple('TraceEntry', 'selected f_value evals')

ContingencyTable = namedtuple('ContingencyTable', 'counts classes groups class_sizes group_sizes')


def as_points(matrix):
    if isinstance(matrix, DataMatrix):
        return matrix.points
    return np.asarray(matrix, dtype=float)


class DataMatrix(object):
    """Column-stacked data points x_1..x_N in R^D, optionally labeled.

    The points array is copied on construction and marked read-only, so a
    DataMatrix can be shared between worker threads.
    """

    def __init__(self, points, labels=None):
        points = np.array(points, dtype=float)
        if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
            raise BadDim("Data must be a non-empty D x N matrix, got shape " + str(points.shape))
        points.setflags(write=False)
        self.points = points

        if labels is not None:
            labels = np.array(labels, dtype=int)
            if labels.shape != (points.shape[1],):
                raise LengthMismatch("Expected " + str(points.shape[1]) + " labels, got " + str(labels.size))
            labels.setflags(write=False)
        self.labels = labels

    @property
    def dim(self):
        return self.points.shape[0]

    @property
    def count(self):
        return self.points.shape[1]

    def __len__(self):
        return self.count

    def __str__(self):
        return "DataMatrix(D=" + str(self.dim) + ", N=" + str(self.count) + \
            (", labeled" if self.labels is not None else "") + ")"

    def column(self, j):
        return self.points[:, j]

    def select(self, indices):
        indices = np.asarray(indices, dtype=int)
        labels = self.labels[indices] if self.labels is not None else None
        return DataMatrix(self.points[:, indices], labels)

    def classes(self):
        if self.labels is None:
            return np.array([], dtype=int)
        return np.unique(self.labels)

    def class_indices(self, label):
        if self.labels is None:
            raise ValidationError("Dataset carries no labels")
        return np.flatnonzero(self.labels == label)


class LassoProblem(object):
    def __init__(self, dictionary, target, lam):
        dictionary = as_points(dictionary)
        target = np.asarray(target, dtype=float)
        if dictionary.ndim != 2:
            raise InvalidProblem("Dictionary must be a D x M matrix")
        if target.shape != (dictionary.shape[0],):
            raise InvalidProblem("Target length " + str(target.size) + " does not match dictionary dimension "
                                 + str(dictionary.shape[0]))
        if not lam > 1:
            raise InvalidProblem("lambda must be greater than 1, got " + str(lam))
        if not np.isfinite(lam):
            raise InvalidProblem("lambda must be finite; code with geometry.exact_codes instead")
        if abs(np.linalg.norm(target) - 1.0) > UNIT_NORM_TOL:
            raise InvalidProblem("Target does not have unit norm")
        if dictionary.shape[1] > 0:
            norms = np.linalg.norm(dictionary, axis=0)
            bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_NORM_TOL)
            if bad.size:
                raise InvalidProblem("Dictionary column " + str(bad[0]) + " does not have unit norm")
        self.dictionary = dictionary
        self.target = target
        self.lam = float(lam)

    @property
    def size(self):
        return self.dictionary.shape[1]


class ExemplarSet(object):
    """Ordered exemplar indices with the per-iteration selection trace."""

    def __init__(self, indices, k, seed, lam=None, method=SelectionMethods.ffs, trace=None):
        self.indices = [int(i) for i in indices]
        if len(set(self.indices)) != len(self.indices):
            raise ValidationError("Exemplar indices must be distinct")
        self.k = int(k)
        self.seed = seed
        self.lam = lam
        self.method = SelectionMethods(method)
        self.trace = list(trace) if trace is not None else []

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __str__(self):
        return self.method.value + " exemplars " + str(self.indices)

    @property
    def evaluations(self):
        return sum(entry.evals for entry in self.trace)

    def to_dict(self):
        return {
            'indices': list(self.indices),
            'k': self.k,
            'lambda': self.lam,
            'seed': self.seed,
            'method': self.method.value,
            'evaluations': self.evaluations,
            'trace': [{'selected': entry.selected, 'f_value': entry.f_value, 'evals': entry.evals}
                      for entry in self.trace]
        }

    @classmethod
    def from_dict(cls, document):
        try:
            trace = [TraceEntry(int(entry['selected']), entry.get('f_value'), int(entry.get('evals', 0)))
                     for entry in document.get('trace', [])]
            return cls(document['indices'], document.get('k', len(document['indices'])), document.get('seed'),
                       lam=document.get('lambda'), method=document.get('method', SelectionMethods.ffs.value),
                       trace=trace)
        except (KeyError, TypeError) as e:
            raise ValidationError("Malformed exemplar document: missing or bad field " + str(e))


class AffinityGraph(object):
    """A = W + W^T over N points, with the per-row neighbor lists of W."""

    def __init__(self, affinity, neighbors):
        self.affinity = affinity
        self.neighbors = neighbors

    @property
    def size(self):
        return self.affinity.shape[0]

    def degrees(self):
        return np.asarray(self.affinity.sum(axis=1)).ravel()

    def isolated(self):
        return np.flatnonzero(self.degrees() == 0)


class ClusterAssignment(object):
    def __init__(self, labels, n_clusters, report=None):
        self.labels = np.asarray(labels, dtype=int)
        self.n_clusters = int(n_clusters)
        self.report = dict(report) if report is not None else {}
        self.exemplars = None
        self.codes = None
        self.residuals = None

    def __len__(self):
        return self.labels.size

    def __str__(self):
        return "ClusterAssignment(N=" + str(self.labels.size) + ", n_clusters=" + str(self.n_clusters) + ")"


class LabeledExemplars(object):
    """Exemplar indices with their class ids; every expected class must own at least one exemplar."""

    def __init__(self, indices, class_of, classes=None):
        self.indices = [int(i) for i in indices]
        if len(set(self.indices)) != len(self.indices):
            raise ValidationError("Every exemplar index must appear once")
        self.class_of = {int(i): int(class_of[i]) for i in self.indices}
        present = sorted(set(self.class_of.values()))
        if classes is None:
            classes = present
        self.classes = sorted(int(c) for c in classes)
        for label in self.classes:
            if label not in present:
                raise NoExemplarsForClass(label)
        stray = [label for label in present if label not in self.classes]
        if stray:
            raise ValidationError("Exemplar classes " + str(stray) + " are not among the expected classes")

    @classmethod
    def from_dataset(cls, data, indices, classes=None):
        if data.labels is None:
            raise ValidationError("Dataset carries no labels to read exemplar classes from")
        return cls(indices, {int(i): int(data.labels[i]) for i in indices}, classes)

    @classmethod
    def from_mapping(cls, mapping, classes=None):
        try:
            class_of = {int(key): int(value) for key, value in mapping.items()}
        except (TypeError, ValueError) as e:
            raise ValidationError("Exemplar labels must map integer indices to integer classes: " + str(e))
        return cls(sorted(class_of), class_of, classes)

    def labels(self):
        return np.array([self.class_of[i] for i in self.indices], dtype=int)

    def members(self, label):
        """Positions (within self.indices) of the exemplars of one class."""
        return [position for position, index in enumerate(self.indices) if self.class_of[index] == label]


class SymmetricHull(object):
    """K_0 = conv(+-X_0), stored by its 2M generators."""

    def __init__(self, exemplars):
        exemplars = as_points(exemplars)
        if exemplars.ndim != 2 or exemplars.shape[1] < 1:
            raise BadDim("Hull needs a D x M exemplar matrix with M >= 1")
        norms = np.linalg.norm(exemplars, axis=0)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            raise ValidationError("Hull generators must have unit norm")
        self.exemplars = exemplars
        self.generators = np.hstack([exemplars, -exemplars])

    @property
    def dim(self):
        return self.exemplars.shape[0]

    @property
    def count(self):
        return self.exemplars.shape[1]


class RunConfig(object):
    """Parsed command-line settings, echoed into every JSON output."""

    def __init__(self, subcommand, **settings):
        self.subcommand = subcommand
        self.settings = settings
        self.validate()

    def __getattr__(self, name):
        try:
            return self.__dict__['settings'][name]
        except KeyError:
            raise AttributeError(name)

    @classmethod
    def from_namespace(cls, namespace):
        settings = {key: value for key, value in vars(namespace).items() if key not in ('handler', 'subcommand')}
        return cls(namespace.subcommand, **settings)

    def validate(self):
        settings = self.settings
        if settings.get('lam') is not None and not settings['lam'] > 1:
            raise ValidationError("--lambda must be greater than 1")
        if settings.get('lam') is not None and np.isinf(settings['lam']) and self.subcommand != 'classify':
            raise ValidationError("--lambda inf is only accepted by classify")
        if settings.get('k') is not None and settings['k'] < 0:
            raise ValidationError("--k must be nonnegative")
        if settings.get('t') is not None and settings['t'] < 1:
            raise ValidationError("--t must be at least 1")
        if settings.get('n_clusters') is not None and settings['n_clusters'] < 1:
            raise ValidationError("--n-clusters must be at least 1")
        if settings.get('tol') is not None and not settings['tol'] > 0:
            raise ValidationError("--tol must be positive")
        if settings.get('max_iter') is not None and settings['max_iter'] < 1:
            raise ValidationError("--max-iter must be at least 1")
        if settings.get('threads') is not None and settings['threads'] < 1:
            raise ValidationError("--threads must be at least 1")
        if settings.get('trials') is not None and settings['trials'] < 1:
            raise ValidationError("--trials must be at least 1")

    def as_dict(self):
        document = {'subcommand': self.subcommand}
        for key, value in self.settings.items():
            document[key] = value.value if isinstance(value, enum.Enum) else value
        return document
