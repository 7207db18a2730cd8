"""Sparse-representation classification over labeled exemplars.

Each point is coded once over the full exemplar set; the code is then split
by class and the point goes to the class whose part reconstructs it best.
With lam = inf the codes are the exact l1-minimal representations.
"""
import math
import logging
import traceback
import numpy as np
from constants import *
from models import ClusterAssignment
import geometry
import lasso

logger = logging.getLogger('exsel.classify')


def class_residuals(data, exemplars, codes):
    """N x n matrix of ||x_j - sum over class-l exemplars of c_ij x_i||, columns in exemplars.classes order."""
    dictionary = data.points[:, exemplars.indices]
    residuals = np.empty((data.count, len(exemplars.classes)))
    for column, label in enumerate(exemplars.classes):
        members = exemplars.members(label)
        coeffs = np.vstack([code.coeffs[members] for code in codes]).T
        partial = dictionary[:, members] @ coeffs
        residuals[:, column] = np.linalg.norm(data.points - partial, axis=0)
    return residuals


def src_classify(data, exemplars, lam, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, n_jobs=None):
    dictionary = data.select(exemplars.indices)
    try:
        if math.isinf(lam):
            codes = geometry.exact_codes(dictionary, data, n_jobs)
        else:
            codes = lasso.solve_lasso_batch(dictionary, data, lam, tol, max_iter, n_jobs=n_jobs)
    except Exception as e:
        logger.error("Failed to code points for classification because " + str(e))
        logger.error(traceback.format_exc())
        raise
    residuals = class_residuals(data, exemplars, codes)
    classes = np.asarray(exemplars.classes, dtype=int)
    # argmin returns the first minimum, i.e. the lowest class id
    labels = classes[np.argmin(residuals, axis=1)]
    for index in exemplars.indices:
        labels[index] = exemplars.class_of[index]

    assignment = ClusterAssignment(labels, len(classes), {'exemplars': list(exemplars.indices),
                                                         'classes': classes.tolist()})
    assignment.codes = codes
    assignment.residuals = residuals
    logger.info("Classified " + str(data.count) + " points into " + str(len(classes)) + " classes")
    return assignment
