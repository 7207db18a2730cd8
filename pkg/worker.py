import logging
from joblib import Parallel, delayed

logger = logging.getLogger('exsel.worker')

PREFER = 'threads'


def parallel_map(func, items, n_jobs=None):
    """Apply func to every item, results in input order.

    n_jobs of None or 1 runs inline; otherwise a joblib thread pool of at most
    n_jobs workers is used. numpy and the solver kernels release the GIL, and
    threads keep the shared read-only arrays unpickled.
    """
    items = list(items)
    if n_jobs is None or n_jobs == 1 or len(items) < 2:
        return [func(item) for item in items]
    logger.debug("Dispatching " + str(len(items)) + " jobs to " + str(n_jobs) + " threads")
    return Parallel(n_jobs=n_jobs, prefer=PREFER)(delayed(func)(item) for item in items)
