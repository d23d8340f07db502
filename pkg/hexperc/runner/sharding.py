"""sharding.py

Farms Per-Sample Work Across Worker Processes, Reducing in Sample-Index Order

"""
import logging
import multiprocessing

logger = logging.getLogger(__name__)


def map_indices(func, indices, workers=1):
    """Applies func to Every Sample Index

    Parameters
    ----------
    func : callable
        Picklable Function of One Sample Index
    indices : iterable of int
        Sample Indices
    workers : int
        Number of Worker Processes; 1 Runs Inline

    Returns
    -------
    list
        Results in the Order of indices, Whatever the Worker Count
    """
    indices = list(indices)
    if workers <= 1 or len(indices) < 2:
        return [func(index) for index in indices]
    chunksize = max(1, len(indices) // (4 * workers))
    logger.debug("sharding %d samples over %d workers", len(indices), workers)
    with multiprocessing.Pool(processes=workers) as pool:
        return pool.map(func, indices, chunksize=chunksize)
