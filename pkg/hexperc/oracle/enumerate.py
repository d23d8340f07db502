"""enumerate.py

Exact Probabilities and Expectations by Exhaustive Enumeration of Tiny Regions, and the
Golden-Value Store Keyed by Geometry Hash

"""
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from ..errors import OracleSizeError
from ..runner.sharding import map_indices
from ..sampling.configuration import Configuration

logger = logging.getLogger(__name__)

MAX_ORACLE_SITES = 22
_BLOCK_BITS = 12


def configuration_states(n_sites, start, stop):
    """States for Configuration Indices start..stop-1; Site j Is Bit j of the Index"""
    index = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n_sites, dtype=np.int64)
    return ((index[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def all_configurations(region):
    """Yields Every Configuration of a Tiny Region, in Index Order"""
    _check_size(region)
    states = configuration_states(len(region), 0, 1 << len(region))
    for state in states:
        yield Configuration(region, state)


def _check_size(region):
    if len(region) > MAX_ORACLE_SITES:
        raise OracleSizeError(
            f"region has {len(region)} sites, enumeration is capped at {MAX_ORACLE_SITES}"
        )


@dataclass(frozen=True)
class _BlockSum:
    region: object
    statistic: object
    block: int

    def __call__(self, index):
        n = len(self.region)
        start = index * self.block
        stop = min(start + self.block, 1 << n)
        total = 0
        for state in configuration_states(n, start, stop):
            total += int(self.statistic(Configuration(self.region, state)))
        return total


def _enumerated_sum(region, statistic, workers):
    _check_size(region)
    n = len(region)
    block = 1 << min(n, _BLOCK_BITS)
    n_blocks = (1 << n) // block
    logger.debug("enumerating %d configurations in %d blocks", 1 << n, n_blocks)
    return sum(map_indices(_BlockSum(region, statistic, block), range(n_blocks), workers))


def enumerate_probability(region, predicate, workers=1):
    """Exact Probability of an Event Under Critical Site Percolation

    Parameters
    ----------
    region : SiteSet
        At Most 22 Sites
    predicate : callable
        Configuration -> bool; Must Be Picklable When workers > 1
    workers : int
        Worker Processes Sharing the Configuration Index Range

    Returns
    -------
    Fraction
        Number of Satisfying Configurations over 2 ** len(region)

    Raises
    ------
    OracleSizeError
        If the Region Has More than 22 Sites
    """
    return Fraction(_enumerated_sum(region, predicate, workers), 1 << len(region))


def exact_expectation(region, statistic, workers=1):
    """Exact Mean of an Integer-Valued Statistic, Like a Pivotal or Important-Site Count"""
    return Fraction(_enumerated_sum(region, statistic, workers), 1 << len(region))


class GoldenStore:
    """
    Golden Oracle Values in JSON Files, One File per Geometry Hash

    Values are stored as exact fractions "p/q" under a statistic name.
    """

    def __init__(self, directory):
        self.directory = Path(directory)

    def _path(self, geometry_hash):
        return self.directory / f"{geometry_hash}.json"

    def load(self, geometry_hash):
        path = self._path(geometry_hash)
        if not path.exists():
            return {}
        with open(path, "r") as file:
            return json.load(file)

    def lookup(self, geometry_hash, name):
        """Stored Value or None"""
        value = self.load(geometry_hash).get(name)
        return None if value is None else Fraction(value)

    def record(self, geometry_hash, name, value):
        self.directory.mkdir(parents=True, exist_ok=True)
        values = self.load(geometry_hash)
        values[name] = str(Fraction(value))
        with open(self._path(geometry_hash), "w") as file:
            json.dump(values, file, indent=2, sort_keys=True)

    def check(self, geometry_hash, name, value):
        """Compares against the Stored Value, Recording It on First Use"""
        stored = self.lookup(geometry_hash, name)
        if stored is None:
            logger.info("recording golden value %s for %s: %s", name, geometry_hash[:12], value)
            self.record(geometry_hash, name, value)
            return True
        return stored == Fraction(value)
