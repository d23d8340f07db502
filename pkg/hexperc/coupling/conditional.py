"""conditional.py

Exact Conditional Sampling by Rejection over Counter-Based Sample Indices, and the
Picklable Events the Experiments Condition On

"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache

from ..arms.arm_events import arm_event, hole_arms_event, hole_one_arm_event
from ..connectivity.clusters import has_crossing
from ..errors import BudgetExhaustedError
from ..lattice.geometry import box_quad
from ..runner.sharding import map_indices
from ..sampling.configuration import sample

logger = logging.getLogger(__name__)

MIN_BATCH = 64


@dataclass(frozen=True)
class Always:
    def __call__(self, config):
        return True


@dataclass(frozen=True)
class SiteOpen:
    site: tuple

    def __call__(self, config):
        return config.is_open(self.site)


@dataclass(frozen=True)
class SiteState:
    site: tuple

    def __call__(self, config):
        return int(config.is_open(self.site))


@dataclass(frozen=True)
class ArmsIn:
    """Arm Event in an Annulus"""

    annulus: object
    pattern: str = "OCOC"

    def __call__(self, config):
        return arm_event(config, self.annulus, self.pattern)


@dataclass(frozen=True)
class ArmsFromHole:
    """Four Alternating Arms from a Hole Box to an Outer Box, Sides Optionally Prescribed"""

    hole_box: object
    outer_box: object
    prescribed: bool = False

    def __call__(self, config):
        return hole_arms_event(config, self.hole_box, self.outer_box, self.prescribed)


@dataclass(frozen=True)
class OpenArmFromHole:
    hole_box: object
    outer_box: object

    def __call__(self, config):
        return hole_one_arm_event(config, self.hole_box, self.outer_box)


@lru_cache(maxsize=16)
def _box_quad(box, mesh):
    return box_quad(box, mesh)


@dataclass(frozen=True)
class CrossesBox:
    """Open Left-Right Crossing of a Box"""

    box: object

    def __call__(self, config):
        return has_crossing(config, _box_quad(self.box, config.mesh))


@dataclass(frozen=True)
class AllOf:
    events: tuple

    def __call__(self, config):
        return all(event(config) for event in self.events)


@dataclass(frozen=True)
class StatisticEquals:
    """Whether a Statistic of the Configuration Takes a Given Value"""

    statistic: object
    value: object

    def __call__(self, config):
        return self.statistic(config) == self.value


@dataclass
class ConditionalSampler:
    """
    Rejection Sampler for the Critical Law on a Region Conditioned on an Event

    Proposals are the sample indices start, start + 1, ... of the run seed; accepted
    configurations are exactly distributed as the unconditional law restricted to the
    event. attempts and accepted count every proposal drawn through this sampler.
    """

    region: object
    predicate: object
    budget: int
    seed: int
    start: int = 0
    attempts: int = field(default=0, init=False)
    accepted: int = field(default=0, init=False)

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("rejection budget must be at least 1")

    @property
    def acceptance_rate(self):
        return self.accepted / self.attempts if self.attempts else 0.0


def sample_conditioned(sampler):
    """Next Accepted Configuration of a ConditionalSampler

    Parameters
    ----------
    sampler : ConditionalSampler
        The Sampler; its Index Stream Advances Past the Accepted Sample

    Returns
    -------
    Configuration

    Raises
    ------
    BudgetExhaustedError
        If budget Proposals Are Rejected in a Row
    """
    for _ in range(sampler.budget):
        config = sample(sampler.region, sampler.seed, sampler.start)
        sampler.start += 1
        sampler.attempts += 1
        if sampler.predicate(config):
            sampler.accepted += 1
            logger.debug("accepted sample %d after %d attempts", config.sample_index, sampler.attempts)
            return config
    raise BudgetExhaustedError("rejection budget exhausted", sampler.attempts, sampler.accepted)


@dataclass(frozen=True)
class _Attempt:
    region: object
    predicate: object
    statistic: object
    seed: int

    def __call__(self, index):
        config = sample(self.region, self.seed, index)
        if not self.predicate(config):
            return False, None
        return True, (self.statistic(config) if self.statistic is not None else None)


@dataclass
class ConditionalRun:
    """Statistic Values of the Accepted Samples, in Sample-Index Order"""

    values: list
    indices: list
    attempts: int
    accepted: int

    @property
    def acceptance_rate(self):
        return self.accepted / self.attempts if self.attempts else 0.0

    def to_row(self):
        return {
            "attempts": self.attempts,
            "accepted": self.accepted,
            "acceptance_rate": self.acceptance_rate,
        }


def run_conditioned(sampler, n, statistic=None, workers=1, min_accepted=1):
    """Draws Up to n Accepted Samples, Evaluating a Statistic on Each

    Proposals are examined in index order in batches spread over the workers; the
    first n accepted indices are kept, so the result does not depend on the worker
    count. Fewer than n samples are returned, with a warning, when the budget runs
    out after at least min_accepted acceptances.

    Parameters
    ----------
    sampler : ConditionalSampler
        Sampler with a Picklable Predicate
    n : int
        Wanted Number of Accepted Samples
    statistic : callable, optional
        Picklable Function of an Accepted Configuration
    workers : int
        Worker Processes
    min_accepted : int
        Fewest Accepted Samples the Caller Can Use

    Returns
    -------
    ConditionalRun

    Raises
    ------
    BudgetExhaustedError
        If Fewer than min_accepted Proposals Are Accepted Within the Budget
    """
    if n < 1:
        raise ValueError("conditional run needs n >= 1")
    if not 1 <= min_accepted <= n:
        raise ValueError("min_accepted must lie in [1, n]")
    job = _Attempt(sampler.region, sampler.predicate, statistic, sampler.seed)
    values, indices = [], []
    stop = sampler.start + sampler.budget
    position = sampler.start
    while len(values) < n and position < stop:
        missing = n - len(values)
        rate = (len(values) + 1) / (position - sampler.start + 1)
        batch = min(stop - position, max(MIN_BATCH, 4 * workers, int(2 * missing / rate)))
        results = map_indices(job, range(position, position + batch), workers)
        for offset, (accepted, value) in enumerate(results):
            if accepted and len(values) < n:
                values.append(value)
                indices.append(position + offset)
        position += batch
    attempts = (indices[-1] + 1 - sampler.start) if len(values) == n else position - sampler.start
    sampler.attempts += attempts
    sampler.accepted += len(values)
    sampler.start += attempts
    run = ConditionalRun(values, indices, attempts, len(values))
    if not values:
        raise BudgetExhaustedError("no sample satisfied the conditioning event", attempts, 0)
    if len(values) < min_accepted:
        raise BudgetExhaustedError(
            f"only {len(values)} of the {min_accepted} required samples were accepted", attempts, len(values)
        )
    if len(values) < n:
        logger.warning(
            "rejection budget exhausted with %d of %d samples (acceptance rate %.3g)",
            len(values),
            n,
            run.acceptance_rate,
        )
    logger.info("conditional run: %d accepted of %d attempts", run.accepted, run.attempts)
    return run


def conditional_marginal(sampler, site, n, workers=1):
    """Empirical Probability that a Site Is Open Under the Conditioned Law"""
    run = run_conditioned(sampler, n, SiteState(tuple(site)), workers)
    return sum(run.values) / len(run.values)
