"""separation.py

Separation of Interface Ends Under the Four-Arm Event, Total-Variation Coupling of Face
Fingerprints Under Different Outer Conditions, Outermost Open Circuits, and Relative
Qualities of Endpoint Sets

"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform

from ..arms.arm_events import arm_event
from ..connectivity.clusters import dense_labels, label_components
from ..errors import GeometryError
from ..explore.interfaces import annulus_geometry, annulus_layers, interface_quality, qualities, sector_sequence
from ..lattice.geometry import Annulus, Box, box_quad, box_sites
from ..runner.sharding import map_indices
from ..sampling.configuration import CLOSED, OPEN, sample
from ..stats.estimates import Estimate, tv_estimate
from ..stats.fits import fit_power_law
from .conditional import (
    AllOf,
    ArmsFromHole,
    ArmsIn,
    ConditionalSampler,
    OpenArmFromHole,
    StatisticEquals,
    run_conditioned,
)

logger = logging.getLogger(__name__)

SEPARATION_THRESHOLD = 0.25
DEFAULT_BINS = 12
OUTER_CONDITIONS = ("box", "sides", "tilted")
_BUDGET_PER_SAMPLE = 10_000
MIN_ACCEPTED_FRACTION = 0.5


def _angle_bin(points, center, bins):
    angles = np.arctan2(points[:, 1] - center[1], points[:, 0] - center[0])
    return (np.floor((angles + np.pi) / (2.0 * np.pi) * bins).astype(np.int64)) % bins


def _budget(n, budget):
    return budget or n * _BUDGET_PER_SAMPLE


def _min_accepted(n):
    """Fewest Accepted Samples a Total-Variation Arm Is Computed From"""
    return min(n, max(2, math.ceil(MIN_ACCEPTED_FRACTION * n)))


# ---------------------------------------------------------------------------
# separation


@dataclass(frozen=True)
class InnerQuality:
    annulus: Annulus

    def __call__(self, config):
        return qualities(config, self.annulus)[0]


@dataclass
class SeparationResult:
    estimate: Estimate
    histogram: np.ndarray
    bin_edges: np.ndarray
    attempts: int
    acceptance_rate: float

    def to_row(self):
        row = self.estimate.to_row()
        row.update(attempts=self.attempts, acceptance_rate=self.acceptance_rate)
        return row


def separation_statistic(
    r, R, n, seed, mesh=1.0, threshold=SEPARATION_THRESHOLD, hist_bins=10, budget=None, workers=1
):
    """Probability that the Interface Ends at Radius r Are Well Separated, Given Four Arms

    Samples are conditioned by rejection on four alternating arms across A(r, R); the
    statistic is the indicator that the interior quality of the crossing interfaces
    exceeds threshold.

    Returns
    -------
    SeparationResult
        Indicator Estimate and a Histogram of the Interior Quality

    Raises
    ------
    BudgetExhaustedError
        If No Sample Shows Four Arms
    """
    annulus = Annulus((0.0, 0.0), r, R)
    region = annulus_layers(annulus, mesh).full
    sampler = ConditionalSampler(region, ArmsIn(annulus, "OCOC"), _budget(n, budget), seed)
    run = run_conditioned(sampler, n, InnerQuality(annulus), workers)
    values = np.asarray(run.values, dtype=float)
    estimate = Estimate.from_samples(
        (values > threshold).astype(np.int64),
        seed,
        {"r": r, "R": R, "mesh": mesh, "threshold": threshold},
    )
    histogram, edges = np.histogram(values, bins=hist_bins, range=(0.0, max(2.0, float(values.max()))))
    logger.info("separation r=%g R=%g: %.4g +- %.2g", r, R, estimate.mean, estimate.stderr)
    return SeparationResult(estimate, histogram, edges, run.attempts, run.acceptance_rate)


# ---------------------------------------------------------------------------
# face fingerprints


def open_sectors_joined(config, layers, labels, sequence):
    """Whether the Two Open Sectors of Four Crossing Interfaces Connect Through the Hole"""
    open_labels = [label for label, color, _ in sequence if color == OPEN]
    if len(sequence) != 4 or len(open_labels) != 2:
        return False
    full = layers.full
    sites = layers.sites
    state = config.state_at(sites.coords)
    member = np.zeros(len(full), dtype=bool)
    hole_idx = full.index_of(layers.hole.coords)
    member[hole_idx] = config.state_at(layers.hole.coords) == OPEN
    in_full = full.index_of(sites.coords)
    first = in_full[(labels == open_labels[0]) & (state == OPEN)]
    second = in_full[(labels == open_labels[1]) & (state == OPEN)]
    member[first] = True
    member[second] = True
    full_labels = dense_labels(label_components(full, member), member)
    return bool(set(full_labels[first].tolist()) & set(full_labels[second].tolist()))


@dataclass(frozen=True)
class FaceFingerprint:
    """
    Coarse Fingerprint of the Faces at the Inner Radius of an Annulus

    The crossing-interface count, the colour of the sector counter-clockwise of the
    first inner endpoint (by angle), the angular bin of every inner endpoint, then the
    U bit. Sector colours alternate, so the first one fixes the rest.
    """

    annulus: Annulus
    bins: int = DEFAULT_BINS
    include_u: bool = True
    reverse: bool = False

    def __call__(self, config):
        if self.reverse:
            config = config.color_reversed()
        layers, domain = annulus_geometry(self.annulus, config.mesh)
        state = config.state_at(layers.sites.coords)
        comps = domain.components(state)
        labels, sequence = sector_sequence(layers, domain, comps, state)
        key = [comps.count]
        if sequence:
            endpoints = np.array([endpoint for _, _, endpoint in sequence])
            key.append(int(sequence[0][1]))
            key.extend(int(b) for b in _angle_bin(endpoints, self.annulus.center, self.bins))
        if self.include_u:
            key.append(int(open_sectors_joined(config, layers, labels, sequence)))
        return tuple(key)


@dataclass(frozen=True)
class UBit:
    annulus: Annulus

    def __call__(self, config):
        layers, domain = annulus_geometry(self.annulus, config.mesh)
        state = config.state_at(layers.sites.coords)
        comps = domain.components(state)
        if comps.count != 4:
            return -1
        labels, sequence = sector_sequence(layers, domain, comps, state)
        return int(open_sectors_joined(config, layers, labels, sequence))


def outer_condition(name, r, R, mesh):
    """Event and Sampling Region of a Named Outer Condition

    box: alternating four arms from B(r) to the boundary of B(R); sides: open arms to
    the left and right and closed arms to the bottom and top of B(R); tilted:
    alternating four arms to the boundary of B(R) turned by a quarter of pi.
    """
    inner = Box((0.0, 0.0), r)
    if name == "box":
        annulus = Annulus((0.0, 0.0), r, R)
        return ArmsIn(annulus, "OCOC"), annulus_layers(annulus, mesh).full
    if name == "sides":
        outer = Box((0.0, 0.0), R)
        return ArmsFromHole(inner, outer, True), box_quad(outer, mesh).sites
    if name == "tilted":
        outer = Box((0.0, 0.0), R, math.pi / 4.0)
        return ArmsFromHole(inner, outer), box_sites(outer, mesh)
    raise ValueError(f"Not a known outer condition: {name}")


def _intermediate(r, R, gamma):
    gamma = gamma or math.sqrt(r * R)
    if not r < gamma <= R / math.sqrt(2.0):
        raise GeometryError("intermediate scale must satisfy r < gamma <= R / sqrt(2)")
    return gamma


def _fingerprints(event, region, fingerprint, n, seed, budget, workers):
    sampler = ConditionalSampler(region, event, budget, seed)
    run = run_conditioned(sampler, n, fingerprint, workers, min_accepted=_min_accepted(n))
    return run.values, run


def coupling_tv_experiment(
    r, R, condition_a, condition_b, n, seed, mesh=1.0, bins=DEFAULT_BINS, gamma=None, budget=None, workers=1
):
    """Total Variation Between Face Fingerprints Under Two Outer Conditions

    Faces are read off the interfaces crossing A(r, gamma), gamma defaulting to the
    geometric mean of r and R. The two conditions use the seeds seed and seed + 1.

    Returns
    -------
    dict
        TV Estimate with Bootstrap Error and Permutation Null, Acceptance Rates
    """
    gamma = _intermediate(r, R, gamma)
    annulus = Annulus((0.0, 0.0), r, gamma)
    fingerprint = FaceFingerprint(annulus, bins)
    face_region = annulus_layers(annulus, mesh).full
    budget = _budget(n, budget)
    samples, runs = [], []
    for offset, name in enumerate((condition_a, condition_b)):
        event, region = outer_condition(name, r, R, mesh)
        values, run = _fingerprints(event, region.union(face_region), fingerprint, n, seed + offset, budget, workers)
        samples.append(values)
        runs.append(run)
    tv = tv_estimate(samples[0], samples[1], seed)
    row = {
        "r": r,
        "R": R,
        "ratio": R / r,
        "gamma": gamma,
        "mesh": mesh,
        "condition_a": condition_a,
        "condition_b": condition_b,
        "bins": bins,
        "seed": seed,
        "acceptance_a": runs[0].acceptance_rate,
        "acceptance_b": runs[1].acceptance_rate,
    }
    row.update(tv.to_row())
    logger.info("coupling %s/%s r=%g R=%g: tv %.4g +- %.2g", condition_a, condition_b, r, R, tv.value, tv.stderr)
    return row


def color_switch_tv(r, R, n, seed, mesh=1.0, bins=DEFAULT_BINS, gamma=None, budget=None, workers=1):
    """Fingerprint Law Given U = 1 Against the Colour-Reversed Law Given U = 0

    Both samples are conditioned on four arms across A(r, R) and exactly four
    interfaces across A(r, gamma).
    """
    gamma = _intermediate(r, R, gamma)
    annulus = Annulus((0.0, 0.0), r, gamma)
    event, region = outer_condition("box", r, R, mesh)
    u_bit = UBit(annulus)
    budget = _budget(n, budget)
    plain, run_1 = _fingerprints(
        AllOf((event, StatisticEquals(u_bit, 1))),
        region,
        FaceFingerprint(annulus, bins, include_u=False),
        n,
        seed,
        budget,
        workers,
    )
    reversed_, run_0 = _fingerprints(
        AllOf((event, StatisticEquals(u_bit, 0))),
        region,
        FaceFingerprint(annulus, bins, include_u=False, reverse=True),
        n,
        seed + 1,
        budget,
        workers,
    )
    tv = tv_estimate(plain, reversed_, seed)
    row = {
        "r": r,
        "R": R,
        "gamma": gamma,
        "mesh": mesh,
        "bins": bins,
        "seed": seed,
        "acceptance_u1": run_1.acceptance_rate,
        "acceptance_u0": run_0.acceptance_rate,
    }
    row.update(tv.to_row())
    return row


def coupling_decay(rows):
    """Power-Law Fit of the Excess TV Against R / r; k Is Minus the Slope"""
    rows = sorted(rows, key=lambda row: row["ratio"])
    scales = [row["ratio"] for row in rows]
    values = [max(row["tv"] - row["tv_null"], 1e-12) for row in rows]
    errors = [math.hypot(row["tv_stderr"], row["tv_null_stderr"]) for row in rows]
    fit = fit_power_law(scales, values, errors)
    return {"k": -fit.slope, "k_half_width": fit.half_width, "points": len(rows) - len(fit.dropped)}


# ---------------------------------------------------------------------------
# one-arm circuits


@dataclass(frozen=True)
class CircuitFingerprint:
    """
    Where the Outermost Open Circuit of an Annulus Can Sit, per Angular Bin

    For every bin, the sup-norm radius (in meshes) of the innermost site of the
    closed clusters attached to the outer boundary; ("none",) when a closed cluster
    crosses the annulus.
    """

    annulus: Annulus
    bins: int = DEFAULT_BINS

    def __call__(self, config):
        layers = annulus_layers(self.annulus, config.mesh)
        sites = layers.sites
        member = config.state_at(sites.coords) == CLOSED
        labels = dense_labels(label_components(sites, member), member)
        count = int(labels.max()) + 2
        outer = np.zeros(count, dtype=bool)
        outer[labels[member & layers.outer_layer]] = True
        inner = np.zeros(count, dtype=bool)
        inner[labels[member & layers.inner_layer]] = True
        if np.any(outer[:-1] & inner[:-1]):
            return ("none",)
        attached = member & outer[labels]
        radius = np.max(np.abs(self.annulus.outer_box.local_coords(sites.positions)), axis=1)
        quantized = np.rint(radius / config.mesh).astype(np.int64)
        bins = _angle_bin(sites.positions, self.annulus.center, self.bins)
        key = np.full(self.bins, int(round(self.annulus.r_outer / config.mesh)), dtype=np.int64)
        np.minimum.at(key, bins[attached], quantized[attached])
        return tuple(int(v) for v in key)


def one_arm_circuit_coupling(r, R, n, seed, mesh=1.0, u=None, bins=DEFAULT_BINS, budget=None, workers=1):
    """Total Variation of the Outermost Open Circuit in A(r, u) Under Two One-Arm Conditions

    One sample is conditioned on an open arm from B(r) to the boundary of B(R), the
    other on an open arm to the boundary of B(R) turned by a quarter of pi.
    """
    u = u or 2.0 * r
    if not r < u <= R / math.sqrt(2.0):
        raise GeometryError("circuit annulus must satisfy r < u <= R / sqrt(2)")
    annulus = Annulus((0.0, 0.0), r, u)
    fingerprint = CircuitFingerprint(annulus, bins)
    inner = Box((0.0, 0.0), r)
    straight = Box((0.0, 0.0), R)
    tilted = Box((0.0, 0.0), R, math.pi / 4.0)
    budget = _budget(n, budget)
    samples, runs = [], []
    for offset, outer in enumerate((straight, tilted)):
        region = box_sites(outer, mesh).union(annulus_layers(annulus, mesh).full)
        values, run = _fingerprints(OpenArmFromHole(inner, outer), region, fingerprint, n, seed + offset, budget, workers)
        samples.append(values)
        runs.append(run)
    tv = tv_estimate(samples[0], samples[1], seed)
    circuits = [sum(1 for value in values if value != ("none",)) / len(values) for values in samples]
    row = {
        "r": r,
        "R": R,
        "u": u,
        "ratio": R / r,
        "mesh": mesh,
        "bins": bins,
        "seed": seed,
        "acceptance_a": runs[0].acceptance_rate,
        "acceptance_b": runs[1].acceptance_rate,
        "circuit_a": circuits[0],
        "circuit_b": circuits[1],
    }
    row.update(tv.to_row())
    return row


@dataclass(frozen=True)
class _OpenCircuit:
    annulus: Annulus
    mesh: float
    seed: int

    def __call__(self, index):
        layers = annulus_layers(self.annulus, self.mesh)
        return int(not arm_event(sample(layers.full, self.seed, index), self.annulus, "C"))


def open_circuit_probability(r, u, n, seed, mesh=1.0, workers=1):
    """Probability of an Open Circuit Around B(r) Inside A(r, u)"""
    annulus = Annulus((0.0, 0.0), r, u)
    hits = np.array(map_indices(_OpenCircuit(annulus, mesh, seed), range(n), workers), dtype=np.int64)
    return Estimate.from_samples(hits, seed, {"r": r, "u": u, "mesh": mesh})


# ---------------------------------------------------------------------------
# exactly four arms with separated ends


@dataclass(frozen=True)
class _SeparatedFour:
    annulus: Annulus
    mesh: float
    seed: int
    threshold: float

    def __call__(self, index):
        layers, domain = annulus_geometry(self.annulus, self.mesh)
        config = sample(layers.full, self.seed, index)
        state = config.state_at(layers.sites.coords)
        comps = domain.components(state)
        if comps.count != 4:
            return 0
        inner = interface_quality(domain.triangle_xy[comps.inner_endpoints], self.annulus.r_inner)
        outer = interface_quality(domain.triangle_xy[comps.outer_endpoints], self.annulus.r_outer)
        return int(inner > self.threshold and outer > self.threshold)


def exactly_four_separated_prob(r, n, seed, mesh=1.0, threshold=SEPARATION_THRESHOLD, workers=1):
    """Probability of Exactly Four Crossings of A(r, 2r) with Both Qualities Above threshold"""
    annulus = Annulus((0.0, 0.0), r, 2.0 * r)
    hits = np.array(map_indices(_SeparatedFour(annulus, mesh, seed, threshold), range(n), workers), dtype=np.int64)
    return Estimate.from_samples(hits, seed, {"r": r, "mesh": mesh, "threshold": threshold})


# ---------------------------------------------------------------------------
# relative qualities


def endpoint_hierarchy(points):
    """Dyadic Cluster Tree of an Endpoint Set Under the Sup Norm

    Level j joins points closer than s * 2 ** j, s being the least spacing; levels
    stop once a single cluster remains.

    Returns
    -------
    (float, list of ndarray)
        The Spacing s and the Cluster Labels of Every Level
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(points) < 2:
        raise ValueError("a hierarchy needs at least two endpoints")
    distances = squareform(pdist(points, metric="chebyshev"))
    spacing = float(distances[np.triu_indices(len(points), 1)].min())
    if spacing <= 0:
        raise ValueError("endpoints must be distinct")
    levels = []
    j = 0
    while True:
        adjacency = (distances < spacing * 2.0 ** j) & ~np.eye(len(points), dtype=bool)
        count, labels = connected_components(adjacency, directed=False)
        levels.append(labels)
        if count == 1:
            return spacing, levels
        j += 1


def relative_qualities(points, n_interfaces):
    """Least Within-Cluster Spacing of Each Level, Relative to N s 2 ** (j - 1)

    Returns
    -------
    list of (int, float)
        Level and Relative Quality, for Levels Having a Cluster with Two Points
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    spacing, levels = endpoint_hierarchy(points)
    distances = squareform(pdist(points, metric="chebyshev"))
    result = []
    for j, labels in enumerate(levels):
        same = (labels[:, None] == labels[None, :]) & ~np.eye(len(points), dtype=bool)
        if not same.any():
            continue
        least = float(distances[same].min())
        result.append((j, least / (n_interfaces * spacing * 2.0 ** (j - 1))))
    return result
