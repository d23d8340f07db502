"""arm_events.py

Arm Events in Annuli, Importance and Pivotality Predicates, and Arm-Probability
Estimators

"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from ..connectivity.clusters import crossing_in_state, dense_labels, label_components, quad_state
from ..errors import GeometryError
from ..explore.interfaces import annulus_geometry, annulus_layers, interface_quality, sector_sequence
from ..lattice.domain import InterfaceDomain
from ..lattice.geometry import (
    ARC_NAMES,
    NEIGHBOR_OFFSETS,
    Annulus,
    Box,
    HexCoord,
    SiteSet,
    box_quad,
    box_sites,
    nearest_site,
    neighbors,
)
from ..runner.sharding import map_indices
from ..sampling.configuration import CLOSED, OPEN, sample
from ..stats.estimates import Estimate

logger = logging.getLogger(__name__)

_LETTERS = {"O": OPEN, "C": CLOSED}


class ArmPattern:
    """
    Cyclic Colour Word over O (Open) and C (Closed)
    """

    def __init__(self, word):
        word = str(word).upper()
        if not word or set(word) - set(_LETTERS):
            raise ValueError(f"Not a known arm pattern: {word!r}")
        if len(word) > 1 and len(set(word)) == 1:
            raise ValueError(f"monochromatic multi-arm pattern {word} is not supported")
        self.word = word
        self.colors = tuple(_LETTERS[letter] for letter in word)

    @classmethod
    def parse(cls, pattern):
        return pattern if isinstance(pattern, ArmPattern) else cls(pattern)

    @property
    def k(self):
        return len(self.colors)

    @property
    def is_alternating(self):
        k = self.k
        return k % 2 == 0 and all(self.colors[i] != self.colors[(i + 1) % k] for i in range(k))

    def __str__(self):
        return self.word

    def __repr__(self):
        return f"ArmPattern({self.word!r})"

    def __eq__(self, other):
        return isinstance(other, ArmPattern) and other.word == self.word

    def __hash__(self):
        return hash(self.word)


@dataclass(frozen=True)
class ArmEstimate:
    pattern: ArmPattern
    r: float
    R: float
    mesh: float
    estimate: Estimate

    @property
    def value(self):
        return self.estimate.mean

    @property
    def stderr(self):
        return self.estimate.stderr

    @property
    def n(self):
        return self.estimate.n

    @property
    def seed(self):
        return self.estimate.seed

    def to_row(self):
        return {
            "pattern": str(self.pattern),
            "r": self.r,
            "R": self.R,
            "mesh": self.mesh,
            "n": self.n,
            "value": self.value,
            "stderr": self.stderr,
            "seed": self.seed,
            "total": self.estimate.total,
            "total_sq": self.estimate.total_sq,
        }


def append_arm_csv(path, estimates):
    """Appends Estimator Rows to a CSV, Writing the Header for a New File"""
    path = Path(path)
    frame = pd.DataFrame([estimate.to_row() for estimate in estimates])
    frame.to_csv(path, mode="a", header=not path.exists(), index=False, float_format="%.12g")


# ---------------------------------------------------------------------------
# arm events


def _boundary_crossing(sites, member, start_mask, end_mask):
    """Whether Member Sites Join start_mask to end_mask"""
    start = np.nonzero(member & start_mask)[0]
    end = np.nonzero(member & end_mask)[0]
    if not len(start) or not len(end):
        return False
    n = len(sites)
    extra = (
        np.concatenate((np.full(len(start), n), np.full(len(end), n + 1))),
        np.concatenate((start, end)),
    )
    labels = label_components(sites, member, extra, n_extra=2)
    return bool(labels[n] == labels[n + 1])


def sector_capacity(sites, member, inner_mask, outer_mask):
    """Maximum Number of Vertex-Disjoint Member Paths from inner_mask to outer_mask"""
    idx = np.nonzero(member)[0]
    m = len(idx)
    if not m:
        return 0
    local = np.full(len(sites), -1, dtype=np.int64)
    local[idx] = np.arange(m)
    ea, eb, _ = sites.pairs
    both = member[ea] & member[eb]
    u, v = local[ea[both]], local[eb[both]]
    source, sink = 2 * m, 2 * m + 1
    starts = local[np.nonzero(member & inner_mask)[0]]
    ends = local[np.nonzero(member & outer_mask)[0]]
    rows = np.concatenate((np.arange(m), m + u, m + v, np.full(len(starts), source), m + ends))
    cols = np.concatenate((m + np.arange(m), v, u, starts, np.full(len(ends), sink)))
    graph = csr_matrix(
        (np.ones(len(rows), dtype=np.int32), (rows, cols)), shape=(2 * m + 2, 2 * m + 2)
    )
    return int(maximum_flow(graph, source, sink).flow_value)


def _pattern_fits(arms, sectors):
    """Greedy Cyclic Placement of Pattern Arms into (colour, capacity) Sectors"""
    k, m = len(arms), len(sectors)
    for rotation in range(k):
        rotated = arms[rotation:] + arms[:rotation]
        for start in range(m):
            placed = 0
            for step in range(m):
                color, capacity = sectors[(start + step) % m]
                while placed < k and rotated[placed] == color and capacity > 0:
                    placed += 1
                    capacity -= 1
                if placed == k:
                    return True
    return False


def sector_arm_event(layers, domain, state, pattern, comps=None):
    """Arm Event by Sector Capacities, Valid for Every Non-Monochromatic Pattern"""
    pattern = ArmPattern.parse(pattern)
    if comps is None:
        comps = domain.components(state)
    if comps.count < 2:
        return False
    labels, sequence = sector_sequence(layers, domain, comps, state)
    needed = {color: pattern.colors.count(color) for color in set(pattern.colors)}
    sectors = []
    for label, color, _ in sequence:
        if color not in needed:
            sectors.append((color, 0))
            continue
        member = (labels == label) & (state == color)
        capacity = sector_capacity(layers.sites, member, layers.inner_layer, layers.outer_layer)
        sectors.append((color, min(capacity, needed[color])))
    return _pattern_fits(list(pattern.colors), sectors)


def arm_event(config, annulus, pattern):
    """Whether the Annulus Has Disjoint Crossings in the Pattern's Cyclic Colour Order

    Alternating patterns are decided by counting crossing interfaces, single arms by
    cluster reachability between the boundary layers and other patterns by sector
    capacities. Arms from a single-site inner face start at its neighbours; a
    single "O" or "C" arm also needs the site itself of that colour.

    Parameters
    ----------
    config : Configuration
        Configuration Covering Box(r_outer)
    annulus : Annulus
        The Annulus
    pattern : ArmPattern or str
        Cyclic Colour Word

    Returns
    -------
    bool
    """
    pattern = ArmPattern.parse(pattern)
    layers, domain = annulus_geometry(annulus, config.mesh)
    state = config.state_at(layers.sites.coords)
    if pattern.k == 1:
        value = pattern.colors[0]
        if annulus.is_point(config.mesh) and np.any(config.state_at(layers.hole.coords) != value):
            return False
        return _boundary_crossing(layers.sites, state == value, layers.inner_layer, layers.outer_layer)
    comps = domain.components(state)
    if pattern.is_alternating:
        return comps.count >= pattern.k
    return sector_arm_event(layers, domain, state, pattern, comps)


def robust_arm_quality(config, annulus):
    """Interior and Exterior Quality of the Interfaces Given Four Alternating Arms

    Returns
    -------
    (float, float)
        (0, 0) Without the Alternating Four-Arm Event
    """
    layers, domain = annulus_geometry(annulus, config.mesh)
    comps = domain.components(config.state_at(layers.sites.coords))
    if comps.count < 4:
        return 0.0, 0.0
    inner = domain.triangle_xy[comps.inner_endpoints]
    outer = domain.triangle_xy[comps.outer_endpoints]
    return interface_quality(inner, annulus.r_inner), interface_quality(outer, annulus.r_outer)


# ---------------------------------------------------------------------------
# arms from an off-centre hole


@dataclass
class HoleArmsGeometry:
    """
    Sites Between a Hole and an Outer Boundary, with Optional Wired Arcs

    colors holds the wired colour of each arc site and -1 for sites taking their
    colour from the configuration (listed in free).
    """

    sites: SiteSet
    hole: SiteSet
    domain: InterfaceDomain
    colors: np.ndarray
    free: np.ndarray
    inner_layer: np.ndarray
    outer_layer: np.ndarray


@lru_cache(maxsize=64)
def hole_arms_geometry(hole_box, outer_box, mesh, prescribed=False):
    """Geometry for Four Alternating Arms from hole_box to the Boundary of outer_box

    With prescribed=True the arms must land on prescribed sides: open on the left
    and right sides, closed on the lower and upper sides. The four sides are then
    wired as the arcs of box_quad(outer_box).

    Raises
    ------
    GeometryError
        If the hole is empty or touches the outer boundary layer
    """
    hole = box_sites(hole_box, mesh)
    if prescribed:
        quad = box_quad(outer_box, mesh)
        inside = quad.sites
        region = inside
        for name in ARC_NAMES:
            region = region.union(quad.arcs[name])
    else:
        inside = box_sites(outer_box, mesh)
        region = inside
    if not len(hole) or not hole.issubset(inside.subset(~inside.boundary_mask())):
        raise GeometryError("hole must be non-empty and inside the outer box, away from its boundary")
    sites = region.difference(hole)
    colors = np.full(len(sites), -1, dtype=np.int64)
    if prescribed:
        for name, value in (("ab", OPEN), ("bc", CLOSED), ("cd", OPEN), ("da", CLOSED)):
            colors[sites.index_of(quad.arcs[name].coords)] = value
    inner_layer = sites.adjacent_mask(hole)
    outer_layer = sites.adjacent_mask(region.exterior())
    return HoleArmsGeometry(
        sites, hole, InterfaceDomain(sites, hole), colors, np.nonzero(colors < 0)[0], inner_layer, outer_layer
    )


def hole_arms_state(config, geometry):
    """Colours of the Geometry Sites, Wired Arcs Included"""
    state = geometry.colors.copy()
    state[geometry.free] = config.state_at(geometry.sites.coords[geometry.free])
    return state.astype(np.uint8)


def hole_arms_event(config, hole_box, outer_box, prescribed=False):
    """Whether Four Alternating Arms Join hole_box to the Boundary of outer_box

    The boxes need not share a centre or an angle. With prescribed sides, the four
    wired arcs leave exactly four interface ends on the outer boundary, and the event
    holds iff all four interfaces reach the hole.
    """
    geometry = hole_arms_geometry(hole_box, outer_box, config.mesh, prescribed)
    return geometry.domain.crossing_count(hole_arms_state(config, geometry)) >= 4


def hole_one_arm_event(config, hole_box, outer_box, color=OPEN):
    """Whether a Path of One Colour Joins hole_box to the Boundary of outer_box"""
    geometry = hole_arms_geometry(hole_box, outer_box, config.mesh)
    member = hole_arms_state(config, geometry) == color
    return _boundary_crossing(geometry.sites, member, geometry.inner_layer, geometry.outer_layer)


# ---------------------------------------------------------------------------
# importance and pivotality


def four_arm_centers(sites, state, centers, outer_mask):
    """Alternating Four Arms from Each Center Site to the Outer Layer

    A site has four alternating arms to the outer layer iff, with the site removed,
    two distinct clusters of the colour opposite to its own, both adjacent to it,
    reach the outer layer.

    Parameters
    ----------
    sites : SiteSet
        Region the Arms Live In
    state : ndarray
        Colours of the Region Sites
    centers : ndarray
        Indices of the Center Sites
    outer_mask : ndarray
        Mask of the Outer Layer

    Returns
    -------
    ndarray
        Boolean per Center
    """
    centers = np.asarray(centers, dtype=np.int64)
    result = np.zeros(len(centers), dtype=bool)
    nbr_all = sites.neighbor_index[centers]
    for value in (OPEN, CLOSED):
        rows = np.nonzero(state[centers] == value)[0]
        if not len(rows):
            continue
        member = state == 1 - value
        labels = dense_labels(label_components(sites, member), member)
        count = int(labels.max()) + 1
        touching = np.zeros(count + 1, dtype=bool)
        hit = labels[member & outer_mask]
        touching[hit] = True
        nbr = nbr_all[rows]
        near = np.where(nbr >= 0, labels[np.maximum(nbr, 0)], -1)
        near = np.where(touching[near], near, -1)
        near.sort(axis=1)
        distinct = (near[:, 0] >= 0).astype(int) + ((near[:, 1:] != near[:, :-1]) & (near[:, 1:] >= 0)).sum(axis=1)
        result[rows] = distinct >= 2
    return result


def A_important_sites(config, annulus):
    """Mask over the Inner-Face Sites with Four Alternating Arms to the Outer Boundary"""
    layers = annulus_layers(annulus, config.mesh)
    full = layers.full
    state = config.state_at(full.coords)
    centers = full.index_of(layers.hole.coords)
    return four_arm_centers(full, state, centers, full.boundary_mask())


def is_A_important(config, x, annulus):
    """Whether Site x of the Inner Face Is A-Important"""
    layers = annulus_layers(annulus, config.mesh)
    position = int(layers.hole.index_of(np.asarray(x).reshape(1, 2))[0])
    if position < 0:
        raise GeometryError(f"site {tuple(x)} is not in the inner face of the annulus")
    full = layers.full
    state = config.state_at(full.coords)
    return bool(four_arm_centers(full, state, [full.index(x)], full.boundary_mask())[0])


def rho_region(x, rho, mesh):
    """Box(x, rho) Together with x and Its Neighbours"""
    x = HexCoord(*x)
    star = SiteSet([x] + neighbors(x), mesh)
    return box_sites(Box(x.position(mesh), rho), mesh).union(star)


def is_rho_important(config, x, rho):
    """Whether Site x Has Four Alternating Arms to Distance rho"""
    if rho <= 0:
        raise ValueError("rho must be positive")
    region = rho_region(x, rho, config.mesh)
    state = config.state_at(region.coords)
    return bool(four_arm_centers(region, state, [region.index(x)], region.boundary_mask())[0])


def local_four_arm_mask(config, sites):
    """Four Alternating Arms to the Neighbour Ring, for Every Site of sites"""
    ring = sites.coords[:, None, :] + NEIGHBOR_OFFSETS[None, :, :]
    colors = config.state_at(ring.reshape(-1, 2)).reshape(len(sites), 6)
    own = config.state_at(sites.coords)
    opposite = colors == (1 - own)[:, None]
    starts = opposite & ~np.roll(opposite, 1, axis=1)
    return starts.sum(axis=1) >= 2


def rho_important_sites(config, sites, rho):
    """Mask over sites of the rho-Important Ones

    Sites failing the four-arm test at the neighbour ring are discarded before the
    full test.
    """
    mask = local_four_arm_mask(config, sites)
    for i in np.nonzero(mask)[0]:
        mask[i] = is_rho_important(config, sites.coords[i], rho)
    return mask


def is_quad_pivotal(config, x, quad):
    """Whether Flipping x Changes the Existence of an Open Crossing of the Quad"""
    quad.validate()
    i = int(quad.sites.index_of(np.asarray(x).reshape(1, 2))[0])
    if i < 0:
        raise GeometryError(f"site {tuple(x)} is not in the quad")
    state = quad_state(config, quad)
    flipped = state.copy()
    flipped[i] ^= 1
    return crossing_in_state(quad, state) != crossing_in_state(quad, flipped)


def pivotal_sites(config, quad):
    """Mask over the Quad Sites of the Pivotal Ones

    An open site is pivotal iff an open crossing exists and the site touches, directly
    or through closed clusters, both arcs bc and da; a closed site is pivotal iff no
    open crossing exists and it touches ab and cd through open clusters.
    """
    quad.validate()
    sites = quad.sites
    state = quad_state(config, quad)
    crossing = crossing_in_state(quad, state)
    nbr = sites.neighbor_index
    result = np.zeros(len(sites), dtype=bool)
    for value, arcs, needed in ((OPEN, ("bc", "da"), crossing), (CLOSED, ("ab", "cd"), not crossing)):
        rows = np.nonzero(state == value)[0]
        if not needed or not len(rows):
            continue
        member = state == 1 - value
        labels = dense_labels(label_components(sites, member), member)
        count = int(labels.max()) + 1
        near = np.where(nbr[rows] >= 0, labels[np.maximum(nbr[rows], 0)], -1)
        ok = np.ones(len(rows), dtype=bool)
        for arc in arcs:
            touching = np.zeros(count + 1, dtype=bool)
            hit = labels[member & quad.arc_adjacent(arc)]
            touching[hit] = True
            ok &= touching[near].any(axis=1) | quad.arc_adjacent(arc)[rows]
        result[rows] = ok
    return result


# ---------------------------------------------------------------------------
# estimators


def alpha_annulus(r, R, mesh, center=(0.0, 0.0), angle=0.0):
    """Annulus for alpha(r, R); Radii up to One Mesh Mean Arms from a Single Site"""
    if r <= mesh:
        site = nearest_site(center, mesh)
        return Annulus(site.position(mesh), mesh / 4.0, R, angle)
    return Annulus(center, r, R, angle)


@dataclass(frozen=True)
class ArmSampleJob:
    annulus: Annulus
    mesh: float
    pattern: str
    seed: int

    def __call__(self, index):
        layers = annulus_layers(self.annulus, self.mesh)
        return int(arm_event(sample(layers.full, self.seed, index), self.annulus, self.pattern))


def estimate_alpha(pattern, r, R, mesh, n, seed, workers=1, start=0):
    """Monte Carlo Arm Probability

    Parameters
    ----------
    pattern : ArmPattern or str
        Cyclic Colour Word
    r, R : float
        Inner and Outer Radii; r up to One Mesh Means the Site's Own Hexagon
    mesh : float
        Lattice Mesh
    n : int
        Number of Samples
    seed : int
        Run Seed
    workers : int
        Worker Processes
    start : int
        First Sample Index, for Shards of One Run

    Returns
    -------
    ArmEstimate
    """
    if n < 1:
        raise ValueError("estimate_alpha needs n >= 1")
    pattern = ArmPattern.parse(pattern)
    annulus = alpha_annulus(r, R, mesh)
    job = ArmSampleJob(annulus, mesh, str(pattern), seed)
    hits = np.array(map_indices(job, range(start, start + n), workers), dtype=np.int64)
    estimate = Estimate.from_samples(
        hits, seed, {"pattern": str(pattern), "r": r, "R": R, "mesh": mesh}
    )
    logger.info("alpha_%s(%g, %g) at mesh %g: %.4g +- %.2g", pattern, r, R, mesh, estimate.mean, estimate.stderr)
    return ArmEstimate(pattern, r, R, mesh, estimate)
