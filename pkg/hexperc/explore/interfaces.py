"""interfaces.py

Interface Tracing on the Honeycomb: Chordal (Dobrushin) Exploration, Radial Exploration
with Forced Turns, and the Interfaces Crossing an Annulus

A walk sits on a directed honeycomb edge between a right site R and a left site L,
with L = R + d_k. The triangle ahead has third site c = R + d_{k-1}. If c has R's
colour the walk pivots around L (R becomes c, k becomes k + 1), otherwise around R
(L becomes c, k becomes k - 1).

"""
import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist

from ..errors import GeometryError
from ..lattice.domain import annulus_domain
from ..lattice.geometry import ARC_NAMES, NEIGHBOR_OFFSETS, annulus_sites, axial_to_xy
from ..sampling.configuration import OPEN

logger = logging.getLogger(__name__)

EXIT, LOOP = "exit", "loop"


@dataclass
class Walk:
    """Raw Result of an Interface Walk, in Site Indices of the Walked Site Set"""

    rights: np.ndarray
    lefts: np.ndarray
    directions: np.ndarray
    outcome: str


def walk_interface(sites, colors, right, direction, max_steps=None):
    """Follows the Interface Through the Directed Edge (right, right + d_direction)

    Parameters
    ----------
    sites : SiteSet
        Sites Carrying Colours; the Walk Stops When the Site Ahead Is Not in the Set
    colors : ndarray
        Colour per Site
    right : int
        Index of the Starting Right Site
    direction : int
        Direction k from the Right Site to the Left Site
    max_steps : int, optional
        Step Guard, Defaults to Six Times the Number of Sites

    Returns
    -------
    Walk
        Steps Taken (One per Directed Edge) and Whether the Walk Left the Set
        ("exit") or Came Back to Its First Edge ("loop")
    """
    nbr = sites.neighbor_index
    if max_steps is None:
        max_steps = 6 * len(sites) + 6
    if nbr[right, direction] < 0 or colors[nbr[right, direction]] == colors[right]:
        raise GeometryError("walk must start on an edge between differently coloured sites")
    start = (right, direction)
    rights, lefts, directions = [], [], []
    k = direction
    for _ in range(max_steps):
        left = nbr[right, k]
        rights.append(right)
        lefts.append(left)
        directions.append(k)
        behind = (k - 1) % 6
        ahead = nbr[right, behind]
        if ahead < 0:
            outcome = EXIT
            break
        if colors[ahead] == colors[right]:
            right = ahead
            k = (k + 1) % 6
        else:
            k = behind
        if (right, k) == start:
            outcome = LOOP
            break
    else:
        raise RuntimeError("interface walk did not terminate within its step guard")
    return Walk(np.array(rights), np.array(lefts), np.array(directions), outcome)


def walk_vertices(sites, walk):
    """Axial Coordinates of the Honeycomb Vertices Reached by Each Step"""
    ks = walk.directions
    offsets = (NEIGHBOR_OFFSETS[ks] + NEIGHBOR_OFFSETS[(ks - 1) % 6]) / 3.0
    return sites.coords[walk.rights] + offsets


def walk_start_vertex(sites, walk):
    """Axial Coordinate of the Vertex Behind the First Step"""
    k = walk.directions[0]
    return sites.coords[walk.rights[0]] + (NEIGHBOR_OFFSETS[k] + NEIGHBOR_OFFSETS[(k + 1) % 6]) / 3.0


@dataclass
class InterfaceTrace:
    """
    Ordered Honeycomb Edges of an Interface

    Edge i separates open_sites[i] from closed_sites[i]; vertices hold the polyline
    through the edges in axial coordinates (one more vertex than steps walked).
    """

    open_sites: np.ndarray
    closed_sites: np.ndarray
    vertices: np.ndarray
    mesh: float
    inner_endpoint: tuple = None
    outer_endpoint: tuple = None

    def __len__(self):
        return len(self.open_sites)

    def edge_set(self):
        return {
            (tuple(int(v) for v in o), tuple(int(v) for v in c))
            for o, c in zip(self.open_sites, self.closed_sites)
        }

    @property
    def edge_midpoints_xy(self):
        return (axial_to_xy(self.open_sites, self.mesh) + axial_to_xy(self.closed_sites, self.mesh)) / 2.0


def empty_trace(mesh):
    empty = np.empty((0, 2), dtype=np.int64)
    return InterfaceTrace(empty, empty, np.empty((0, 2)), mesh)


def trace_from_walk(sites, colors, walk, keep=None):
    """Builds an InterfaceTrace, Keeping the Steps Selected by a Mask"""
    if keep is None:
        keep = np.ones(len(walk.rights), dtype=bool)
    right_open = colors[walk.rights] == OPEN
    open_idx = np.where(right_open, walk.rights, walk.lefts)
    closed_idx = np.where(right_open, walk.lefts, walk.rights)
    vertices = np.vstack((walk_start_vertex(sites, walk)[None, :], walk_vertices(sites, walk)))
    return InterfaceTrace(
        sites.coords[open_idx[keep]],
        sites.coords[closed_idx[keep]],
        vertices,
        sites.mesh,
    )


def trace_to_json_line(trace):
    """One JSON Line with the Ordered Vertex List in Axial Coordinates"""
    return json.dumps(
        {
            "mesh": trace.mesh,
            "edges": len(trace),
            "vertices": [[round(float(q), 6), round(float(r), 6)] for q, r in trace.vertices],
        }
    )


# ---------------------------------------------------------------------------
# chordal exploration


def dobrushin_colors(config, quad):
    """Walk Sites and Colours for a Quad with ab Wired Open and bc, cd, da Wired Closed"""
    quad.validate()
    arcs = [quad.arcs[name] for name in ARC_NAMES]
    walk_sites = quad.sites
    for arc in arcs:
        walk_sites = walk_sites.union(arc)
    colors = np.zeros(len(walk_sites), dtype=np.uint8)
    idx = walk_sites.index_of(quad.sites.coords)
    colors[idx] = config.state_at(quad.sites.coords)
    colors[walk_sites.index_of(quad.arcs["ab"].coords)] = OPEN
    inside = np.zeros(len(walk_sites), dtype=bool)
    inside[idx] = True
    return walk_sites, colors, inside


def _chordal_start(walk_sites, colors, quad):
    """The Directed Edge at Junction a: Right Site on ab, Left Site on da"""
    ab = walk_sites.index_of(quad.arcs["ab"].coords)
    da = set(walk_sites.index_of(quad.arcs["da"].coords).tolist())
    nbr = walk_sites.neighbor_index
    for right in ab:
        for k in range(6):
            left = nbr[right, k]
            if left < 0 or left not in da:
                continue
            ahead = nbr[right, (k - 1) % 6]
            behind = nbr[right, (k + 1) % 6]
            if ahead >= 0 and behind < 0:
                return right, k
    raise GeometryError("degenerate quad: no junction between arcs ab and da")


def chordal_interface(config, quad):
    """Exploration Path from a to b Under Dobrushin Boundary Conditions

    Arc ab is wired open and the complementary arc ba (bc, cd, da) closed; the walk
    keeps open sites on its right.

    Parameters
    ----------
    config : Configuration
        Configuration Covering the Quad
    quad : Quad
        The Quad

    Returns
    -------
    InterfaceTrace
        Edges with at Least One Side Inside the Quad
    """
    walk_sites, colors, inside = dobrushin_colors(config, quad)
    right, k = _chordal_start(walk_sites, colors, quad)
    walk = walk_interface(walk_sites, colors, right, k)
    if walk.outcome != EXIT:
        raise GeometryError("degenerate quad: chordal exploration closed a loop")
    keep = inside[walk.rights] | inside[walk.lefts]
    return trace_from_walk(walk_sites, colors, walk, keep)


# ---------------------------------------------------------------------------
# radial exploration


@dataclass
class ReachedOuter:
    trace: InterfaceTrace
    forced_turns: int
    bumped: list = field(default_factory=list)


@dataclass
class ClosedCircuitFound:
    trace: InterfaceTrace
    forced_turns: int
    bumped: list = field(default_factory=list)


def winding_number(points, center):
    """Winding Number of a Closed Polyline Around a Point"""
    angles = np.arctan2(points[:, 1] - center[1], points[:, 0] - center[0])
    steps = np.diff(np.concatenate((angles, angles[:1])))
    steps = (steps + np.pi) % (2.0 * np.pi) - np.pi
    return int(np.rint(steps.sum() / (2.0 * np.pi)))


def radial_exploration(config, annulus):
    """Explores Outward from the Inner Face with Open Sites on the Right

    The inner face is wired open. The exploration enters along the spoke, the lattice
    row through the inner-face site nearest the centre heading in +q, at the first
    closed site reached by an open spoke path. A loop around the inner face is a
    closed circuit. A loop that does not wind around it encloses a closed island: the
    loop is erased, its bumped hexagon recorded as a forced turn, and the exploration
    re-enters the spoke past the island.

    Parameters
    ----------
    config : Configuration
        Configuration Covering Box(r_outer)
    annulus : Annulus
        The Annulus

    Returns
    -------
    ReachedOuter or ClosedCircuitFound
    """
    layers = annulus_sites(annulus, config.mesh)
    full = layers.full
    colors = np.full(len(full), OPEN, dtype=np.uint8)
    colors[full.index_of(layers.sites.coords)] = config.state_at(layers.sites.coords)
    hole_xy = layers.hole.positions
    pivot = layers.hole.coords[np.argmin(np.hypot(*(hole_xy - np.array(annulus.center)).T))]
    pivot_xy = axial_to_xy(pivot, config.mesh)[0]
    spoke = [full.index(pivot)]
    while True:
        nxt = full.neighbor_index[spoke[-1], 0]
        if nxt < 0:
            break
        spoke.append(nxt)
    spoke = np.array(spoke)
    hole_mask = np.zeros(len(full), dtype=bool)
    hole_mask[full.index_of(layers.hole.coords)] = True

    bumped = []
    position = 0
    while True:
        entry = None
        for j in range(position + 1, len(spoke)):
            if colors[spoke[j]] != OPEN:
                entry = j
                break
        if entry is None:
            logger.debug("radial exploration: open spoke to the outer boundary")
            return ReachedOuter(empty_trace(config.mesh), len(bumped), bumped)
        walk = walk_interface(full, colors, spoke[entry - 1], 0)
        keep = ~hole_mask[walk.rights]
        trace = trace_from_walk(full, colors, walk, keep)
        if walk.outcome == EXIT:
            return ReachedOuter(trace, len(bumped), bumped)
        winding = winding_number(axial_to_xy(walk_vertices(full, walk), config.mesh), pivot_xy)
        if winding != 0:
            return ClosedCircuitFound(trace, len(bumped), bumped)
        bumped.append(tuple(int(v) for v in full.coords[spoke[entry]]))
        on_loop = np.isin(spoke, walk.rights)
        position = int(np.nonzero(on_loop)[0].max())
        logger.debug("radial exploration: forced turn at %s", bumped[-1])


# ---------------------------------------------------------------------------
# interfaces crossing an annulus


@lru_cache(maxsize=256)
def annulus_layers(annulus, mesh):
    """Site Layers of an Annulus, Cached per (Annulus, Mesh)"""
    return annulus_sites(annulus, mesh)


@lru_cache(maxsize=8)
def annulus_geometry(annulus, mesh):
    """Site Layers and Interface Domain of an Annulus, Cached per (Annulus, Mesh)"""
    layers = annulus_layers(annulus, mesh)
    return layers, annulus_domain(layers)


def interface_quality(points, u):
    """Least Pairwise Distance Between Endpoints Normalized by u, 0 Below Two Points"""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(points) < 2:
        return 0.0
    return float(pdist(points).min() / u)


def crossing_interfaces(config, annulus):
    """All Interfaces Joining the Inner Face to the Outer Boundary of an Annulus

    Parameters
    ----------
    config : Configuration
        Configuration Covering the Annulus Sites
    annulus : Annulus
        The Annulus

    Returns
    -------
    list of InterfaceTrace
        Walked from the Inner Endpoint Outward, Ordered by Inner Endpoint Angle
    """
    layers, domain = annulus_geometry(annulus, config.mesh)
    sites = layers.sites
    colors = config.state_at(sites.coords)
    comps = domain.components(colors)
    traces = []
    for tri, outer in zip(comps.inner_endpoints, comps.outer_endpoints):
        pair = domain.tri_pair[tri]
        a, b = domain.ea[pair], domain.eb[pair]
        right, k = _outward_orientation(sites, layers.hole, a, b)
        walk = walk_interface(sites, colors, right, k)
        trace = trace_from_walk(sites, colors, walk)
        trace.inner_endpoint = tuple(domain.triangle_xy[tri])
        trace.outer_endpoint = tuple(domain.triangle_xy[outer])
        traces.append(trace)
    center = np.array(annulus.center)
    traces.sort(key=lambda t: np.arctan2(t.inner_endpoint[1] - center[1], t.inner_endpoint[0] - center[0]))
    return traces


def _outward_orientation(sites, hole, a, b):
    """Right Site and Direction so the Triangle Ahead Is Not the Hole-Side Triangle"""
    for right, left in ((a, b), (b, a)):
        k = int(np.nonzero(sites.neighbor_index[right] == left)[0][0])
        ahead = sites.coords[right] + NEIGHBOR_OFFSETS[(k - 1) % 6]
        if not hole.contains(ahead)[0]:
            return right, k
    raise GeometryError("pair borders the inner face on both sides")


def sector_sequence(layers, domain, comps, state):
    """Sectors Between Consecutive Crossing Interfaces, Counter-Clockwise

    Returns
    -------
    (ndarray, list of (int, int, ndarray))
        Sector Label per Annulus Site, and for Each Crossing Interface in Order of
        Inner Endpoint Angle: the Label and Colour of the Sector Counter-Clockwise
        of It, and the Inner Endpoint
    """
    sites = layers.sites
    n = len(sites)
    keep = ~comps.crossing_pairs()
    graph = csr_matrix(
        (np.ones(int(keep.sum()), dtype=np.int8), (domain.ea[keep], domain.eb[keep])), shape=(n, n)
    )
    _, labels = connected_components(graph, directed=False)
    center = np.asarray(layers.center)
    mesh = sites.mesh
    entries = []
    for tri in comps.inner_endpoints:
        pair = domain.tri_pair[tri]
        a, b = domain.ea[pair], domain.eb[pair]
        mid = (sites.positions[a] + sites.positions[b]) / 2.0
        outward = mid - axial_to_xy(domain.outside_corner[tri], mesh)[0]
        rel = sites.positions[a] - mid
        ccw = a if outward[0] * rel[1] - outward[1] * rel[0] > 0 else b
        endpoint = domain.triangle_xy[tri]
        angle = np.arctan2(endpoint[1] - center[1], endpoint[0] - center[0])
        entries.append((angle, int(labels[ccw]), int(state[ccw]), endpoint))
    entries.sort(key=lambda entry: entry[0])
    return labels, [(label, color, endpoint) for _, label, color, endpoint in entries]


def interface_count(config, annulus):
    layers, domain = annulus_geometry(annulus, config.mesh)
    return domain.crossing_count(config.state_at(layers.sites.coords))


def exactly_four_arms(config, annulus):
    """Whether Exactly Four Interfaces Cross the Annulus"""
    return interface_count(config, annulus) == 4


def endpoint_positions(config, annulus):
    """Euclidean Inner and Outer Endpoints of the Crossing Interfaces"""
    layers, domain = annulus_geometry(annulus, config.mesh)
    comps = domain.components(config.state_at(layers.sites.coords))
    return domain.triangle_xy[comps.inner_endpoints], domain.triangle_xy[comps.outer_endpoints]


def qualities(config, annulus):
    """Interior and Exterior Quality of the Crossing Interfaces"""
    inner, outer = endpoint_positions(config, annulus)
    return interface_quality(inner, annulus.r_inner), interface_quality(outer, annulus.r_outer)
