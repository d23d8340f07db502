"""checks.py

Fast-Path Predicates Paired with Slower Reference Formulations, Checked on Every
Configuration of Tiny Geometries

"""
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..arms.arm_events import (
    A_important_sites,
    ArmPattern,
    arm_event,
    hole_arms_event,
    is_quad_pivotal,
    pivotal_sites,
    sector_capacity,
)
from ..connectivity.clusters import Color, has_crossing, label_components
from ..explore.faces import extract_faces, u_theta
from ..explore.interfaces import ReachedOuter, annulus_layers, radial_exploration
from ..lattice.geometry import Annulus, Box, box_quad, path_quad
from ..sampling.configuration import CLOSED, OPEN
from .enumerate import enumerate_probability

logger = logging.getLogger(__name__)

CHECKS = (
    "crossing",
    "duality",
    "arms_O",
    "arms_OC",
    "arms_OCOC",
    "arms_OOC",
    "arms_OCC",
    "arms_OCOCC",
    "pivotal",
    "important",
    "exploration",
    "u_theta",
)


@dataclass(frozen=True)
class CrossingAgreement:
    """Open Crossing Against a Max-Flow Path Count Between Arcs ab and cd"""

    quad: object

    def __call__(self, config):
        quad = self.quad
        state = config.state_at(quad.sites.coords)
        paths = sector_capacity(quad.sites, state == OPEN, quad.arc_adjacent("ab"), quad.arc_adjacent("cd"))
        return has_crossing(config, quad) == (paths > 0)


@dataclass(frozen=True)
class Duality:
    """Exactly One of an Open ab-cd Crossing and a Closed bc-da Crossing"""

    quad: object

    def __call__(self, config):
        return has_crossing(config, self.quad) != has_crossing(config, self.quad, Color.CLOSED)


@dataclass(frozen=True)
class ArmAgreement:
    """Arm Event Against Disjoint Monochromatic Paths (Three or More Arms) or Max-Flow Crossings"""

    annulus: Annulus
    pattern: str

    def __call__(self, config):
        layers = annulus_layers(self.annulus, config.mesh)
        state = config.state_at(layers.sites.coords)
        fast = arm_event(config, self.annulus, self.pattern)
        if len(self.pattern) > 2:
            return fast == disjoint_arms_exist(layers, state, self.pattern)
        hole_ok = True
        if self.annulus.is_point(config.mesh) and self.pattern in ("O", "C"):
            hole_ok = bool(np.all(config.state_at(layers.hole.coords) == (OPEN if self.pattern == "O" else CLOSED)))
        reference = hole_ok
        for letter in set(self.pattern):
            value = OPEN if letter == "O" else CLOSED
            reference &= sector_capacity(layers.sites, state == value, layers.inner_layer, layers.outer_layer) > 0
        return fast == reference


def minimal_crossings(layers, state):
    """Every Monochromatic Self-Avoiding Path Leaving the Inner Layer Once and Stopping at the Outer Layer

    Returns
    -------
    list of (int, tuple of int)
        Colour and Site Indices per Path
    """
    nbr = layers.sites.neighbor_index
    inner, outer = layers.inner_layer, layers.outer_layer
    paths = []

    def extend(path):
        last = path[-1]
        if outer[last]:
            paths.append((int(state[path[0]]), tuple(path)))
            return
        for nxt in nbr[last]:
            if nxt < 0 or inner[nxt] or state[nxt] != state[last] or nxt in path:
                continue
            extend(path + [int(nxt)])

    for start in np.nonzero(inner)[0]:
        extend([int(start)])
    return paths


def disjoint_arms_exist(layers, state, pattern):
    """Exhaustive Search for Disjoint Crossings Whose Cyclic Colour Order Is the Pattern

    Crossings are ordered by the angle of their inner site around the inner face.
    """
    colors = ArmPattern.parse(pattern).colors
    k = len(colors)
    words = {colors[i:] + colors[:i] for i in range(k)}
    prefixes = {word[:j] for word in words for j in range(k + 1)}
    center = layers.hole.positions.mean(axis=0)
    rel = layers.sites.positions - center
    angle = np.arctan2(rel[:, 1], rel[:, 0])
    paths = sorted(minimal_crossings(layers, state), key=lambda path: angle[path[1][0]])

    def search(first, word, used):
        if len(word) == k:
            return word in words
        for i in range(first, len(paths)):
            color, sites = paths[i]
            if word + (color,) in prefixes and used.isdisjoint(sites):
                if search(i + 1, word + (color,), used | set(sites)):
                    return True
        return False

    return search(0, (), frozenset())


@dataclass(frozen=True)
class PivotalAgreement:
    """Duality Fast Path Against the Flip Test, Site by Site"""

    quad: object

    def __call__(self, config):
        fast = pivotal_sites(config, self.quad)
        flipped = [is_quad_pivotal(config, site, self.quad) for site in self.quad.sites.coords]
        return bool(np.array_equal(fast, np.array(flipped, dtype=bool)))


@dataclass(frozen=True)
class ImportantAgreement:
    """Cluster Test Against the Interface Count from the Single-Site Hole"""

    annulus: Annulus

    def __call__(self, config):
        layers = annulus_layers(self.annulus, config.mesh)
        fast = A_important_sites(config, self.annulus)
        outer = self.annulus.outer_box
        mesh = config.mesh
        for flag, position in zip(fast, layers.hole.positions):
            hole = Box((float(position[0]), float(position[1])), mesh / 4.0)
            if bool(flag) != hole_arms_event(config, hole, outer):
                return False
        return True


@dataclass(frozen=True)
class ExplorationAgreement:
    """Radial Exploration Reaches the Outer Boundary iff an Open Arm Leaves the Wired Hole"""

    annulus: Annulus

    def __call__(self, config):
        layers = annulus_layers(self.annulus, config.mesh)
        state = config.state_at(layers.sites.coords)
        arm = sector_capacity(layers.sites, state == OPEN, layers.inner_layer, layers.outer_layer) > 0
        return isinstance(radial_exploration(config, self.annulus), ReachedOuter) == arm


@dataclass(frozen=True)
class UThetaAgreement:
    """Open-Face Connection Against a Virtual-Node Connectivity Query"""

    annulus: Annulus

    def __call__(self, config):
        theta = extract_faces(config, self.annulus)
        if theta is None:
            return True
        region = theta.domain.union(theta.faces[0]).union(theta.faces[2])
        member = config.state_at(region.coords) == OPEN
        n = len(region)
        first = np.nonzero(member & _mask(region, theta.faces[0]))[0]
        third = np.nonzero(member & _mask(region, theta.faces[2]))[0]
        if not len(first) or not len(third):
            return u_theta(config, theta) == 0
        extra = (
            np.concatenate((np.full(len(first), n), np.full(len(third), n + 1))),
            np.concatenate((first, third)),
        )
        labels = label_components(region, member, extra, n_extra=2)
        return u_theta(config, theta) == int(labels[n] == labels[n + 1])


def _mask(region, sites):
    mask = np.zeros(len(region), dtype=bool)
    idx = region.index_of(sites.coords)
    mask[idx[idx >= 0]] = True
    return mask


def check_predicate(name, geometry):
    """Agreement Predicate of a Named Check on a Quad or Annulus"""
    if name == "crossing":
        return CrossingAgreement(geometry)
    elif name == "duality":
        return Duality(geometry)
    elif name.startswith("arms_"):
        return ArmAgreement(geometry, name[len("arms_"):])
    elif name == "pivotal":
        return PivotalAgreement(geometry)
    elif name == "important":
        return ImportantAgreement(geometry)
    elif name == "exploration":
        return ExplorationAgreement(geometry)
    elif name == "u_theta":
        return UThetaAgreement(geometry)
    raise ValueError(f"Not a known oracle check: {name}")


QUAD_CHECKS = ("crossing", "duality", "pivotal")


def default_geometries(mesh=1.0):
    """Five Quads and Five Annuli, Each Below the Enumeration Cap"""
    quads = [path_quad(length, mesh) for length in (1, 3, 5)]
    quads += [box_quad(Box((0.0, 0.0), 1.5 * mesh), mesh), box_quad(Box((0.3, 0.2), 1.4 * mesh, 0.5), mesh)]
    annuli = [
        Annulus((0.0, 0.0), mesh / 4.0, 1.2 * mesh),
        Annulus((0.0, 0.0), mesh / 4.0, 1.6 * mesh),
        Annulus((0.5 * mesh, 0.0), mesh / 4.0, 1.5 * mesh),
        Annulus((0.0, 0.0), mesh / 4.0, 1.6 * mesh, 0.4),
        Annulus((0.0, 0.0), 0.6 * mesh, 1.7 * mesh),
    ]
    return quads, annuli


def _region(geometry, mesh):
    if isinstance(geometry, Annulus):
        return annulus_layers(geometry, mesh).full
    return geometry.sites


def oracle_equivalence(checks=CHECKS, mesh=1.0, workers=1):
    """Exact Agreement Frequency of Every Check on Every Default Geometry

    Returns
    -------
    list of dict
        One Row per (Check, Geometry); agreement Is an Exact Fraction String and
        passed Is True iff It Equals 1
    """
    quads, annuli = default_geometries(mesh)
    rows = []
    for name in checks:
        geometries = quads if name in QUAD_CHECKS else annuli
        for i, geometry in enumerate(geometries):
            region = _region(geometry, mesh)
            agreement = enumerate_probability(region, check_predicate(name, geometry), workers)
            rows.append(
                {
                    "check": name,
                    "geometry": i,
                    "sites": len(region),
                    "agreement": str(agreement),
                    "passed": agreement == Fraction(1),
                }
            )
            if agreement != 1:
                logger.error("oracle check %s failed on geometry %d: agreement %s", name, i, agreement)
    return rows
