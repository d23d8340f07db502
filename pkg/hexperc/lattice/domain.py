"""domain.py

Honeycomb Edges and Vertices of a Site Region, for Vectorized Interface Counting

Honeycomb vertices are lattice triangles. The triangle up(q, r) has corners
(q, r), (q+1, r), (q, r+1); the triangle down(q, r) has corners (q+1, r), (q, r+1),
(q+1, r+1). Every adjacent pair of sites shares one honeycomb edge whose two ends are
the two triangles containing both sites.

"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import GeometryError
from .geometry import axial_to_xy

logger = logging.getLogger(__name__)

UP, DOWN = 0, 1
INTERIOR, INNER_END, OUTER_END = 0, 1, 2

_TRIANGLE_CORNERS = {
    UP: np.array([(0, 0), (1, 0), (0, 1)], dtype=np.int64),
    DOWN: np.array([(1, 0), (0, 1), (1, 1)], dtype=np.int64),
}


def pair_triangles(first, direction):
    """The Two Triangles on Either Side of the Pair (first, first + d_direction)

    Parameters
    ----------
    first : ndarray
        (M, 2) Axial Coordinates of the First Sites
    direction : ndarray
        (M,) Directions in {0, 1, 2}

    Returns
    -------
    (ndarray, ndarray, ndarray, ndarray)
        Kind and Anchor Coordinate of Each of the Two Triangles
    """
    first = np.asarray(first, dtype=np.int64).reshape(-1, 2)
    direction = np.asarray(direction)
    q, r = first[:, 0], first[:, 1]
    kind_a = np.where(direction == 2, DOWN, UP)
    kind_b = np.where(direction == 2, UP, DOWN)
    anchor_a = np.column_stack((np.where(direction == 2, q - 1, q), r))
    anchor_b = np.column_stack(
        (
            np.where(direction == 0, q, q - 1),
            np.where(direction == 0, r - 1, r),
        )
    )
    return kind_a, anchor_a, kind_b, anchor_b


def triangle_corners(kinds, anchors):
    """(T, 3, 2) Corner Sites of Triangles"""
    corners = np.where(
        (np.asarray(kinds) == UP)[:, None, None],
        _TRIANGLE_CORNERS[UP][None, :, :],
        _TRIANGLE_CORNERS[DOWN][None, :, :],
    )
    return np.asarray(anchors, dtype=np.int64)[:, None, :] + corners


@dataclass
class InterfaceComponents:
    """Interface Structure of One Configuration on an InterfaceDomain"""

    interface: np.ndarray
    labels: np.ndarray
    crossing: np.ndarray
    inner_endpoints: np.ndarray
    outer_endpoints: np.ndarray
    pair_labels: np.ndarray

    @property
    def count(self):
        return len(self.crossing)

    def crossing_pairs(self):
        """Mask over Pairs Whose Honeycomb Edge Lies on a Crossing Interface"""
        on_crossing = np.isin(self.labels, self.crossing)
        return self.interface & on_crossing[self.pair_labels]


class InterfaceDomain:
    """
    Honeycomb Graph Between the Sites of a Region with Classified Boundary Vertices

    A boundary triangle has exactly two corners in the region; its third corner is
    either in the hole (an inner endpoint) or elsewhere (an outer endpoint).
    Interfaces are the components of honeycomb edges separating sites of different
    colour; as every triangle meets zero or two such edges, they are paths or loops.
    """

    def __init__(self, sites, hole):
        """Precomputes Pairs, Triangles and Endpoint Types

        Parameters
        ----------
        sites : SiteSet
            Region Whose Sites Carry Colours
        hole : SiteSet
            Sites Outside the Region Marking Inner Endpoints
        """
        if not len(sites):
            raise GeometryError("interface domain needs at least one site")
        self.sites = sites
        self.hole = hole
        ea, eb, direction = sites.pairs
        self.ea, self.eb = ea, eb
        kind_a, anchor_a, kind_b, anchor_b = pair_triangles(sites.coords[ea], direction)
        kinds = np.concatenate((kind_a, kind_b))
        anchors = np.vstack((anchor_a, anchor_b))
        lo = anchors.min(axis=0) if len(anchors) else np.zeros(2, dtype=np.int64)
        span = (anchors.max(axis=0) - lo + 1) if len(anchors) else np.ones(2, dtype=np.int64)
        keys = (kinds * span[1] + (anchors[:, 1] - lo[1])) * span[0] + (anchors[:, 0] - lo[0])
        unique_keys, inverse = np.unique(keys, return_inverse=True)
        n_pairs = len(ea)
        self.tri_a = inverse[:n_pairs]
        self.tri_b = inverse[n_pairs:]
        n_tri = len(unique_keys)
        self.n_triangles = n_tri

        tri_kind = np.empty(n_tri, dtype=np.int64)
        tri_anchor = np.empty((n_tri, 2), dtype=np.int64)
        tri_kind[inverse] = kinds
        tri_anchor[inverse] = anchors
        corners = triangle_corners(tri_kind, tri_anchor)
        self.triangle_xy = axial_to_xy(corners.reshape(-1, 2), sites.mesh).reshape(n_tri, 3, 2).mean(axis=1)
        self.triangle_axial = corners.mean(axis=1)

        in_region = sites.contains(corners.reshape(-1, 2)).reshape(n_tri, 3)
        boundary = in_region.sum(axis=1) == 2
        outside_corner = corners[np.arange(n_tri), np.argmin(in_region, axis=1)]
        self.outside_corner = outside_corner
        in_hole = hole.contains(outside_corner) if len(hole) else np.zeros(n_tri, dtype=bool)
        self.endpoint_type = np.full(n_tri, INTERIOR, dtype=np.int64)
        self.endpoint_type[boundary & in_hole] = INNER_END
        self.endpoint_type[boundary & ~in_hole] = OUTER_END

        # each boundary triangle borders exactly one pair of the region
        self.tri_pair = np.full(n_tri, -1, dtype=np.int64)
        pair_ids = np.arange(n_pairs)
        for tri in (self.tri_a, self.tri_b):
            edge_end = self.endpoint_type[tri] != INTERIOR
            self.tri_pair[tri[edge_end]] = pair_ids[edge_end]
        self.endpoints = np.nonzero(self.endpoint_type != INTERIOR)[0]
        logger.debug(
            "interface domain: %d sites, %d pairs, %d triangles, %d endpoints",
            len(sites),
            n_pairs,
            n_tri,
            len(self.endpoints),
        )

    def components(self, state):
        """Labels the Interfaces of a Colouring

        Parameters
        ----------
        state : ndarray
            One Colour per Region Site

        Returns
        -------
        InterfaceComponents
            Interface Edge Mask, Triangle Labels, Crossing Component Labels and Their
            Inner / Outer Endpoint Triangles (Aligned with crossing)
        """
        state = np.asarray(state)
        interface = state[self.ea] != state[self.eb]
        edges = np.nonzero(interface)[0]
        graph = csr_matrix(
            (np.ones(len(edges), dtype=np.int8), (self.tri_a[edges], self.tri_b[edges])),
            shape=(self.n_triangles, self.n_triangles),
        )
        _, labels = connected_components(graph, directed=False)
        ends = self.endpoints
        active = ends[interface[self.tri_pair[ends]]]
        inner = active[self.endpoint_type[active] == INNER_END]
        outer = active[self.endpoint_type[active] == OUTER_END]
        inner_labels = labels[inner]
        outer_labels = labels[outer]
        crossing = np.intersect1d(inner_labels, outer_labels)
        inner_ends = inner[np.isin(inner_labels, crossing)]
        outer_ends = outer[np.isin(outer_labels, crossing)]
        inner_ends = inner_ends[np.argsort(labels[inner_ends], kind="stable")]
        outer_ends = outer_ends[np.argsort(labels[outer_ends], kind="stable")]
        return InterfaceComponents(
            interface, labels, crossing, inner_ends, outer_ends, labels[self.tri_a]
        )

    def crossing_count(self, state):
        """Number of Interfaces Joining an Inner Endpoint to an Outer Endpoint"""
        return self.components(state).count


def annulus_domain(layers):
    """InterfaceDomain of the Sites of an AnnulusSites Bundle"""
    return InterfaceDomain(layers.sites, layers.hole)
