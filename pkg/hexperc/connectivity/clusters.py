"""clusters.py

Monochromatic Clusters, Quad Crossings and Two-Point Connectivity

"""
import logging
from enum import Enum

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import GeometryError
from ..sampling.configuration import OPEN, CLOSED

logger = logging.getLogger(__name__)


class Color(Enum):
    OPEN = OPEN
    CLOSED = CLOSED


def color_value(color):
    """Maps Color, "open" / "closed" or 0 / 1 to the Stored Bit"""
    if isinstance(color, Color):
        return color.value
    if isinstance(color, str):
        try:
            return Color[color.upper()].value
        except KeyError:
            raise ValueError(f"Not a known color: {color}")
    if color in (OPEN, CLOSED):
        return int(color)
    raise ValueError(f"Not a known color: {color}")


def label_components(sites, member, extra_edges=None, n_extra=0):
    """Connected Components of the Member Sites Under Lattice Adjacency

    Parameters
    ----------
    sites : SiteSet
        Ambient Site Set
    member : ndarray
        Boolean Mask of Sites Taking Part
    extra_edges : (ndarray, ndarray), optional
        Additional Edges Between Node Indices, Where Indices >= len(sites) Refer to
        n_extra Virtual Nodes
    n_extra : int
        Number of Virtual Nodes

    Returns
    -------
    ndarray
        Raw Component Label per Node (Sites Then Virtual Nodes); Non-Member Sites
        Are Singletons
    """
    member = np.asarray(member, dtype=bool)
    ea, eb, _ = sites.pairs
    keep = member[ea] & member[eb]
    rows, cols = [ea[keep]], [eb[keep]]
    if extra_edges is not None:
        rows.append(np.asarray(extra_edges[0], dtype=np.int64))
        cols.append(np.asarray(extra_edges[1], dtype=np.int64))
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    n = len(sites) + n_extra
    graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return labels


def dense_labels(raw, member):
    """Relabels Member Components as 0..k-1, Others as -1"""
    out = np.full(len(member), -1, dtype=np.int64)
    if np.any(member):
        _, dense = np.unique(raw[: len(member)][member], return_inverse=True)
        out[member] = dense
    return out


class ClusterIndex:
    """
    Clusters of One Colour in a Configuration
    """

    def __init__(self, config, color=Color.OPEN, removed=None):
        """Labels the Clusters

        Parameters
        ----------
        config : Configuration
            The Configuration
        color : Color or str
            Cluster Colour
        removed : ndarray, optional
            Mask of Sites Treated as Absent
        """
        self.config = config
        self.color = color_value(color)
        member = config.state == self.color
        if removed is not None:
            member &= ~np.asarray(removed, dtype=bool)
        self.member = member
        self.labels = dense_labels(label_components(config.region, member), member)
        self.count = int(self.labels.max()) + 1 if member.any() else 0

    @property
    def sizes(self):
        return np.bincount(self.labels[self.member], minlength=self.count)

    @property
    def bounding_boxes(self):
        """(k, 4) Axial Bounds q_min, r_min, q_max, r_max per Cluster"""
        coords = self.config.region.coords[self.member]
        labels = self.labels[self.member]
        lo = np.full((self.count, 2), np.iinfo(np.int64).max, dtype=np.int64)
        hi = np.full((self.count, 2), np.iinfo(np.int64).min, dtype=np.int64)
        np.minimum.at(lo, labels, coords)
        np.maximum.at(hi, labels, coords)
        return np.hstack((lo, hi))

    @property
    def diameters(self):
        """Euclidean Diameter of the Bounding Rectangle of Each Cluster"""
        xy = self.config.region.positions[self.member]
        labels = self.labels[self.member]
        lo = np.full((self.count, 2), np.inf)
        hi = np.full((self.count, 2), -np.inf)
        np.minimum.at(lo, labels, xy)
        np.maximum.at(hi, labels, xy)
        return np.hypot(*(hi - lo).T)

    def same_cluster(self, i, j):
        return self.labels[i] >= 0 and self.labels[i] == self.labels[j]

    def clusters_touching(self, mask):
        """Boolean Array over Clusters Containing at Least One Masked Site"""
        touching = np.zeros(self.count, dtype=bool)
        hit = self.labels[np.asarray(mask, dtype=bool)]
        touching[hit[hit >= 0]] = True
        return touching


def build_clusters(config, color=Color.OPEN):
    return ClusterIndex(config, color)


CROSSING_ARCS = {OPEN: ("ab", "cd"), CLOSED: ("bc", "da")}


def quad_state(config, quad):
    """States of the Quad Sites Taken from a Configuration"""
    idx = config.region.index_of(quad.sites.coords)
    if np.any(idx < 0):
        raise GeometryError("quad sites are not inside the configuration region")
    return config.state[idx]


def crossing_in_state(quad, state, color=Color.OPEN):
    """Crossing Test on a State Vector Aligned with quad.sites"""
    value = color_value(color)
    first, second = CROSSING_ARCS[value]
    member = np.asarray(state) == value
    n = len(quad.sites)
    start = np.nonzero(member & quad.arc_adjacent(first))[0]
    end = np.nonzero(member & quad.arc_adjacent(second))[0]
    if not len(start) or not len(end):
        return False
    extra = (
        np.concatenate((np.full(len(start), n), np.full(len(end), n + 1))),
        np.concatenate((start, end)),
    )
    labels = label_components(quad.sites, member, extra, n_extra=2)
    return bool(labels[n] == labels[n + 1])


def has_crossing(config, quad, color=Color.OPEN):
    """Whether a Path of the Colour Crosses the Quad

    Open crossings join arc ab to arc cd, closed crossings join bc to da. Crossing
    paths may use any quad site, including those on its outer layer.

    Parameters
    ----------
    config : Configuration
        Configuration Covering the Quad
    quad : Quad
        The Quad
    color : Color or str
        Crossing Colour

    Returns
    -------
    bool
    """
    quad.validate()
    return crossing_in_state(quad, quad_state(config, quad), color)


def connected(config, x, y):
    """Whether Sites x and y Lie in the Same Open Cluster

    A closed site is connected to nothing, itself included.
    """
    i = config.region.index(x)
    j = config.region.index(y)
    if config.state[i] != OPEN or config.state[j] != OPEN:
        return False
    if i == j:
        return True
    return ClusterIndex(config, Color.OPEN).same_cluster(i, j)
