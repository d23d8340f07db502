"""geometry.py

Triangular Lattice Geometry: Axial Coordinates, Site Sets, Boxes, Annuli, Quads and Grids

Sites of the triangular lattice are the hexagons of the honeycomb lattice. A site
(q, r) sits at x = mesh * (q + r / 2), y = mesh * r * sqrt(3) / 2.

"""
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from ..errors import GeometryError

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)

# counter-clockwise, starting east
NEIGHBOR_OFFSETS = np.array(
    [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)], dtype=np.int64
)

ARC_NAMES = ("ab", "bc", "cd", "da")

_BOUNDARY_TOLERANCE = 1e-9


class HexCoord(NamedTuple):
    """Axial Coordinate of a Triangular Lattice Site"""

    q: int
    r: int

    def position(self, mesh=1.0):
        """Euclidean Position of the Site Center

        Parameters
        ----------
        mesh : float
            Lattice Mesh

        Returns
        -------
        (float, float)
            x and y Coordinates
        """
        return mesh * (self.q + self.r / 2.0), mesh * self.r * SQRT3 / 2.0

    def shifted(self, dq, dr):
        return HexCoord(self.q + dq, self.r + dr)


def neighbors(c):
    """The Six Lattice Neighbours of a Site, Counter-Clockwise from East

    Parameters
    ----------
    c : HexCoord or (int, int)
        Site Coordinate

    Returns
    -------
    list of HexCoord
    """
    q, r = c
    return [HexCoord(q + int(dq), r + int(dr)) for dq, dr in NEIGHBOR_OFFSETS]


def axial_to_xy(coords, mesh):
    """Embeds an (N, 2) Array of Axial (Possibly Fractional) Coordinates"""
    coords = np.asarray(coords, dtype=float).reshape(-1, 2)
    x = mesh * (coords[:, 0] + coords[:, 1] / 2.0)
    y = mesh * coords[:, 1] * SQRT3 / 2.0
    return np.column_stack((x, y))


def xy_to_axial(points, mesh):
    """Inverse of axial_to_xy, Returning Fractional Axial Coordinates"""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    r = points[:, 1] / (mesh * SQRT3 / 2.0)
    q = points[:, 0] / mesh - r / 2.0
    return np.column_stack((q, r))


def nearest_site(point, mesh):
    """Closest Lattice Site to a Euclidean Point

    Parameters
    ----------
    point : (float, float)
        Euclidean Point
    mesh : float
        Lattice Mesh

    Returns
    -------
    HexCoord
    """
    q, r = xy_to_axial([point], mesh)[0]
    s = -q - r
    rq, rr, rs = round(q), round(r), round(s)
    dq, dr, ds = abs(rq - q), abs(rr - r), abs(rs - s)
    if dq > dr and dq > ds:
        rq = -rr - rs
    elif dr > ds:
        rr = -rq - rs
    return HexCoord(int(rq), int(rr))


class SiteSet:
    """
    Finite Set of Lattice Sites with a Dense Index Lookup

    Sites are stored as an (N, 2) integer array sorted lexicographically. Index
    lookups for arbitrary coordinates go through a dense grid over the bounding
    parallelogram, so all queries are vectorized.
    """

    def __init__(self, coords, mesh):
        """Builds the Site Set

        Parameters
        ----------
        coords : array_like
            (N, 2) Axial Coordinates, Duplicates Allowed
        mesh : float
            Lattice Mesh
        """
        if mesh <= 0:
            raise GeometryError("mesh must be positive")
        coords = np.array(coords, dtype=np.int64).reshape(-1, 2)
        if len(coords):
            coords = np.unique(coords, axis=0)
        self.coords = coords
        self.coords.setflags(write=False)
        self.mesh = float(mesh)
        if len(coords):
            self._origin = coords.min(axis=0)
            shape = coords.max(axis=0) - self._origin + 1
        else:
            self._origin = np.zeros(2, dtype=np.int64)
            shape = np.zeros(2, dtype=np.int64)
        self._grid = np.full(tuple(shape), -1, dtype=np.int64)
        if len(coords):
            local = coords - self._origin
            self._grid[local[:, 0], local[:, 1]] = np.arange(len(coords))

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        for q, r in self.coords:
            yield HexCoord(int(q), int(r))

    def __contains__(self, coord):
        return bool(self.index_of(np.asarray(coord).reshape(1, 2))[0] >= 0)

    def __eq__(self, other):
        if not isinstance(other, SiteSet):
            return NotImplemented
        return (
            self.mesh == other.mesh
            and self.coords.shape == other.coords.shape
            and bool(np.all(self.coords == other.coords))
        )

    def __hash__(self):
        return hash(self.geometry_hash())

    def __repr__(self):
        return f"SiteSet(n={len(self)}, mesh={self.mesh:g})"

    def index_of(self, coords):
        """Indices of the Given Coordinates, -1 Where Absent"""
        coords = np.asarray(coords, dtype=np.int64).reshape(-1, 2)
        result = np.full(len(coords), -1, dtype=np.int64)
        if not len(self.coords) or not len(coords):
            return result
        local = coords - self._origin
        inside = (
            (local[:, 0] >= 0)
            & (local[:, 1] >= 0)
            & (local[:, 0] < self._grid.shape[0])
            & (local[:, 1] < self._grid.shape[1])
        )
        result[inside] = self._grid[local[inside, 0], local[inside, 1]]
        return result

    def contains(self, coords):
        return self.index_of(coords) >= 0

    def index(self, coord):
        """Index of a Single Site, Raising GeometryError if Absent"""
        idx = int(self.index_of(np.asarray(coord).reshape(1, 2))[0])
        if idx < 0:
            raise GeometryError(f"site {tuple(coord)} is outside the region")
        return idx

    @cached_property
    def positions(self):
        """(N, 2) Euclidean Positions of the Sites"""
        return axial_to_xy(self.coords, self.mesh)

    @cached_property
    def neighbor_index(self):
        """(N, 6) Indices of the Neighbours, -1 for Neighbours Outside the Set"""
        shifted = self.coords[:, None, :] + NEIGHBOR_OFFSETS[None, :, :]
        return self.index_of(shifted.reshape(-1, 2)).reshape(len(self), 6)

    @cached_property
    def pairs(self):
        """Adjacent Pairs Inside the Set

        Returns
        -------
        (ndarray, ndarray, ndarray)
            First Site Index, Second Site Index and Direction k in {0, 1, 2}
            with second = first + NEIGHBOR_OFFSETS[k]
        """
        nbr = self.neighbor_index
        firsts, seconds, dirs = [], [], []
        for k in range(3):
            present = np.nonzero(nbr[:, k] >= 0)[0]
            firsts.append(present)
            seconds.append(nbr[present, k])
            dirs.append(np.full(len(present), k, dtype=np.int64))
        return np.concatenate(firsts), np.concatenate(seconds), np.concatenate(dirs)

    def subset(self, mask):
        """Sites Selected by a Boolean Mask"""
        return SiteSet(self.coords[np.asarray(mask, dtype=bool)], self.mesh)

    def union(self, other):
        return SiteSet(np.vstack((self.coords, other.coords)), self.mesh)

    def difference(self, other):
        return self.subset(~other.contains(self.coords))

    def intersection(self, other):
        return self.subset(other.contains(self.coords))

    def isdisjoint(self, other):
        return not bool(np.any(other.contains(self.coords)))

    def issubset(self, other):
        return bool(np.all(other.contains(self.coords)))

    def boundary_mask(self):
        """Mask of Sites with at Least One Neighbour Outside the Set"""
        return np.any(self.neighbor_index < 0, axis=1)

    def boundary(self):
        return self.subset(self.boundary_mask())

    def exterior(self):
        """Sites Outside the Set Adjacent to It"""
        shifted = (self.coords[:, None, :] + NEIGHBOR_OFFSETS[None, :, :]).reshape(-1, 2)
        outside = shifted[self.index_of(shifted) < 0]
        return SiteSet(outside, self.mesh)

    def adjacent_mask(self, other):
        """Mask of Sites Having a Neighbour in Another Site Set"""
        shifted = (self.coords[:, None, :] + NEIGHBOR_OFFSETS[None, :, :]).reshape(-1, 2)
        return other.contains(shifted).reshape(len(self), 6).any(axis=1)

    def translate(self, dq, dr):
        return SiteSet(self.coords + np.array([dq, dr], dtype=np.int64), self.mesh)

    def geometry_hash(self):
        """SHA-256 Digest of the Mesh and Coordinates"""
        digest = hashlib.sha256()
        digest.update(repr(self.mesh).encode())
        digest.update(np.ascontiguousarray(self.coords).tobytes())
        return digest.hexdigest()


@dataclass(frozen=True)
class Box:
    """
    Half-Open Rotated Square center + e^{i angle} [-radius, radius)^2
    """

    center: tuple
    radius: float
    angle: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if not self.radius > 0:
            raise GeometryError("box radius must be positive")

    def local_coords(self, points):
        """Coordinates of Points in the Box Frame (Center at 0, Unrotated)"""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        dx = points[:, 0] - self.center[0]
        dy = points[:, 1] - self.center[1]
        cos, sin = math.cos(self.angle), math.sin(self.angle)
        return np.column_stack((cos * dx + sin * dy, -sin * dx + cos * dy))

    def contains(self, points):
        uv = self.local_coords(points)
        shift = _BOUNDARY_TOLERANCE * max(1.0, self.radius)
        low, high = -self.radius - shift, self.radius - shift
        return (uv[:, 0] >= low) & (uv[:, 0] < high) & (uv[:, 1] >= low) & (uv[:, 1] < high)

    def corners(self):
        cos, sin = math.cos(self.angle), math.sin(self.angle)
        local = np.array([(-1, -1), (1, -1), (1, 1), (-1, 1)], dtype=float) * self.radius
        x = self.center[0] + cos * local[:, 0] - sin * local[:, 1]
        y = self.center[1] + sin * local[:, 0] + cos * local[:, 1]
        return np.column_stack((x, y))

    def contains_box(self, other):
        """Closed Containment of Another Box"""
        uv = self.local_coords(other.corners())
        limit = self.radius * (1.0 + _BOUNDARY_TOLERANCE)
        return bool(np.all(np.abs(uv) <= limit))

    def boundary_distance(self, points):
        """Euclidean Distance from Interior Points to the Box Boundary"""
        uv = self.local_coords(points)
        return self.radius - np.max(np.abs(uv), axis=1)

    def scaled(self, factor):
        return Box((self.center[0] * factor, self.center[1] * factor), self.radius * factor, self.angle)

    def to_json(self):
        return {"center": list(self.center), "radius": self.radius, "angle": self.angle}


def box_sites(box, mesh):
    """Sites Whose Embedded Center Lies in the Half-Open Rotated Square

    Parameters
    ----------
    box : Box
        Rotated Square
    mesh : float
        Lattice Mesh

    Returns
    -------
    SiteSet
        Possibly Empty Set of Member Sites
    """
    if mesh <= 0:
        raise GeometryError("mesh must be positive")
    reach = box.radius * math.sqrt(2.0)
    cx, cy = box.center
    row_step = mesh * SQRT3 / 2.0
    r_lo = math.floor((cy - reach) / row_step) - 1
    r_hi = math.ceil((cy + reach) / row_step) + 1
    q_lo = math.floor((cx - reach) / mesh - r_hi / 2.0) - 1
    q_hi = math.ceil((cx + reach) / mesh - r_lo / 2.0) + 1
    qs, rs = np.meshgrid(
        np.arange(q_lo, q_hi + 1, dtype=np.int64),
        np.arange(r_lo, r_hi + 1, dtype=np.int64),
        indexing="ij",
    )
    candidates = np.column_stack((qs.ravel(), rs.ravel()))
    inside = box.contains(axial_to_xy(candidates, mesh))
    return SiteSet(candidates[inside], mesh)


@dataclass(frozen=True)
class Annulus:
    """
    Box(r_outer) Minus Box(r_inner), Both Centered at center and Rotated by angle

    When r_inner is below half a mesh the inner face is the single site nearest
    to the center (arms from a site's own hexagon).
    """

    center: tuple
    r_inner: float
    r_outer: float
    angle: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if not 0 < self.r_inner < self.r_outer:
            raise GeometryError("annulus needs 0 < r_inner < r_outer")

    @classmethod
    def around_site(cls, site, r_outer, mesh):
        """Annulus Whose Inner Face is a Single Site"""
        return cls(HexCoord(*site).position(mesh), mesh / 4.0, r_outer)

    @property
    def inner_box(self):
        return Box(self.center, self.r_inner, self.angle)

    @property
    def outer_box(self):
        return Box(self.center, self.r_outer, self.angle)

    def is_point(self, mesh):
        return self.r_inner < mesh / 2.0

    def scaled(self, factor):
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return Annulus(
            (self.center[0] * factor, self.center[1] * factor),
            self.r_inner * factor,
            self.r_outer * factor,
            self.angle,
        )

    def to_json(self, mesh=None):
        data = {
            "center": list(self.center),
            "r_inner": self.r_inner,
            "r_outer": self.r_outer,
            "angle": self.angle,
        }
        if mesh is not None:
            data["mesh"] = mesh
        return data


@dataclass
class AnnulusSites:
    """Site Layers of an Annulus at a Given Mesh"""

    annulus: Annulus
    mesh: float
    full: SiteSet
    hole: SiteSet
    sites: SiteSet
    inner_layer: np.ndarray
    outer_layer: np.ndarray

    @property
    def center(self):
        return self.annulus.center


def annulus_sites(annulus, mesh):
    """Site Set, Inner Face and Boundary Layers of an Annulus

    Parameters
    ----------
    annulus : Annulus
        The Annulus
    mesh : float
        Lattice Mesh

    Returns
    -------
    AnnulusSites
        full is Box(r_outer), hole is the inner face, inner_layer / outer_layer are
        masks over sites marking the boundary layers touching the hole and the
        outside of Box(r_outer)

    Raises
    ------
    GeometryError
        If the annulus has no sites or an empty boundary layer
    """
    outer = box_sites(annulus.outer_box, mesh)
    if annulus.is_point(mesh):
        hole = SiteSet([nearest_site(annulus.center, mesh)], mesh)
        full = outer.union(hole)
    else:
        hole = box_sites(annulus.inner_box, mesh)
        full = outer
    if not len(hole) or not hole.issubset(full):
        raise GeometryError("degenerate annulus: inner face is empty or not inside the outer box")
    sites = full.difference(hole)
    if not len(sites):
        raise GeometryError("degenerate annulus: no sites between the boundaries")
    inner_layer = sites.adjacent_mask(hole)
    full_outside = full.exterior()
    outer_layer = sites.adjacent_mask(full_outside)
    if not inner_layer.any() or not outer_layer.any():
        raise GeometryError("degenerate annulus: empty boundary layer")
    return AnnulusSites(annulus, mesh, full, hole, sites, inner_layer, outer_layer)


@dataclass
class Quad:
    """
    Site Set with Four Exterior Arcs ab, bc, cd, da in Counter-Clockwise Order

    Each arc is a set of exterior sites (outside the quad, adjacent to it); together
    they partition the exterior layer.
    """

    sites: SiteSet
    arcs: dict
    name: str = "quad"
    _adjacent: dict = field(default_factory=dict, repr=False)
    _validated: bool = field(default=False, repr=False)

    def validate(self):
        """Checks the Arcs Form a Partition of the Exterior Layer

        Raises
        ------
        GeometryError
            For missing, empty, overlapping, interior or non-covering arcs
        """
        if self._validated:
            return self
        if set(self.arcs) != set(ARC_NAMES):
            raise GeometryError(f"malformed arcs: expected {ARC_NAMES}, got {sorted(self.arcs)}")
        if not len(self.sites):
            raise GeometryError("malformed quad: no sites")
        total = 0
        for name in ARC_NAMES:
            arc = self.arcs[name]
            if not len(arc):
                raise GeometryError(f"malformed arcs: arc {name} is empty")
            if not arc.isdisjoint(self.sites):
                raise GeometryError(f"malformed arcs: arc {name} meets the quad sites")
            total += len(arc)
        merged = self.arcs["ab"].union(self.arcs["bc"]).union(self.arcs["cd"]).union(self.arcs["da"])
        if len(merged) != total:
            raise GeometryError("malformed arcs: arcs overlap")
        if merged != self.sites.exterior():
            raise GeometryError("malformed arcs: arcs do not cover the exterior layer")
        self._validated = True
        return self

    def arc_adjacent(self, name):
        """Mask of Quad Sites Adjacent to an Arc"""
        if name not in self._adjacent:
            self._adjacent[name] = self.sites.adjacent_mask(self.arcs[name])
        return self._adjacent[name]

    def geometry_hash(self):
        digest = hashlib.sha256(self.sites.geometry_hash().encode())
        for name in ARC_NAMES:
            digest.update(self.arcs[name].geometry_hash().encode())
        return digest.hexdigest()


def box_quad(box, mesh, name="box"):
    """Quad from a Box: Left Side ab, Bottom bc, Right cd, Top da

    Parameters
    ----------
    box : Box
        Possibly Rotated Square
    mesh : float
        Lattice Mesh

    Returns
    -------
    Quad
    """
    sites = box_sites(box, mesh)
    if not len(sites):
        raise GeometryError("box contains no sites")
    outside = sites.exterior()
    uv = box.local_coords(outside.positions)
    theta = np.degrees(np.arctan2(uv[:, 1], uv[:, 0]))
    right = (theta >= -45.0) & (theta < 45.0)
    top = (theta >= 45.0) & (theta < 135.0)
    bottom = (theta >= -135.0) & (theta < -45.0)
    left = ~(right | top | bottom)
    arcs = {
        "ab": outside.subset(left),
        "bc": outside.subset(bottom),
        "cd": outside.subset(right),
        "da": outside.subset(top),
    }
    return Quad(sites, arcs, name=name).validate()


def path_quad(length, mesh=1.0):
    """Single-File Quad: the Row (0..length-1, 0), Crossed Left to Right

    The left end (-1, 0) is arc ab and the right end (length, 0) is arc cd; the row
    above is da and the row below is bc.
    """
    if length < 1:
        raise GeometryError("path length must be at least 1")
    sites = SiteSet([(i, 0) for i in range(length)], mesh)
    arcs = {
        "ab": SiteSet([(-1, 0)], mesh),
        "cd": SiteSet([(length, 0)], mesh),
        "da": SiteSet([(i, 1) for i in range(-1, length)], mesh),
        "bc": SiteSet([(i, -1) for i in range(0, length + 1)], mesh),
    }
    return Quad(sites, arcs, name=f"path{length}").validate()


@dataclass(frozen=True)
class EpsGrid:
    """
    Grid of eps-Squares Centered at 2 eps e^{i angle} Z^2 + shift
    """

    eps: float
    shift: tuple = (0.0, 0.0)
    angle: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "shift", (float(self.shift[0]), float(self.shift[1])))
        if not self.eps > 0:
            raise GeometryError("grid eps must be positive")
        if not all(-self.eps <= s < self.eps for s in self.shift):
            raise GeometryError(f"grid shift {self.shift} must lie in [-eps, eps)^2")

    def _frame(self):
        return Box(self.shift, self.eps, self.angle)

    def square(self, m, n):
        cos, sin = math.cos(self.angle), math.sin(self.angle)
        u, v = 2.0 * self.eps * m, 2.0 * self.eps * n
        center = (self.shift[0] + cos * u - sin * v, self.shift[1] + sin * u + cos * v)
        return Box(center, self.eps, self.angle)

    def to_json(self):
        return {"eps": self.eps, "shift": list(self.shift), "angle": self.angle}


@dataclass(frozen=True)
class GridSquare:
    index: tuple
    square: Box
    doubled: Box


def grid_squares_in(grid, region):
    """Grid Squares Fully Contained in a Region Box

    Parameters
    ----------
    grid : EpsGrid
        The eps-Grid
    region : Box
        Containing Box

    Returns
    -------
    list of GridSquare
        Each Square Q with its Concentric Doubled Square 2Q
    """
    if grid.eps > region.radius:
        return []
    uv = grid._frame().local_coords(region.corners())
    lo = np.floor((uv.min(axis=0) + grid.eps) / (2.0 * grid.eps)).astype(int) - 1
    hi = np.ceil((uv.max(axis=0) + grid.eps) / (2.0 * grid.eps)).astype(int) + 1
    squares = []
    for m in range(lo[0], hi[0] + 1):
        for n in range(lo[1], hi[1] + 1):
            square = grid.square(m, n)
            if region.contains_box(square):
                squares.append(GridSquare((m, n), square, Box(square.center, 2.0 * grid.eps, grid.angle)))
    return squares


def geometry_json(obj, mesh):
    """JSON Document Describing a Box, Annulus or Grid at a Mesh"""
    data = obj.to_json()
    data["mesh"] = mesh
    data["kind"] = type(obj).__name__
    return json.dumps(data, sort_keys=True)
