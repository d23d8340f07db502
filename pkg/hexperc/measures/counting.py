"""counting.py

Counting Measures on Pivotal, Important and Cluster Sites and on Interface Edges, and
Enhanced Tilings with Their Refinement Order

"""
import logging
from dataclasses import dataclass, field

import numpy as np

from ..arms.arm_events import A_important_sites, pivotal_sites, rho_important_sites
from ..connectivity.clusters import dense_labels, label_components
from ..errors import GeometryError
from ..explore.interfaces import annulus_layers, chordal_interface
from ..lattice.geometry import Annulus, Box, SiteSet, axial_to_xy, box_sites, nearest_site
from ..sampling.configuration import OPEN

logger = logging.getLogger(__name__)

KINDS = ("pivotal4", "cluster1", "interface2")


@dataclass
class PointMeasure:
    """
    Weighted Atoms on Sites ((N, 2) Axial) or Edges ((N, 4): Open Site, Closed Site)

    A raw measure has unit weights; normalized(alpha) rescales every atom to
    mesh ** 2 / alpha, alpha being the run's estimate of alpha_k(mesh, 1).
    """

    atoms: np.ndarray
    weights: np.ndarray
    kind: str
    mesh: float
    reference: float = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"Not a known measure kind: {self.kind}")
        if len(self.weights) != len(self.atoms):
            raise ValueError("one weight per atom is required")
        if np.any(self.weights <= 0):
            raise ValueError("atom weights must be positive")

    @classmethod
    def raw(cls, atoms, kind, mesh):
        atoms = np.asarray(atoms, dtype=np.int64)
        width = 4 if kind == "interface2" else 2
        atoms = atoms.reshape(-1, width)
        return cls(atoms, np.ones(len(atoms)), kind, mesh)

    def __len__(self):
        return len(self.atoms)

    @property
    def is_raw(self):
        return self.reference is None

    @property
    def total_mass(self):
        return float(self.weights.sum())

    @property
    def atom_set(self):
        return {tuple(int(v) for v in atom) for atom in self.atoms}

    @property
    def positions(self):
        """Site Centres, or Edge Midpoints for Interface Measures"""
        if self.kind == "interface2":
            return (axial_to_xy(self.atoms[:, :2], self.mesh) + axial_to_xy(self.atoms[:, 2:], self.mesh)) / 2.0
        return axial_to_xy(self.atoms, self.mesh)

    def normalized(self, alpha):
        if not alpha > 0:
            raise ValueError("normalization needs a positive arm probability")
        weight = self.mesh ** 2 / alpha
        return PointMeasure(self.atoms, np.full(len(self.atoms), weight), self.kind, self.mesh, alpha)

    def where(self, mask):
        mask = np.asarray(mask, dtype=bool)
        return PointMeasure(self.atoms[mask], self.weights[mask], self.kind, self.mesh, self.reference)

    def restricted_to(self, sites):
        """Atoms on Sites of a SiteSet; an Edge Counts When Its Open Side Is There"""
        return self.where(sites.contains(self.atoms[:, :2]))

    def mass_in(self, box):
        return self.where(box.contains(self.positions)).total_mass


def pivotal_measure(config, quad):
    """Counting Measure on the Quad-Pivotal Sites"""
    atoms = quad.sites.coords[pivotal_sites(config, quad)]
    return PointMeasure.raw(atoms, "pivotal4", config.mesh)


def A_important_measure(config, annulus):
    """Counting Measure on the A-Important Sites of the Inner Face"""
    layers = annulus_layers(annulus, config.mesh)
    atoms = layers.hole.coords[A_important_sites(config, annulus)]
    return PointMeasure.raw(atoms, "pivotal4", config.mesh)


def cluster_sites(config, annulus):
    """Mask over the Inner Face of the Sites with an Open Arm to the Outer Boundary"""
    layers = annulus_layers(annulus, config.mesh)
    full = layers.full
    member = config.state_at(full.coords) == OPEN
    labels = dense_labels(label_components(full, member), member)
    touching = np.zeros(int(labels.max()) + 2, dtype=bool)
    touching[labels[member & full.boundary_mask()]] = True
    hole_labels = labels[full.index_of(layers.hole.coords)]
    return (hole_labels >= 0) & touching[hole_labels]


def cluster_measure(config, annulus):
    """Area Measure of the Clusters Reaching the Outer Boundary, on the Inner Face"""
    layers = annulus_layers(annulus, config.mesh)
    return PointMeasure.raw(layers.hole.coords[cluster_sites(config, annulus)], "cluster1", config.mesh)


def interface_measure(config, quad):
    """Counting Measure on the Edges of the Chordal Exploration Path"""
    trace = chordal_interface(config, quad)
    atoms = np.hstack((trace.open_sites, trace.closed_sites))
    return PointMeasure.raw(atoms, "interface2", config.mesh)


def rho_measure(config, domain, rho):
    """Counting Measure on the rho-Important Sites of a Domain"""
    atoms = domain.coords[rho_important_sites(config, domain, rho)]
    return PointMeasure.raw(atoms, "pivotal4", config.mesh)


def _inner_face(annulus, mesh):
    if annulus.is_point(mesh):
        return SiteSet([nearest_site(annulus.center, mesh)], mesh)
    return box_sites(annulus.inner_box, mesh)


@dataclass
class EnhancedTiling:
    """
    Annuli Whose Inner Faces Tile a Domain at a Given Mesh

    Point-holed entries (r_inner below half a mesh) have a single site as inner face.
    """

    annuli: list
    mesh: float
    name: str = "tiling"
    _faces: list = field(default=None, repr=False)

    def inner_faces(self):
        if self._faces is None:
            self._faces = [_inner_face(annulus, self.mesh) for annulus in self.annuli]
        return self._faces

    def validate(self):
        """Raises GeometryError Unless the Inner Faces Are Pairwise Disjoint"""
        faces = self.inner_faces()
        if not faces:
            raise GeometryError("not a tiling: no annuli")
        merged = faces[0]
        for face in faces[1:]:
            merged = merged.union(face)
        seen = sum(len(face) for face in faces)
        if len(merged) != seen:
            raise GeometryError("not a tiling: inner faces overlap")
        return self

    @property
    def diameter(self):
        """Largest Euclidean Diameter of an Outer Box"""
        return max(2.0 * np.sqrt(2.0) * annulus.r_outer for annulus in self.annuli)

    def covers(self, sites):
        faces = self.inner_faces()
        covered = np.zeros(len(sites), dtype=bool)
        for face in faces:
            covered |= face.contains(sites.coords)
        return bool(covered.all())


def tiling_measure(config, tiling):
    """Sum over the Tiling of the A-Important Counting Measures

    Inner faces are disjoint, so every site is counted for at most one annulus.

    Raises
    ------
    GeometryError
        If the Inner Faces Overlap
    """
    tiling.validate()
    atoms = [A_important_measure(config, annulus).atoms for annulus in tiling.annuli]
    return PointMeasure.raw(np.vstack(atoms), "pivotal4", config.mesh)


def refines(first, second):
    """Whether Tiling first Refines second

    True iff every pair of annuli A in first, A' in second whose inner faces share a
    site has the outer box of A inside the outer box of A'.
    """
    faces_a = first.inner_faces()
    faces_b = second.inner_faces()
    for annulus, face in zip(first.annuli, faces_a):
        for other, other_face in zip(second.annuli, faces_b):
            if face.isdisjoint(other_face):
                continue
            if not other.outer_box.contains_box(annulus.outer_box):
                return False
    return True


def grid_tiling(domain_box, inner_radius, outer_radius, mesh):
    """Squares of Radius inner_radius Tiling domain_box, Each in Its Own Outer Box

    Raises
    ------
    GeometryError
        If the Squares Do Not Fit the Domain a Whole Number of Times
    """
    if domain_box.angle != 0.0:
        raise GeometryError("grid tilings need an axis-aligned domain")
    count = domain_box.radius / inner_radius
    if abs(count - round(count)) > 1e-9 or inner_radius < mesh / 2.0:
        raise GeometryError("not a tiling: squares do not divide the domain")
    count = int(round(count))
    x0 = domain_box.center[0] - domain_box.radius + inner_radius
    y0 = domain_box.center[1] - domain_box.radius + inner_radius
    annuli = [
        Annulus((x0 + 2.0 * inner_radius * i, y0 + 2.0 * inner_radius * j), inner_radius, outer_radius)
        for j in range(count)
        for i in range(count)
    ]
    return EnhancedTiling(annuli, mesh, name=f"grid{inner_radius:g}")


def rho_tiling(domain, rho, mesh):
    """Point-Holed Tiling of a Site Set, Each Site in Box(site, rho)"""
    annuli = [Annulus.around_site(site, rho, mesh) for site in domain]
    return EnhancedTiling(annuli, mesh, name=f"rho{rho:g}")


def domination_family(domain_box, rho, mesh):
    """The Ordered Family H(rho), Point Tiling at rho, H(2 rho) on domain_box

    H(eps) has inner squares of radius eps / 8 inside outer boxes of radius 3 eps / 4,
    so H(rho) refines the point tiling, which refines H(2 rho).
    """
    domain = box_sites(domain_box, mesh)
    fine = grid_tiling(domain_box, rho / 8.0, 0.75 * rho, mesh)
    coarse = grid_tiling(domain_box, rho / 4.0, 1.5 * rho, mesh)
    return fine, domain, coarse


def domination_holds(config, domain_box, rho):
    """Atom Inclusions mu^H(rho) >= mu^rho >= mu^H(2 rho) for One Configuration"""
    fine, domain, coarse = domination_family(domain_box, rho, config.mesh)
    fine_atoms = tiling_measure(config, fine).atom_set
    point_atoms = rho_measure(config, domain, rho).atom_set
    coarse_atoms = tiling_measure(config, coarse).atom_set
    return point_atoms <= fine_atoms and coarse_atoms <= point_atoms


def domination_region(domain_box, rho):
    """Box a Configuration Must Cover for domination_holds"""
    return Box(domain_box.center, domain_box.radius + 2.0 * rho)
