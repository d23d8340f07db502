"""faces.py

Faces Induced by Exactly Four Crossing Interfaces, and the Open-Connection Bit Between
the Open Faces

"""
import logging
from dataclasses import dataclass

import numpy as np

from ..connectivity.clusters import dense_labels, label_components
from ..sampling.configuration import OPEN
from .interfaces import annulus_geometry, interface_quality, sector_sequence

logger = logging.getLogger(__name__)


@dataclass
class FaceConfig:
    """
    Four Alternating Faces Around an Inner Face, theta_1 Open

    Face i runs between endpoints[i] and endpoints[i + 1] (cyclically); domain holds
    the sites enclosed by the faces.
    """

    faces: list
    colors: list
    endpoints: np.ndarray
    domain: object
    u: float

    @property
    def quality(self):
        return interface_quality(self.endpoints, self.u)

    def __len__(self):
        return len(self.faces)


def extract_faces(config, annulus):
    """Faces Bounding the Centre Component of the Complement of the Interface Hull

    The hull is the set of sites neighbouring the crossing interfaces. Faces exist
    when exactly four interfaces cross and the component of the complement holding
    the centre stays away from the outer boundary.

    Parameters
    ----------
    config : Configuration
        Configuration Covering Box(r_outer)
    annulus : Annulus
        The Annulus; Faces Sit at Its Inner Radius

    Returns
    -------
    FaceConfig or None
    """
    layers, domain = annulus_geometry(annulus, config.mesh)
    sites = layers.sites
    state = config.state_at(sites.coords)
    comps = domain.components(state)
    if comps.count != 4:
        return None
    crossing = comps.crossing_pairs()
    hull = np.zeros(len(sites), dtype=bool)
    hull[domain.ea[crossing]] = True
    hull[domain.eb[crossing]] = True

    full = layers.full
    in_full = full.index_of(sites.coords)
    free = np.ones(len(full), dtype=bool)
    free[in_full[hull]] = False
    labels = dense_labels(label_components(full, free), free)
    centre = labels[full.index_of(layers.hole.coords[:1])[0]]
    inside = labels == centre
    if np.any(inside & full.boundary_mask()):
        return None

    touching = full.adjacent_mask(full.subset(inside))[in_full]
    boundary = hull & touching
    sector_labels, sequence = sector_sequence(layers, domain, comps, state)
    start = next(i for i, (_, color, _) in enumerate(sequence) if color == OPEN)
    sequence = sequence[start:] + sequence[:start]
    faces, colors, endpoints = [], [], []
    for label, color, endpoint in sequence:
        face = boundary & (sector_labels == label)
        faces.append(sites.subset(face))
        colors.append(color)
        endpoints.append(endpoint)
    if any(not len(face) for face in faces):
        return None
    return FaceConfig(faces, colors, np.array(endpoints), full.subset(inside), annulus.r_inner)


def u_theta(config, theta):
    """One if an Open Path Inside the Face Domain Joins theta_1 to theta_3

    Raises
    ------
    GeometryError
        If the configuration does not cover the face domain
    """
    region = theta.domain.union(theta.faces[0]).union(theta.faces[2])
    state = config.state_at(region.coords)
    first = region.contains(theta.faces[0].coords)
    third = region.contains(theta.faces[2].coords)
    first_mask = np.zeros(len(region), dtype=bool)
    third_mask = np.zeros(len(region), dtype=bool)
    first_mask[region.index_of(theta.faces[0].coords)[first]] = True
    third_mask[region.index_of(theta.faces[2].coords)[third]] = True
    member = state == OPEN
    labels = dense_labels(label_components(region, member), member)
    a = set(labels[first_mask & member].tolist()) - {-1}
    b = set(labels[third_mask & member].tolist()) - {-1}
    return int(bool(a & b))
