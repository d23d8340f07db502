import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hexperc.errors import GeometryError
from hexperc.lattice.geometry import (
    Annulus,
    Box,
    EpsGrid,
    HexCoord,
    SiteSet,
    annulus_sites,
    axial_to_xy,
    box_quad,
    box_sites,
    geometry_json,
    grid_squares_in,
    nearest_site,
    neighbors,
    path_quad,
)

coords = st.tuples(st.integers(-500, 500), st.integers(-500, 500))


def test_neighbors_of_origin():
    assert set(neighbors((0, 0))) == {(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)}


@given(coords)
def test_neighbors_are_at_unit_distance(c):
    x, y = HexCoord(*c).position(1.0)
    for other in neighbors(c):
        ox, oy = other.position(1.0)
        assert math.hypot(ox - x, oy - y) == pytest.approx(1.0)


@given(coords, st.sampled_from([1.0, 0.5, 1.0 / 64.0]))
def test_nearest_site_recovers_site(c, mesh):
    assert nearest_site(HexCoord(*c).position(mesh), mesh) == c


@pytest.mark.parametrize("angle", [0.0, 0.3])
def test_box_sites_match_direct_scan(angle):
    box = Box((0.0, 0.0), 10.0, angle)
    scan = [
        (q, r)
        for q in range(-40, 41)
        for r in range(-40, 41)
        if box.contains([HexCoord(q, r).position(1.0)])[0]
    ]
    assert box_sites(box, 1.0) == SiteSet(scan, 1.0)


def test_box_site_count_approaches_area():
    box = Box((0.0, 0.0), 1.0)
    mesh = 1.0 / 64.0
    expected = (2.0 / mesh) ** 2 * 2.0 / math.sqrt(3.0)
    assert len(box_sites(box, mesh)) == pytest.approx(expected, rel=0.05)


def test_box_half_open():
    box = Box((0.0, 0.0), 1.0)
    assert box.contains([(-1.0, 0.0)])[0]
    assert not box.contains([(1.0, 0.0)])[0]


def test_degenerate_shapes_raise():
    with pytest.raises(GeometryError):
        Box((0.0, 0.0), 0.0)
    with pytest.raises(GeometryError):
        Annulus((0.0, 0.0), 2.0, 1.0)
    with pytest.raises(GeometryError):
        SiteSet([(0, 0)], 0.0)


def test_annulus_layers():
    layers = annulus_sites(Annulus((0.0, 0.0), 1.5, 5.0), 1.0)
    assert layers.hole.issubset(layers.full)
    assert layers.sites.isdisjoint(layers.hole)
    assert len(layers.sites) + len(layers.hole) == len(layers.full)
    assert layers.inner_layer.any() and layers.outer_layer.any()


def test_point_annulus_has_single_site_hole():
    layers = annulus_sites(Annulus.around_site((2, 1), 3.0, 1.0), 1.0)
    assert list(layers.hole) == [HexCoord(2, 1)]


def test_site_set_algebra():
    a = SiteSet([(0, 0), (1, 0), (2, 0)], 1.0)
    b = SiteSet([(2, 0), (3, 0)], 1.0)
    assert len(a.union(b)) == 4
    assert list(a.intersection(b)) == [HexCoord(2, 0)]
    assert len(a.difference(b)) == 2
    assert (5, 5) not in a
    assert np.array_equal(a.index_of([(1, 0), (9, 9)]), [1, -1])


def test_box_quad_arcs_partition_exterior():
    quad = box_quad(Box((0.0, 0.0), 3.0, 0.2), 1.0)
    sizes = sum(len(quad.arcs[name]) for name in ("ab", "bc", "cd", "da"))
    assert sizes == len(quad.sites.exterior())


def test_malformed_quad_raises():
    quad = path_quad(3)
    quad.arcs.pop("bc")
    quad._validated = False
    with pytest.raises(GeometryError):
        quad.validate()


def test_grid_squares():
    region = Box((0.0, 0.0), 1.0)
    assert len(grid_squares_in(EpsGrid(0.5), region)) == 1
    assert grid_squares_in(EpsGrid(1.5), region) == []
    assert len(grid_squares_in(EpsGrid(0.125), region)) == 49


def test_grid_shift_must_lie_in_one_square():
    assert EpsGrid(0.5, (-0.5, 0.25)).shift == (-0.5, 0.25)
    for shift in ((0.5, 0.0), (0.0, -0.75)):
        with pytest.raises(GeometryError, match="grid shift"):
            EpsGrid(0.5, shift)


def test_grid_square_count_scales_with_area():
    region = Box((0.0, 0.0), 1.0)
    counts = [len(grid_squares_in(EpsGrid(eps), region)) for eps in (1.0 / 16.0, 1.0 / 32.0)]
    assert counts[1] / counts[0] == pytest.approx(4.0, rel=0.1)


def test_geometry_json():
    box = json.loads(geometry_json(Box((1.0, 2.0), 3.0), 0.5))
    assert box == {"kind": "Box", "center": [1.0, 2.0], "radius": 3.0, "angle": 0.0, "mesh": 0.5}
    annulus = json.loads(geometry_json(Annulus((0.0, 0.0), 1.0, 4.0), 0.25))
    assert annulus["kind"] == "Annulus" and annulus["r_outer"] == 4.0
    assert json.loads(geometry_json(EpsGrid(0.125), 1.0))["eps"] == 0.125
    assert geometry_json(Box((1.0, 2.0), 3.0), 0.5) == geometry_json(Box((1.0, 2.0), 3.0), 0.5)


@given(st.integers(-50, 50), st.integers(-50, 50))
def test_box_sites_commute_with_lattice_translation(dq, dr):
    shift = axial_to_xy([(dq, dr)], 1.0)[0]
    moved = box_sites(Box((0.13 + shift[0], 0.07 + shift[1]), 2.71), 1.0)
    assert moved == box_sites(Box((0.13, 0.07), 2.71), 1.0).translate(dq, dr)
