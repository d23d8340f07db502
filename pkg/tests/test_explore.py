import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hexperc.arms.arm_events import arm_event
from hexperc.errors import GeometryError
from hexperc.explore.faces import extract_faces, u_theta
from hexperc.explore.interfaces import (
    ClosedCircuitFound,
    ReachedOuter,
    annulus_layers,
    chordal_interface,
    crossing_interfaces,
    exactly_four_arms,
    interface_count,
    interface_quality,
    radial_exploration,
    trace_to_json_line,
    winding_number,
)
from hexperc.lattice.geometry import NEIGHBOR_OFFSETS, Annulus, Box, Quad, SiteSet, axial_to_xy, box_quad
from hexperc.sampling.configuration import CLOSED, OPEN, Configuration, constant_configuration, flip, sample


def test_radial_exploration_of_constant_configurations(annulus, all_open, all_closed):
    outcome = radial_exploration(all_open, annulus)
    assert isinstance(outcome, ReachedOuter)
    assert outcome.forced_turns == 0
    assert isinstance(radial_exploration(all_closed, annulus), ClosedCircuitFound)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**20))
def test_radial_exploration_reaches_outer_iff_open_arm(index):
    annulus = Annulus((0.0, 0.0), 1.5, 4.0)
    layers = annulus_layers(annulus, 1.0)
    config = sample(layers.full, 3, index)
    reached = isinstance(radial_exploration(config, annulus), ReachedOuter)
    assert reached == arm_event(config, annulus, "O")


def test_no_interfaces_in_constant_configurations(annulus, all_open, all_closed):
    assert crossing_interfaces(all_open, annulus) == []
    assert interface_count(all_closed, annulus) == 0
    assert not exactly_four_arms(all_open, annulus)
    assert extract_faces(all_open, annulus) is None


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**20))
def test_crossing_interfaces_alternate(index):
    annulus = Annulus((0.0, 0.0), 1.5, 5.0)
    config = sample(annulus_layers(annulus, 1.0).full, 12, index)
    traces = crossing_interfaces(config, annulus)
    assert len(traces) == interface_count(config, annulus)
    assert len(traces) % 2 == 0
    for trace in traces:
        assert len(trace) > 0
        assert all(config.is_open(site) for site in trace.open_sites)
        assert not any(config.is_open(site) for site in trace.closed_sites)


def test_chordal_interface_of_open_quad_hugs_closed_arcs(quad):
    trace = chordal_interface(constant_configuration(quad.sites, OPEN), quad)
    closed_arcs = quad.arcs["bc"].union(quad.arcs["cd"]).union(quad.arcs["da"])
    assert len(trace) > 0
    assert closed_arcs.contains(trace.closed_sites).all()
    assert quad.sites.contains(trace.open_sites).all()


def test_chordal_interface_of_closed_quad_hugs_open_arc(quad):
    trace = chordal_interface(constant_configuration(quad.sites, CLOSED), quad)
    assert quad.arcs["ab"].contains(trace.open_sites).all()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**20))
def test_chordal_interface_edges_separate_colours(index):
    quad = box_quad(Box((0.0, 0.0), 3.0), 1.0)
    config = sample(quad.sites, 1, index)
    trace = chordal_interface(config, quad)
    inside = quad.sites.contains(trace.open_sites)
    assert all(config.is_open(site) for site in trace.open_sites[inside])
    assert len(trace.edge_set()) == len(trace)


def test_trace_json_line(quad):
    trace = chordal_interface(constant_configuration(quad.sites, OPEN), quad)
    assert '"edges": %d' % len(trace) in trace_to_json_line(trace)


def test_winding_number():
    angles = np.linspace(0.0, 2.0 * np.pi, 20, endpoint=False)
    circle = np.column_stack((np.cos(angles), np.sin(angles)))
    assert winding_number(circle, (0.0, 0.0)) == 1
    assert winding_number(circle[::-1], (0.0, 0.0)) == -1
    assert winding_number(circle, (5.0, 0.0)) == 0


def _find_faces(annulus, seed, limit=2000):
    region = annulus_layers(annulus, 1.0).full
    for index in range(limit):
        config = sample(region, seed, index)
        theta = extract_faces(config, annulus)
        if theta is not None:
            return config, theta
    pytest.skip("no configuration with four crossing interfaces")


def test_faces_alternate_and_start_open():
    annulus = Annulus((0.0, 0.0), 1.5, 5.0)
    config, theta = _find_faces(annulus, 21)
    assert len(theta) == 4
    assert theta.colors == [OPEN, CLOSED, OPEN, CLOSED]
    assert exactly_four_arms(config, annulus)


def test_u_theta_of_constant_interiors():
    annulus = Annulus((0.0, 0.0), 1.5, 5.0)
    config, theta = _find_faces(annulus, 22)
    inside = theta.domain.contains(config.region.coords)
    assert u_theta(config.with_states(inside, OPEN), theta) == 1
    assert u_theta(config.with_states(inside, CLOSED), theta) == 0


def test_faces_quality_is_the_interface_quality():
    annulus = Annulus((0.0, 0.0), 1.5, 5.0)
    config, theta = _find_faces(annulus, 23)
    endpoints = [trace.inner_endpoint for trace in crossing_interfaces(config, annulus)]
    assert theta.quality == pytest.approx(interface_quality(endpoints, annulus.r_inner))


def _sites(coords):
    return [tuple(int(v) for v in site) for site in coords]


def test_faces_of_four_straight_arms():
    annulus = Annulus((0.0, 0.0), 0.25, 4.0)
    region = annulus_layers(annulus, 1.0).full
    q, r = region.coords[:, 0], region.coords[:, 1]
    config = Configuration(region, np.where((r == 0) & (q != 0), OPEN, CLOSED))
    theta = extract_faces(config, annulus)
    assert theta is not None
    assert theta.colors == [OPEN, CLOSED, OPEN, CLOSED]
    faces = {frozenset(_sites(face.coords)) for face in theta.faces}
    assert faces == {
        frozenset({(1, 0)}),
        frozenset({(0, 1), (-1, 1)}),
        frozenset({(-1, 0)}),
        frozenset({(0, -1), (1, -1)}),
    }
    assert len(theta.faces[0]) == 1
    endpoints = {tuple(point) for point in theta.endpoints}
    assert endpoints == {tuple(trace.inner_endpoint) for trace in crossing_interfaces(config, annulus)}


def _trace_edges(trace):
    return list(zip(_sites(trace.open_sites), _sites(trace.closed_sites)))


def _ahead(right, left, mesh):
    """Third Site of the Triangle Clockwise of left Around right"""
    offsets = _sites(NEIGHBOR_OFFSETS)
    around = {(right[0] + dq, right[1] + dr) for dq, dr in offsets}
    common = [site for site in around if (site[0] - left[0], site[1] - left[1]) in offsets]
    xy = axial_to_xy([right, left] + common, mesh)
    to_left = xy[1] - xy[0]
    for site, point in zip(common, xy[2:]):
        to_site = point - xy[0]
        if to_left[0] * to_site[1] - to_left[1] * to_site[0] < 0:
            return site
    raise AssertionError("no triangle ahead")


def _stepped_interface(config, quad):
    """Replays the Chordal Walk One Triangle at a Time from the First Kept Edge"""
    inside = dict(zip(_sites(quad.sites.coords), config.state_at(quad.sites.coords).tolist()))
    wired_open = set(_sites(quad.arcs["ab"].coords))
    wired_closed = {site for name in ("bc", "cd", "da") for site in _sites(quad.arcs[name].coords)}

    def color(site):
        if site in wired_open:
            return OPEN
        if site in inside:
            return inside[site]
        if site in wired_closed:
            return CLOSED
        return None

    trace = chordal_interface(config, quad)
    right, left = _trace_edges(trace)[0]
    edges = []
    for _ in range(6 * (len(inside) + len(wired_open) + len(wired_closed))):
        if right in inside or left in inside:
            edges.append((right, left))
        site = _ahead(right, left, quad.sites.mesh)
        state = color(site)
        if state is None:
            return edges
        if state == OPEN:
            right = site
        else:
            left = site
    raise AssertionError("stepped walk did not leave the quad")


SMALL_QUAD = box_quad(Box((0.0, 0.0), 2.0), 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**20))
def test_chordal_interface_matches_stepped_walk(index):
    config = sample(SMALL_QUAD.sites, 4, index)
    assert _trace_edges(chordal_interface(config, SMALL_QUAD)) == _stepped_interface(config, SMALL_QUAD)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**20))
def test_chordal_interface_ignores_unvisited_sites(index):
    config = sample(SMALL_QUAD.sites, 5, index)
    trace = chordal_interface(config, SMALL_QUAD)
    visited = set(_sites(trace.open_sites)) | set(_sites(trace.closed_sites))
    for site in _sites(SMALL_QUAD.sites.coords):
        if site not in visited:
            assert _trace_edges(chordal_interface(flip(config, site), SMALL_QUAD)) == _trace_edges(trace)


def test_quad_without_junction_raises():
    arcs = {
        "ab": [(1, 0)],
        "bc": [(1, -1)],
        "cd": [(0, 1), (-1, 1)],
        "da": [(-1, 0), (0, -1)],
    }
    quad = Quad(SiteSet([(0, 0)], 1.0), {name: SiteSet(coords, 1.0) for name, coords in arcs.items()})
    with pytest.raises(GeometryError, match="degenerate quad"):
        chordal_interface(constant_configuration(quad.sites, OPEN), quad)
