from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hexperc.connectivity.clusters import Color, ClusterIndex, build_clusters, connected, has_crossing
from hexperc.errors import GeometryError
from hexperc.lattice.geometry import Box, SiteSet, box_quad, box_sites, neighbors, path_quad
from hexperc.sampling.configuration import CLOSED, OPEN, Configuration, constant_configuration, sample

PATCH = box_sites(Box((0.0, 0.0), 1.8), 1.0)


def bfs_components(config, value):
    """Component Id per Site by Breadth-First Search, -1 Off the Colour"""
    region = config.region
    component = {}
    for start in region:
        if config.state[region.index(start)] != value or start in component:
            continue
        component[start] = len(set(component.values()))
        queue = deque([start])
        while queue:
            site = queue.popleft()
            for other in neighbors(site):
                if other in region and other not in component and config.state[region.index(other)] == value:
                    component[other] = component[start]
                    queue.append(other)
    return component


def test_patch_size():
    assert 10 <= len(PATCH) <= 22


def test_all_open_is_one_cluster():
    clusters = build_clusters(constant_configuration(PATCH, OPEN))
    assert clusters.count == 1
    assert clusters.sizes.tolist() == [len(PATCH)]


def test_isolated_site():
    state = np.zeros(len(PATCH), dtype=np.uint8)
    state[PATCH.index((0, 0))] = OPEN
    clusters = build_clusters(Configuration(PATCH, state))
    assert clusters.count == 1
    assert clusters.sizes.tolist() == [1]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**20), st.sampled_from([OPEN, CLOSED]))
def test_clusters_match_breadth_first_search(index, value):
    config = sample(PATCH, 0, index)
    clusters = ClusterIndex(config, value)
    reference = bfs_components(config, value)
    assert clusters.count == len(set(reference.values()))
    for x in reference:
        for y in reference:
            same = reference[x] == reference[y]
            assert clusters.same_cluster(PATCH.index(x), PATCH.index(y)) == same


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**20))
def test_connected_matches_breadth_first_search(index):
    config = sample(PATCH, 1, index)
    reference = bfs_components(config, OPEN)
    for x in PATCH:
        for y in PATCH:
            expected = x in reference and y in reference and reference[x] == reference[y]
            assert connected(config, x, y) == expected


def test_connected_conventions():
    closed = constant_configuration(PATCH, CLOSED)
    opened = constant_configuration(PATCH, OPEN)
    assert not connected(closed, (0, 0), (0, 0))
    assert connected(opened, (0, 0), (0, 0))
    assert connected(opened, (-1, 0), (1, 0))
    with pytest.raises(GeometryError):
        connected(opened, (0, 0), (50, 0))


def test_crossings_of_constant_configurations(quad):
    opened = constant_configuration(quad.sites, OPEN)
    closed = constant_configuration(quad.sites, CLOSED)
    assert has_crossing(opened, quad)
    assert not has_crossing(opened, quad, Color.CLOSED)
    assert has_crossing(closed, quad, "closed")
    assert not has_crossing(closed, quad)


def test_path_needs_every_site_open():
    quad = path_quad(3)
    state = np.ones(3, dtype=np.uint8)
    assert has_crossing(Configuration(quad.sites, state), quad)
    state[1] = CLOSED
    assert not has_crossing(Configuration(quad.sites, state), quad)


@pytest.mark.parametrize("box", [Box((0.0, 0.0), 4.0), Box((0.0, 0.0), 6.0, 0.3), Box((0.5, 0.5), 5.0)])
def test_duality(box):
    quad = box_quad(box, 1.0)
    for index in range(200):
        config = sample(quad.sites, 9, index)
        assert has_crossing(config, quad) != has_crossing(config, quad, Color.CLOSED)


def test_crossing_outside_region_raises(quad):
    small = SiteSet([(0, 0)], 1.0)
    with pytest.raises(GeometryError):
        has_crossing(constant_configuration(small, OPEN), quad)


def test_cluster_extent():
    region = SiteSet([(0, 0), (1, 0), (5, 0), (6, 0)], 1.0)
    clusters = ClusterIndex(Configuration(region, [OPEN, OPEN, CLOSED, OPEN]))
    assert clusters.count == 2
    pair, single = clusters.labels[0], clusters.labels[3]
    assert list(clusters.bounding_boxes[pair]) == [0, 0, 1, 0]
    assert list(clusters.bounding_boxes[single]) == [6, 0, 6, 0]
    assert clusters.diameters[pair] == pytest.approx(1.0)
    assert clusters.diameters[single] == 0.0
    touching = clusters.clusters_touching([False, False, True, True])
    assert touching[single] and not touching[pair]
