import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st

from hexperc.arms.arm_events import (
    ArmPattern,
    alpha_annulus,
    append_arm_csv,
    arm_event,
    estimate_alpha,
    hole_arms_event,
    is_A_important,
    is_quad_pivotal,
    is_rho_important,
    pivotal_sites,
    robust_arm_quality,
)
from hexperc.errors import GeometryError
from hexperc.explore.interfaces import annulus_layers
from hexperc.lattice.geometry import Annulus, Box, box_quad, box_sites
from hexperc.sampling.configuration import CLOSED, OPEN, constant_configuration, sample


def test_pattern_parsing():
    pattern = ArmPattern.parse("ococ")
    assert pattern.k == 4 and pattern.is_alternating
    assert not ArmPattern("OOC").is_alternating
    for bad in ("", "OX", "OO"):
        with pytest.raises(ValueError):
            ArmPattern(bad)


def test_constant_configurations(annulus, all_open, all_closed):
    assert arm_event(all_open, annulus, "O")
    assert not arm_event(all_open, annulus, "OC")
    assert not arm_event(all_open, annulus, "OCOC")
    assert not arm_event(all_closed, annulus, "O")
    assert arm_event(all_closed, annulus, "C")
    assert robust_arm_quality(all_open, annulus) == (0.0, 0.0)


def test_point_annulus_needs_an_open_centre():
    annulus = alpha_annulus(1.0, 3.0, 1.0)
    region = annulus_layers(annulus, 1.0).full
    state = np.ones(len(region), dtype=np.uint8)
    state[region.index((0, 0))] = CLOSED
    config = constant_configuration(region, OPEN).with_states(state == CLOSED, CLOSED)
    assert not arm_event(config, annulus, "O")
    assert arm_event(constant_configuration(region, OPEN), annulus, "O")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**20))
def test_arm_events_are_nested(index):
    annulus = Annulus((0.0, 0.0), 1.5, 4.0)
    config = sample(annulus_layers(annulus, 1.0).full, 2, index)
    if arm_event(config, annulus, "OCOC"):
        assert arm_event(config, annulus, "OC")
    if arm_event(config, annulus, "OC"):
        assert arm_event(config, annulus, "O") and arm_event(config, annulus, "C")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**20))
def test_mixed_arm_events_are_nested(index):
    annulus = Annulus((0.0, 0.0), 1.5, 6.0)
    config = sample(annulus_layers(annulus, 1.0).full, 8, index)
    if arm_event(config, annulus, "OCOCC"):
        assert arm_event(config, annulus, "OCOC")
        assert arm_event(config, annulus, "OCC")
    if arm_event(config, annulus, "OOC"):
        assert arm_event(config, annulus, "OC")
    if arm_event(config, annulus, "OCOC"):
        assert arm_event(config, annulus, "OOC") and arm_event(config, annulus, "OCC")


def test_importance_of_constant_configurations(annulus, all_open, all_closed):
    layers = annulus_layers(annulus, 1.0)
    for site in layers.hole:
        assert not is_A_important(all_open, site, annulus)
        assert not is_A_important(all_closed, site, annulus)
    with pytest.raises(GeometryError):
        is_A_important(all_open, (4, 0), annulus)
    assert not is_rho_important(all_closed, (0, 0), 2.0)


def test_rho_important_star():
    region = box_sites(Box((0.0, 0.0), 3.0), 1.0)
    state = np.zeros(len(region), dtype=np.uint8)
    for site in [(0, 0), (1, 0), (2, 0), (-1, 0), (-2, 0)]:
        state[region.index(site)] = OPEN
    config = constant_configuration(region, CLOSED).with_states(state == OPEN, OPEN)
    # open row through the centre, closed rows above and below
    assert is_rho_important(config, (0, 0), 0.5)


def test_pivotality_of_constant_configurations(quad):
    opened = constant_configuration(quad.sites, OPEN)
    assert not is_quad_pivotal(opened, (0, 0), quad)
    assert not pivotal_sites(opened, quad).any()
    with pytest.raises(GeometryError):
        is_quad_pivotal(opened, (40, 0), quad)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**20))
def test_pivotal_sites_match_flip_test(index):
    quad = box_quad(Box((0.0, 0.0), 2.5), 1.0)
    config = sample(quad.sites, 4, index)
    fast = pivotal_sites(config, quad)
    slow = [is_quad_pivotal(config, site, quad) for site in quad.sites.coords]
    assert fast.tolist() == slow


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**20))
def test_hole_arms_agree_with_annulus_arms(index):
    annulus = Annulus((0.0, 0.0), 1.5, 4.0)
    config = sample(annulus_layers(annulus, 1.0).full, 6, index)
    expected = arm_event(config, annulus, "OCOC")
    assert hole_arms_event(config, annulus.inner_box, annulus.outer_box) == expected


def test_estimate_alpha_rejects_no_samples():
    with pytest.raises(ValueError):
        estimate_alpha("O", 1.0, 3.0, 1.0, 0, 0)


def test_estimate_alpha_shards_merge():
    whole = estimate_alpha("O", 1.0, 3.0, 1.0, 60, 5)
    first = estimate_alpha("O", 1.0, 3.0, 1.0, 25, 5)
    second = estimate_alpha("O", 1.0, 3.0, 1.0, 35, 5, start=25)
    assert first.estimate.merge(second.estimate) == whole.estimate
    assert 0.0 < whole.value < 1.0


def test_estimate_alpha_ignores_worker_count():
    single = estimate_alpha("OC", 1.0, 3.0, 1.0, 40, 8, workers=1)
    sharded = estimate_alpha("OC", 1.0, 3.0, 1.0, 40, 8, workers=2)
    assert single.to_row() == sharded.to_row()


def test_append_arm_csv(tmp_path):
    path = tmp_path / "arms.csv"
    first = estimate_alpha("O", 1.0, 3.0, 1.0, 10, 2)
    second = estimate_alpha("OC", 1.0, 3.0, 1.0, 10, 2)
    append_arm_csv(path, [first])
    append_arm_csv(path, [second])
    frame = pd.read_csv(path)
    assert len(frame) == 2
    assert list(frame.columns) == list(first.to_row())
