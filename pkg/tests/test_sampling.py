import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hexperc.errors import GeometryError
from hexperc.lattice.geometry import Box, SiteSet, box_sites
from hexperc.sampling.configuration import (
    dump_configuration,
    flip,
    load_configuration,
    sample,
    sample_key,
)

REGION = box_sites(Box((0.0, 0.0), 6.0), 1.0)


def test_sample_is_reproducible():
    first = sample(REGION, 3, 17)
    second = sample(REGION, 3, 17)
    assert np.array_equal(first.state, second.state)
    assert (first.seed, first.sample_index) == (3, 17)


def test_indices_give_different_samples():
    assert not np.array_equal(sample(REGION, 3, 0).state, sample(REGION, 3, 1).state)
    assert not np.array_equal(sample(REGION, 3, 0).state, sample(REGION, 4, 0).state)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 10_000))
def test_site_states_do_not_depend_on_the_region(seed, index):
    small = box_sites(Box((1.0, 1.0), 2.0), 1.0)
    big = sample(REGION, seed, index)
    assert np.array_equal(sample(small, seed, index).state, big.restrict(small))


def test_critical_density():
    region = box_sites(Box((0.0, 0.0), 1.0), 1.0 / 64.0)
    density = sample(region, 0, 0).state.mean()
    assert abs(density - 0.5) < 4.0 * 0.5 / np.sqrt(len(region))


def test_empty_region_raises():
    with pytest.raises(GeometryError, match="empty region"):
        sample(SiteSet([], 1.0), 0, 0)


def test_negative_seed_raises():
    with pytest.raises(ValueError):
        sample_key(-1, 0)


def test_flip_changes_one_site():
    config = sample(REGION, 0, 0)
    flipped = flip(config, (0, 0))
    changed = np.nonzero(config.state != flipped.state)[0]
    assert changed.tolist() == [REGION.index((0, 0))]
    with pytest.raises(GeometryError):
        flip(config, (100, 100))


def test_color_reversal():
    config = sample(REGION, 0, 5)
    assert config.color_reversed().open_count == len(REGION) - config.open_count


def test_dump_and_load(tmp_path):
    config = sample(REGION, 11, 2)
    path = tmp_path / "config.rle"
    dump_configuration(config, path)
    loaded = load_configuration(path)
    assert loaded.region == REGION
    assert np.array_equal(loaded.state, config.state)
    assert (loaded.seed, loaded.sample_index) == (11, 2)


def test_truncated_dump_raises(tmp_path):
    path = tmp_path / "config.rle"
    dump_configuration(sample(REGION, 0, 0), path)
    header, runs = path.read_text().splitlines()
    path.write_text(header + "\n" + " ".join(runs.split()[:-1]) + "\n")
    with pytest.raises(ValueError):
        load_configuration(path)
