import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hexperc.lattice.geometry import Box
from hexperc.stats.estimates import Estimate, RatioEstimate, independent_ratio, tv_distance, tv_estimate
from hexperc.stats.experiments import (
    alpha_ladder,
    interface_boundary_decay,
    quasi_mult_check,
    ratio_limit_experiment,
    square_vs_plain_ratio,
    two_point_isotropy,
)
from hexperc.stats.fits import fit_exponent, fit_power_law

samples = st.lists(st.integers(0, 50), min_size=1, max_size=40)


def synthetic(value, n=100):
    """Estimate with Mean value and Relative Error 1 / sqrt(n)"""
    return Estimate(value * n, 2.0 * value * value * n, n)


@given(samples, samples, samples)
def test_merge_is_associative_and_exact(a, b, c):
    ea, eb, ec = (Estimate.from_samples(np.array(x), seed=1) for x in (a, b, c))
    left = ea.merge(eb).merge(ec)
    right = ea.merge(eb.merge(ec))
    assert left == right == Estimate.from_samples(np.array(a + b + c), seed=1)


def test_merge_needs_the_same_seed():
    with pytest.raises(ValueError):
        Estimate.from_samples([1], seed=1).merge(Estimate.from_samples([1], seed=2))


def test_estimate_basics():
    estimate = Estimate.from_samples([0, 1, 1, 0], seed=0, params={"r": 1.0})
    assert estimate.mean == 0.5
    assert estimate.stderr == pytest.approx(0.25)
    low, high = estimate.interval()
    assert low < 0.5 < high
    row = estimate.to_row()
    assert row["r"] == 1.0
    assert Estimate.from_row(row) == estimate
    with pytest.raises(ValueError):
        Estimate.from_samples([])


def test_ratio_estimate():
    x = np.array([1, 0, 1, 1, 0, 1])
    ratio = RatioEstimate.from_samples(x, x)
    assert ratio.value == 1.0
    assert ratio.stderr == 0.0
    halves = RatioEstimate.from_samples(x[:3], x[:3]).merge(RatioEstimate.from_samples(x[3:], x[3:]))
    assert halves == ratio
    assert math.isnan(RatioEstimate.from_samples(x, np.zeros(6, dtype=int)).value)


def test_independent_ratio():
    value, stderr = independent_ratio(synthetic(2.0), synthetic(1.0))
    assert value == pytest.approx(2.0)
    assert stderr == pytest.approx(2.0 * math.sqrt(2.0 / 100.0))


def test_total_variation():
    assert tv_distance("aabb", "abab") == 0.0
    assert tv_distance("aaaa", "bbbb") == 1.0
    assert tv_distance([1, 2], [2, 3]) == 0.5
    with pytest.raises(ValueError):
        tv_distance([], [1])
    same = tv_estimate(list("abcab"), list("abcab"), seed=0, n_boot=50)
    assert same.value == 0.0
    assert same.null_mean >= 0.0
    assert same.excess == -same.null_mean
    assert same.to_row()["tv_excess"] == same.excess


def test_fit_exact_power_law():
    points = [(s, synthetic(s ** -1.25)) for s in (2.0, 4.0, 8.0, 16.0)]
    fit = fit_exponent(points)
    assert fit.slope == pytest.approx(-1.25, abs=1e-9)
    assert fit.covers(-1.25)


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_exponent([(1.0, synthetic(1.0)), (2.0, synthetic(0.5))])
    with pytest.raises(ValueError):
        fit_power_law([1.0, 2.0, 4.0], [1.0, 0.0, 0.5], [0.1, 0.1, 0.1])


def test_fit_interval_covers_truth():
    rng = np.random.default_rng(0)
    scales = np.array([8.0, 16.0, 32.0, 64.0])
    truth = scales ** -1.25
    covered = 0
    for _ in range(100):
        errors = 0.05 * truth
        values = truth + rng.normal(0.0, errors)
        covered += fit_power_law(scales, values, errors).covers(-1.25)
    assert covered >= 85


def test_ratio_limit_at_one_is_exact():
    rows = ratio_limit_experiment("O", 1.0, [0.5], 50, 0)
    assert rows[0]["ratio"] == 1.0
    with pytest.raises(ValueError):
        ratio_limit_experiment("O", 1.5, [0.5], 10, 0)


def test_quasi_multiplicativity_with_equal_radii():
    row = quasi_mult_check("O", 2.0, 2.0, 4.0, 1.0, 20, 0)
    assert row["alpha12"] == 1.0
    assert row["product"] == row["alpha23"]
    with pytest.raises(ValueError):
        quasi_mult_check("O", 4.0, 2.0, 8.0, 1.0, 10, 0)


def test_two_point_needs_separated_points():
    with pytest.raises(ValueError):
        two_point_isotropy(1.0, [0.0], 1.0, 10, 0)


def test_two_point_rows():
    rows = two_point_isotropy(4.0, [0.0, math.pi / 6.0], 1.0, 30, 0)
    assert [row["angle"] for row in rows] == [0.0, math.pi / 6.0]
    for row in rows:
        assert 0.0 <= row["p"] <= 1.0
        assert 0.0 <= row["alpha1"] <= 1.0
        assert row["n"] == 30


def test_square_vs_plain_is_a_ratio():
    rows = square_vs_plain_ratio([0.0], 0.25, 40, 0)
    assert 0.0 <= rows[0]["alpha_square"] <= 1.0
    assert 0.0 <= rows[0]["alpha_plain"] <= 1.0
    assert rows[0]["n"] == 40


def test_alpha_ladder_without_enough_scales():
    estimates, fit = alpha_ladder("O", [0.5], 20, 0)
    assert fit is None
    assert len(estimates) == 1


def test_boundary_mass_is_monotone():
    rows, _ = interface_boundary_decay(Box((0.0, 0.0), 3.0), [0.5, 1.0, 3.0], 1.0, 20, 0)
    means = [row["mean"] for row in rows]
    assert means == sorted(means)
    assert rows[-1]["fraction"] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        interface_boundary_decay(Box((0.0, 0.0), 3.0), [0.0], 1.0, 10, 0)
