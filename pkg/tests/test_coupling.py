import math

import numpy as np
import pytest

from hexperc.coupling.conditional import (
    Always,
    ConditionalSampler,
    SiteOpen,
    SiteState,
    StatisticEquals,
    conditional_marginal,
    run_conditioned,
    sample_conditioned,
)
from hexperc.coupling.separation import (
    FaceFingerprint,
    UBit,
    color_switch_tv,
    coupling_decay,
    coupling_tv_experiment,
    endpoint_hierarchy,
    exactly_four_separated_prob,
    one_arm_circuit_coupling,
    open_circuit_probability,
    outer_condition,
    relative_qualities,
    separation_statistic,
)
from hexperc.errors import BudgetExhaustedError, GeometryError
from hexperc.explore.interfaces import annulus_layers
from hexperc.lattice.geometry import Annulus, Box, box_sites
from hexperc.runner.experiments import run_rows, summarize
from hexperc.sampling.configuration import CLOSED, OPEN, Configuration, constant_configuration

REGION = box_sites(Box((0.0, 0.0), 3.0), 1.0)


def test_always_accepts_the_first_proposal():
    sampler = ConditionalSampler(REGION, Always(), 10, 0)
    config = sample_conditioned(sampler)
    assert config.sample_index == 0
    assert (sampler.attempts, sampler.accepted) == (1, 1)


def test_conditioned_site_is_open_and_others_are_fair():
    sampler = ConditionalSampler(REGION, SiteOpen((0, 0)), 10_000, 1)
    assert sample_conditioned(sampler).is_open((0, 0))
    marginal = conditional_marginal(ConditionalSampler(REGION, SiteOpen((0, 0)), 10_000, 1), (2, 0), 400)
    assert abs(marginal - 0.5) < 0.1


def test_budget_exhaustion_reports_attempts():
    never = StatisticEquals(SiteState((0, 0)), 2)
    with pytest.raises(BudgetExhaustedError) as info:
        sample_conditioned(ConditionalSampler(REGION, never, 25, 0))
    assert info.value.attempts == 25
    assert info.value.accepted == 0
    with pytest.raises(BudgetExhaustedError):
        run_conditioned(ConditionalSampler(REGION, never, 100, 0), 5)
    with pytest.raises(ValueError):
        ConditionalSampler(REGION, never, 0, 0)


def test_run_conditioned_keeps_first_accepted_indices():
    run = run_conditioned(ConditionalSampler(REGION, SiteOpen((0, 0)), 1000, 3), 30, SiteState((1, 0)))
    assert len(run.values) == 30
    assert run.indices == sorted(run.indices)
    assert run.attempts == run.indices[-1] + 1
    assert 0.0 < run.acceptance_rate <= 1.0


def test_run_conditioned_ignores_worker_count():
    runs = [
        run_conditioned(ConditionalSampler(REGION, SiteOpen((0, 0)), 1000, 3), 30, SiteState((1, 0)), workers)
        for workers in (1, 2)
    ]
    assert runs[0].indices == runs[1].indices
    assert runs[0].values == runs[1].values


def test_fingerprint_of_open_configuration():
    annulus = Annulus((0.0, 0.0), 2.0, 4.0)
    config = constant_configuration(annulus_layers(annulus, 1.0).full, OPEN)
    assert FaceFingerprint(annulus)(config) == (0, 0)
    assert FaceFingerprint(annulus, include_u=False)(config) == (0,)
    assert UBit(annulus)(config) == -1


def test_unknown_outer_condition():
    with pytest.raises(ValueError):
        outer_condition("round", 2.0, 8.0, 1.0)


def test_separation_statistic_small_scale():
    result = separation_statistic(2.0, 6.0, 20, 0, budget=20_000)
    assert result.estimate.n == 20
    assert 0.0 <= result.estimate.mean <= 1.0
    assert result.histogram.sum() == 20
    assert 0.0 < result.acceptance_rate < 1.0


def test_exactly_four_separated_is_a_probability():
    estimate = exactly_four_separated_prob(2.0, 50, 0)
    assert 0.0 <= estimate.mean <= 1.0
    assert estimate.n == 50


def test_coupling_decay_recovers_power():
    rows = [
        {"ratio": s, "tv": 0.1 + s ** -0.5, "tv_null": 0.1, "tv_stderr": 0.01 * s ** -0.5, "tv_null_stderr": 0.0}
        for s in (4.0, 8.0, 16.0)
    ]
    assert coupling_decay(rows)["k"] == pytest.approx(0.5)


def test_endpoint_hierarchy():
    spacing, levels = endpoint_hierarchy([(0.0, 0.0), (1.0, 0.0), (10.0, 0.0)])
    assert spacing == 1.0
    assert len(levels) == 5
    assert len(set(levels[0])) == 3
    assert levels[1][0] == levels[1][1] != levels[1][2]
    assert len(set(levels[-1])) == 1
    with pytest.raises(ValueError):
        endpoint_hierarchy([(0.0, 0.0)])
    with pytest.raises(ValueError):
        endpoint_hierarchy([(0.0, 0.0), (0.0, 0.0)])


def test_relative_qualities():
    points = np.array([(0.0, 0.0), (1.0, 0.0), (10.0, 0.0)])
    qualities = relative_qualities(points, 4)
    assert qualities[0] == (1, pytest.approx(1.0 / 4.0))


def test_run_conditioned_needs_min_accepted():
    with pytest.raises(BudgetExhaustedError) as info:
        run_conditioned(ConditionalSampler(REGION, SiteOpen((0, 0)), 40, 0), 30, min_accepted=30)
    assert info.value.attempts == 40
    assert 0 < info.value.accepted < 30
    short = run_conditioned(ConditionalSampler(REGION, SiteOpen((0, 0)), 40, 0), 30, min_accepted=10)
    assert 10 <= short.accepted < 30
    for bad in (0, 31):
        with pytest.raises(ValueError):
            run_conditioned(ConditionalSampler(REGION, SiteOpen((0, 0)), 40, 0), 30, min_accepted=bad)


def test_fingerprint_keeps_only_the_first_colour():
    annulus = Annulus((0.0, 0.0), 0.25, 4.0)
    region = annulus_layers(annulus, 1.0).full
    q, r = region.coords[:, 0], region.coords[:, 1]
    config = Configuration(region, np.where((r == 0) & (q != 0), OPEN, CLOSED))
    key = FaceFingerprint(annulus, 8)(config)
    assert key[0] == 4
    assert len(key) == 2 + key[0] + 1
    assert key[1] in (OPEN, CLOSED)
    flipped = FaceFingerprint(annulus, 8, include_u=False, reverse=True)(config)
    assert flipped[1] == 1 - key[1]
    assert flipped[2:] == key[2:-1]


def _tv_within_null(row):
    return row["tv_excess"] <= 3.0 * math.hypot(row["tv_stderr"], row["tv_null_stderr"])


def test_identical_conditions_have_no_excess_tv():
    row = coupling_tv_experiment(2.0, 8.0, "box", "box", 100, 3, bins=8)
    assert row["n_a"] == row["n_b"] == 100
    assert 0.0 < row["acceptance_a"] <= 1.0 and 0.0 < row["acceptance_b"] <= 1.0
    assert _tv_within_null(row)


def test_color_switched_laws_match_after_reversal():
    row = color_switch_tv(2.0, 8.0, 60, 4, bins=8)
    assert 0.0 < row["acceptance_u1"] <= 1.0 and 0.0 < row["acceptance_u0"] <= 1.0
    assert _tv_within_null(row)


def test_one_arm_circuit_coupling_small_scale():
    row = one_arm_circuit_coupling(1.0, 4.0, 50, 0, u=2.0)
    assert 0.0 < row["acceptance_a"] <= 1.0 and 0.0 < row["acceptance_b"] <= 1.0
    assert 0.0 <= row["circuit_a"] <= 1.0 and 0.0 <= row["circuit_b"] <= 1.0
    assert 0.0 <= row["tv"] <= 1.0
    with pytest.raises(GeometryError):
        one_arm_circuit_coupling(1.0, 4.0, 50, 0, u=3.0)


def test_open_circuit_probability():
    estimate = open_circuit_probability(1.5, 3.0, 100, 0)
    assert estimate.n == 100
    assert 0.0 <= estimate.mean <= 1.0


@pytest.mark.slow
def test_coupling_summary_separates_decay():
    params = {"r": 1.0, "ratios": [4, 16], "conditions": ["sides", "box"], "bins": 8, "n": 1000, "color_switch": False}
    rows = run_rows("coupling", params, 7, workers=2)
    summary = summarize("coupling", rows, params)
    assert summary["decay_separated"]
    assert summary["passed"]
