"""experiments.py

Experiment Kinds: Parameter Defaults, Row Producers and Row Summaries

"""
import logging
import math
from enum import Enum

import numpy as np

from ..arms.arm_events import estimate_alpha
from ..connectivity.clusters import Color, has_crossing
from ..coupling.separation import (
    color_switch_tv,
    coupling_decay,
    coupling_tv_experiment,
    exactly_four_separated_prob,
    one_arm_circuit_coupling,
    open_circuit_probability,
    separation_statistic,
)
from ..errors import SpecValidationError
from ..lattice.geometry import Annulus, Box, box_quad, box_sites
from ..measures.counting import (
    A_important_measure,
    cluster_measure,
    domination_holds,
    domination_region,
    interface_measure,
    pivotal_measure,
)
from ..measures.grid import estimate_beta, scaling_covariance_experiment, xy_l2_experiment
from ..oracle.checks import CHECKS, oracle_equivalence
from ..sampling.configuration import sample
from ..stats.estimates import Estimate
from ..stats.experiments import (
    alpha_ladder,
    interface_boundary_decay,
    quasi_mult_check,
    ratio_limit_experiment,
    square_vs_plain_ratio,
    two_point_isotropy,
)
from ..stats.fits import CONFIDENCE_Z, fit_exponent
from .sharding import map_indices

logger = logging.getLogger(__name__)


class ExperimentKind(Enum):
    """
    Enum Class for the Experiments a Spec Can List
    """

    ORACLE = "oracle"
    DUALITY = "duality"
    CROSSING = "crossing"
    ALPHA = "alpha"
    RATIO = "ratio"
    SQUARE = "square"
    QUASI = "quasi"
    SEPARATION = "separation"
    COUPLING = "coupling"
    ONE_ARM = "onearm"
    FOUR_SEPARATED = "four_separated"
    XY = "xy"
    BETA = "beta"
    TWO_POINT = "twopoint"
    SCALING = "scaling"
    DOMINATION = "domination"
    BOUNDARY = "boundary"
    PIVOTAL = "pivotal"
    MEASURE = "measure"
    DETERMINISM = "determinism"


# plot axes per kind: x column, y column, error column, log axes
PLOT_AXES = {
    ExperimentKind.ALPHA: ("mesh", "value", "stderr", True),
    ExperimentKind.RATIO: ("mesh", "ratio", "stderr", False),
    ExperimentKind.SQUARE: ("theta", "ratio", "stderr", False),
    ExperimentKind.QUASI: ("r1", "c", "c_stderr", True),
    ExperimentKind.SEPARATION: ("ratio", "mean", "stderr", True),
    ExperimentKind.COUPLING: ("ratio", "tv", "tv_stderr", True),
    ExperimentKind.ONE_ARM: ("ratio", "tv", "tv_stderr", True),
    ExperimentKind.FOUR_SEPARATED: ("r", "mean", "stderr", True),
    ExperimentKind.XY: ("eps", "l2_ratio", "l2_stderr", True),
    ExperimentKind.TWO_POINT: ("d", "normalized", None, True),
    ExperimentKind.BOUNDARY: ("delta", "mean", "stderr", True),
    ExperimentKind.PIVOTAL: ("mesh", "normalized_mass", None, True),
}


def parse_kind(kind):
    try:
        return kind if isinstance(kind, ExperimentKind) else ExperimentKind(kind)
    except ValueError:
        raise SpecValidationError(f"Not a known experiment kind: {kind}")


def box_from_json(data):
    """Box from {center: [x, y], radius, angle}"""
    return Box(tuple(data.get("center", (0.0, 0.0))), float(data["radius"]), float(data.get("angle", 0.0)))


def annulus_from_json(data):
    """Annulus from {center: [x, y], r_inner, r_outer, angle}"""
    return Annulus(
        tuple(data.get("center", (0.0, 0.0))),
        float(data["r_inner"]),
        float(data["r_outer"]),
        float(data.get("angle", 0.0)),
    )


def _within(estimate, target, sigmas):
    return abs(estimate.mean - target) <= sigmas * estimate.stderr


def _spread_z(values, errors):
    """Largest Pairwise Difference in Units of the Combined Standard Error"""
    worst = 0.0
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            scale = math.hypot(errors[i], errors[j])
            if scale > 0:
                worst = max(worst, abs(values[i] - values[j]) / scale)
            elif values[i] != values[j]:
                return float("inf")
    return worst


# ---------------------------------------------------------------------------
# producers: (params, seed, workers) -> rows


def _run_oracle(params, seed, workers):
    return oracle_equivalence(tuple(params.get("checks", CHECKS)), params.get("mesh", 1.0), workers)


class _DualityJob:
    def __init__(self, quads, region, seed):
        self.quads = quads
        self.region = region
        self.seed = seed

    def __call__(self, index):
        config = sample(self.region, self.seed, index)
        return tuple(
            int(has_crossing(config, quad) == has_crossing(config, quad, Color.CLOSED)) for quad in self.quads
        )


def _run_duality(params, seed, workers):
    mesh = params.get("mesh", 1.0)
    boxes = [box_from_json(data) for data in params.get("boxes", [{"radius": 4.0}, {"radius": 6.0, "angle": 0.3}, {"radius": 5.0, "center": [0.5, 0.5]}])]
    quads = [box_quad(box, mesh) for box in boxes]
    region = quads[0].sites
    for quad in quads[1:]:
        region = region.union(quad.sites)
    n = params.get("n", 1000)
    violations = np.array(map_indices(_DualityJob(quads, region, seed), range(n), workers), dtype=np.int64)
    violations = violations.reshape(n, len(quads)).sum(axis=0)
    return [
        {"quad": i, "radius": box.radius, "angle": box.angle, "mesh": mesh, "n": n, "seed": seed, "violations": int(v)}
        for i, (box, v) in enumerate(zip(boxes, violations))
    ]


class _CrossingJob:
    def __init__(self, quad, seed):
        self.quad = quad
        self.seed = seed

    def __call__(self, index):
        return int(has_crossing(sample(self.quad.sites, self.seed, index), self.quad))


def _run_crossing(params, seed, workers):
    mesh = params.get("mesh", 1.0)
    box = box_from_json(params.get("box", {"radius": 8.0}))
    n, start = params.get("n", 1000), params.get("start", 0)
    hits = map_indices(_CrossingJob(box_quad(box, mesh), seed), range(start, start + n), workers)
    estimate = Estimate.from_samples(np.array(hits, dtype=np.int64), seed, {"radius": box.radius, "mesh": mesh})
    return [estimate.to_row()]


def _run_alpha(params, seed, workers):
    meshes = params.get("meshes", [params.get("mesh", 0.125)])
    estimates, _ = alpha_ladder(params.get("pattern", "OCOC"), meshes, params.get("n", 1000), seed, workers, params.get("start", 0))
    return [estimate.to_row() for estimate in estimates]


def _run_ratio(params, seed, workers):
    return ratio_limit_experiment(params.get("pattern", "OCOC"), params.get("r", 0.5), params["meshes"], params.get("n", 1000), seed, workers)


def _run_square(params, seed, workers):
    thetas = params.get("thetas", [0.0, math.pi / 4.0])
    shift = tuple(params.get("shift", (0.0, 0.0)))
    return square_vs_plain_ratio(thetas, params.get("mesh", 0.125), params.get("n", 1000), seed, shift, workers)


def _run_quasi(params, seed, workers):
    mesh = params.get("mesh", 1.0)
    return [
        quasi_mult_check(params.get("pattern", "OCOC"), r1, r2, r3, mesh, params.get("n", 1000), seed, workers)
        for r1, r2, r3 in params.get("triples", [[2.0, 4.0, 8.0], [4.0, 8.0, 16.0]])
    ]


def _run_separation(params, seed, workers):
    r, mesh = params.get("r", 2.0), params.get("mesh", 1.0)
    rows = []
    for ratio in params.get("ratios", [4, 8, 16]):
        result = separation_statistic(r, r * ratio, params.get("n", 200), seed, mesh, budget=params.get("budget"), workers=workers)
        row = result.to_row()
        row["ratio"] = ratio
        rows.append(row)
    return rows


def _run_coupling(params, seed, workers):
    r, mesh = params.get("r", 2.0), params.get("mesh", 1.0)
    a, b = params.get("conditions", ["box", "tilted"])
    bins, n, budget = params.get("bins", 12), params.get("n", 200), params.get("budget")
    rows = []
    for ratio in params.get("ratios", [4, 16]):
        row = coupling_tv_experiment(r, r * ratio, a, b, n, seed, mesh, bins, budget=budget, workers=workers)
        row["variant"] = "conditions"
        rows.append(row)
    if params.get("color_switch", True):
        ratio = max(params.get("ratios", [4, 16]))
        row = color_switch_tv(r, r * ratio, n, seed, mesh, bins, budget=budget, workers=workers)
        row.update(variant="color_switch", ratio=ratio, condition_a="u1", condition_b="u0_reversed")
        rows.append(row)
    return rows


def _run_one_arm(params, seed, workers):
    r, mesh = params.get("r", 2.0), params.get("mesh", 1.0)
    n = params.get("n", 200)
    rows = []
    for ratio in params.get("ratios", [4, 16]):
        row = one_arm_circuit_coupling(r, r * ratio, n, seed, mesh, bins=params.get("bins", 12), budget=params.get("budget"), workers=workers)
        circuit = open_circuit_probability(r, 2.0 * r, n, seed, mesh, workers)
        row.update(circuit_probability=circuit.mean, circuit_stderr=circuit.stderr)
        rows.append(row)
    return rows


def _run_four_separated(params, seed, workers):
    mesh = params.get("mesh", 1.0)
    return [
        exactly_four_separated_prob(r, params.get("n", 1000), seed, mesh, workers=workers).to_row()
        for r in params.get("radii", [2.0, 4.0, 8.0])
    ]


def _run_xy(params, seed, workers):
    annulus = annulus_from_json(params.get("annulus", {"r_inner": 0.5, "r_outer": 1.0}))
    box = box_from_json(params.get("box", {"radius": 0.25}))
    return xy_l2_experiment(
        annulus,
        box,
        params.get("eps", [0.125, 0.0625, 0.03125]),
        params.get("mesh", 1.0 / 64.0),
        params.get("n", 100),
        seed,
        params.get("mesh_ratio"),
        params.get("beta_n", 100),
        workers,
    )


def _run_beta(params, seed, workers):
    estimate = estimate_beta(
        params.get("eps", 0.125),
        params.get("mesh", 1.0 / 32.0),
        tuple(params.get("center", (0.0, 0.0))),
        params.get("theta", 0.0),
        params.get("n", 100),
        seed,
        params.get("hat", False),
        params.get("budget"),
        workers,
    )
    return [estimate.to_row()]


def _run_two_point(params, seed, workers):
    mesh = params.get("mesh", 1.0)
    angles = [math.radians(a) for a in params.get("angles", [0.0, 30.0])]
    rows = []
    for d in params.get("distances", [32, 64, 128]):
        rows.extend(two_point_isotropy(d * mesh, angles, mesh, params.get("n", 1000), seed, workers, params.get("window", 2.0)))
    return rows


def _run_scaling(params, seed, workers):
    annulus = annulus_from_json(params.get("annulus", {"r_inner": 4.0, "r_outer": 8.0}))
    box = box_from_json(params.get("box", {"radius": 2.0}))
    row = scaling_covariance_experiment(annulus, box, params.get("lam", 2.0), params.get("mesh", 1.0), params.get("n", 1000), seed, workers)
    return [row]


class _DominationJob:
    def __init__(self, domain_box, rho, mesh, seed):
        self.domain_box = domain_box
        self.rho = rho
        self.region = box_sites(domination_region(domain_box, rho), mesh)
        self.seed = seed

    def __call__(self, index):
        return int(domination_holds(sample(self.region, self.seed, index), self.domain_box, self.rho))


def _run_domination(params, seed, workers):
    domain_box = box_from_json(params.get("box", {"radius": 4.0}))
    rho, mesh, n = params.get("rho", 4.0), params.get("mesh", 1.0), params.get("n", 1000)
    holds = map_indices(_DominationJob(domain_box, rho, mesh, seed), range(n), workers)
    return [{"rho": rho, "mesh": mesh, "n": n, "seed": seed, "holds": int(sum(holds))}]


def _run_boundary(params, seed, workers):
    box = box_from_json(params.get("box", {"radius": 1.0}))
    rows, _ = interface_boundary_decay(box, params.get("deltas", [0.0625, 0.125, 0.25, 0.5]), params.get("mesh", 1.0 / 32.0), params.get("n", 200), seed, workers)
    return rows


class _MeasureJob:
    def __init__(self, measure, geometry, mesh, seed):
        self.measure = measure
        self.geometry = geometry
        self.seed = seed
        if measure in ("pivotal", "interface"):
            self.quad = box_quad(geometry, mesh)
            self.region = self.quad.sites
        else:
            self.region = box_sites(geometry.outer_box, mesh)

    def __call__(self, index):
        config = sample(self.region, self.seed, index)
        if self.measure == "pivotal":
            return len(pivotal_measure(config, self.quad))
        elif self.measure == "interface":
            return len(interface_measure(config, self.quad))
        elif self.measure == "important":
            return len(A_important_measure(config, self.geometry))
        elif self.measure == "cluster":
            return len(cluster_measure(config, self.geometry))
        raise ValueError(f"Not a known measure: {self.measure}")


def _run_measure(params, seed, workers):
    measure = params.get("measure", "important")
    mesh, n = params.get("mesh", 1.0), params.get("n", 100)
    if measure in ("pivotal", "interface"):
        geometry = box_from_json(params.get("box", {"radius": 8.0}))
    else:
        geometry = annulus_from_json(params.get("annulus", {"r_inner": 4.0, "r_outer": 8.0}))
    counts = map_indices(_MeasureJob(measure, geometry, mesh, seed), range(n), workers)
    estimate = Estimate.from_samples(np.array(counts, dtype=np.int64), seed, {"measure": measure, "mesh": mesh})
    return [estimate.to_row()]


def _run_pivotal(params, seed, workers):
    n = params.get("n", 100)
    rows = []
    for mesh in params.get("meshes", [0.125]):
        row = _run_measure({"measure": "pivotal", "box": {"radius": 1.0}, "mesh": mesh, "n": n}, seed, workers)[0]
        alpha = estimate_alpha("OCOC", mesh, 1.0, mesh, params.get("alpha_n", n), seed, workers).value
        row.update(alpha=alpha, normalized_mass=row["mean"] * mesh ** 2 / alpha if alpha else float("nan"))
        rows.append(row)
    return rows


def _run_determinism(params, seed, workers):
    kind = parse_kind(params["kind"])
    inner = params.get("params", {})
    first = run_rows(kind, inner, seed, 1)
    second = run_rows(kind, inner, seed, max(2, workers))
    return [{"kind": kind.value, "rows": len(first), "seed": seed, "identical": first == second}]


RUNNERS = {
    ExperimentKind.ORACLE: _run_oracle,
    ExperimentKind.DUALITY: _run_duality,
    ExperimentKind.CROSSING: _run_crossing,
    ExperimentKind.ALPHA: _run_alpha,
    ExperimentKind.RATIO: _run_ratio,
    ExperimentKind.SQUARE: _run_square,
    ExperimentKind.QUASI: _run_quasi,
    ExperimentKind.SEPARATION: _run_separation,
    ExperimentKind.COUPLING: _run_coupling,
    ExperimentKind.ONE_ARM: _run_one_arm,
    ExperimentKind.FOUR_SEPARATED: _run_four_separated,
    ExperimentKind.XY: _run_xy,
    ExperimentKind.BETA: _run_beta,
    ExperimentKind.TWO_POINT: _run_two_point,
    ExperimentKind.SCALING: _run_scaling,
    ExperimentKind.DOMINATION: _run_domination,
    ExperimentKind.BOUNDARY: _run_boundary,
    ExperimentKind.PIVOTAL: _run_pivotal,
    ExperimentKind.MEASURE: _run_measure,
    ExperimentKind.DETERMINISM: _run_determinism,
}


def run_rows(kind, params, seed, workers=1):
    """Rows of One Experiment"""
    kind = parse_kind(kind)
    logger.info("running %s experiment with seed %d", kind.value, seed)
    return RUNNERS[kind](dict(params or {}), seed, workers)


# ---------------------------------------------------------------------------
# summaries: (rows, params) -> dict, with "passed" when a criterion applies


def _summarize_oracle(rows, params):
    return {"checks": len(rows), "failed": sum(1 for row in rows if not row["passed"]), "passed": all(row["passed"] for row in rows)}


def _summarize_duality(rows, params):
    violations = sum(int(row["violations"]) for row in rows)
    return {"violations": violations, "passed": violations == 0}


def _summarize_crossing(rows, params):
    estimate = Estimate.from_row(rows[0])
    target = params.get("target", 0.5)
    z = (estimate.mean - target) / estimate.stderr if estimate.stderr else float("inf")
    return {"mean": estimate.mean, "stderr": estimate.stderr, "z": z, "passed": _within(estimate, target, 4.0)}


def _summarize_alpha(rows, params):
    points = [(1.0 / row["mesh"], Estimate.from_row(row)) for row in rows]
    if len(points) < 3 or any(estimate.mean <= 0 for _, estimate in points):
        return {"slope": float("nan"), "half_width": float("nan"), "passed": False}
    fit = fit_exponent(points)
    summary = fit.to_json()
    if "expected" in params:
        summary["passed"] = abs(fit.slope - params["expected"]) <= params.get("tolerance", 0.1)
    return summary


def _summarize_ratio(rows, params):
    last = rows[-1]
    expected = params.get("expected", last["expected"])
    relative_error = abs(last["ratio"] / expected - 1.0) if expected == expected else float("nan")
    changes = [row["change"] for row in rows[1:]]
    decreasing = all(b <= a for a, b in zip(changes, changes[1:]))
    return {
        "ratio": last["ratio"],
        "expected": expected,
        "relative_error": relative_error,
        "changes_decreasing": decreasing,
        "passed": bool(relative_error <= params.get("tolerance", 0.1) and decreasing),
    }


def _summarize_square(rows, params):
    z = _spread_z([row["ratio"] for row in rows], [row["stderr"] for row in rows])
    return {"spread_z": z, "passed": z <= 3.0}


def _summarize_quasi(rows, params):
    cs = [row["c"] for row in rows]
    z = _spread_z(cs, [row["c_stderr"] for row in rows])
    upper = all(row["upper_bound_holds"] for row in rows)
    return {"upper_bound_holds": upper, "c": cs, "c_spread_z": z, "passed": bool(upper and all(c > 0 for c in cs) and z <= 3.0)}


def _summarize_separation(rows, params):
    estimates = [Estimate.from_row(row) for row in rows]
    excludes_zero = all(e.mean - CONFIDENCE_Z * e.stderr > 0 for e in estimates)
    z = _spread_z([e.mean for e in estimates], [e.stderr for e in estimates])
    return {"excludes_zero": excludes_zero, "spread_z": z, "passed": bool(excludes_zero and z < 3.0)}


def _summarize_coupling(rows, params):
    scales = sorted((row for row in rows if row.get("variant", "conditions") == "conditions"), key=lambda row: row["ratio"])
    first, last = scales[0], scales[-1]
    gap = first["tv_excess"] - last["tv_excess"]
    separated = gap > CONFIDENCE_Z * math.hypot(first["tv_stderr"], last["tv_stderr"])
    summary = {"tv_first": first["tv"], "tv_last": last["tv"], "decay_separated": bool(separated)}
    if len(scales) >= 3:
        summary.update(coupling_decay(scales))
    switched = [row for row in rows if row.get("variant") == "color_switch"]
    matched = True
    if switched:
        row = switched[0]
        matched = row["tv_excess"] <= CONFIDENCE_Z * math.hypot(row["tv_stderr"], row["tv_null_stderr"])
        summary["color_switch_matched"] = bool(matched)
    summary["passed"] = bool(separated and matched)
    return summary


def _summarize_one_arm(rows, params):
    return {"tv": [row["tv"] for row in rows], "circuit_probability": [row["circuit_probability"] for row in rows]}


def _summarize_four_separated(rows, params):
    estimates = [Estimate.from_row(row) for row in rows]
    inside = all(
        e.mean - CONFIDENCE_Z * e.stderr > 0 and e.mean + CONFIDENCE_Z * e.stderr < 1 for e in estimates
    )
    return {"inside_unit_interval": inside, "passed": inside}


def _summarize_xy(rows, params):
    rows = sorted(rows, key=lambda row: -row["eps"])
    ratios = [row["l2_ratio"] for row in rows]
    decreasing = all(b < a for a, b in zip(ratios, ratios[1:]))
    return {"l2_ratios": ratios, "passed": bool(decreasing)}


def _summarize_beta(rows, params):
    estimate = Estimate.from_row(rows[0])
    return {"beta": estimate.mean, "stderr": estimate.stderr}


def _summarize_two_point(rows, params):
    distances = sorted({row["d"] for row in rows})
    middle = distances[len(distances) // 2]
    at_middle = [row for row in rows if row["d"] == middle]
    z = _spread_z([row["p"] for row in at_middle], [row["p_stderr"] for row in at_middle])
    normalized = [float(np.mean([row["normalized"] for row in rows if row["d"] == d])) for d in distances]
    variation = max(normalized) / min(normalized) - 1.0 if min(normalized) > 0 else float("inf")
    return {
        "angle_spread_z": z,
        "normalized": normalized,
        "normalized_variation": variation,
        "passed": bool(z <= 3.0 and variation < params.get("tolerance", 0.2)),
    }


def _summarize_scaling(rows, params):
    row = rows[0]
    return {"ratio": row["ratio"], "expected": row["expected"], "relative_error": row["relative_error"], "passed": bool(row["relative_error"] <= params.get("tolerance", 0.15))}


def _summarize_domination(rows, params):
    row = rows[0]
    return {"fraction": row["holds"] / row["n"], "passed": row["holds"] == row["n"]}


def _summarize_boundary(rows, params):
    points = [(row["delta"], Estimate.from_row(row)) for row in rows if row["mean"] > 0]
    if len(points) < 3:
        return {"slope": float("nan"), "passed": False}
    summary = fit_exponent(points).to_json()
    expected = params.get("expected", 13.0 / 12.0)
    summary["passed"] = abs(summary["slope"] - expected) <= params.get("tolerance", 0.25)
    return summary


def _summarize_mass(rows, params):
    return {"mean": [row["mean"] for row in rows]}


def _summarize_determinism(rows, params):
    return {"passed": all(bool(row["identical"]) for row in rows)}


SUMMARIES = {
    ExperimentKind.ORACLE: _summarize_oracle,
    ExperimentKind.DUALITY: _summarize_duality,
    ExperimentKind.CROSSING: _summarize_crossing,
    ExperimentKind.ALPHA: _summarize_alpha,
    ExperimentKind.RATIO: _summarize_ratio,
    ExperimentKind.SQUARE: _summarize_square,
    ExperimentKind.QUASI: _summarize_quasi,
    ExperimentKind.SEPARATION: _summarize_separation,
    ExperimentKind.COUPLING: _summarize_coupling,
    ExperimentKind.ONE_ARM: _summarize_one_arm,
    ExperimentKind.FOUR_SEPARATED: _summarize_four_separated,
    ExperimentKind.XY: _summarize_xy,
    ExperimentKind.BETA: _summarize_beta,
    ExperimentKind.TWO_POINT: _summarize_two_point,
    ExperimentKind.SCALING: _summarize_scaling,
    ExperimentKind.DOMINATION: _summarize_domination,
    ExperimentKind.BOUNDARY: _summarize_boundary,
    ExperimentKind.PIVOTAL: _summarize_mass,
    ExperimentKind.MEASURE: _summarize_mass,
    ExperimentKind.DETERMINISM: _summarize_determinism,
}


def summarize(kind, rows, params):
    """Summary of an Experiment's Rows; Computable from the Rows Alone"""
    if not rows:
        raise ValueError("cannot summarize an experiment without rows")
    return SUMMARIES[parse_kind(kind)](rows, dict(params or {}))
