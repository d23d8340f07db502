"""suite.py

Runs Experiment Specs into Artifact Directories, Evaluates Acceptance Criteria, and
Merges Artifact Directories into a Consolidated Report

"""
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .. import __version__
from ..errors import BudgetExhaustedError
from ..stats.estimates import Estimate
from .artifacts import (
    ACCEPTANCE_NAME,
    MANIFEST_NAME,
    emit_plot_script,
    load_artifacts,
    write_json,
    write_table,
)
from .experiments import PLOT_AXES, parse_kind, run_rows, summarize

logger = logging.getLogger(__name__)

CRITERIA = {
    1: "oracle equivalence of fast-path predicates",
    2: "open/closed crossing duality",
    3: "symmetric-quad crossing probability 1/2",
    4: "four-arm exponent",
    5: "one-arm exponent",
    6: "ratio limit",
    7: "quasi-multiplicativity",
    8: "separation of interface ends",
    9: "coupling decay and colour switching",
    10: "X against beta Y",
    11: "two-point isotropy",
    12: "scaling covariance",
    13: "filtering dominations",
    14: "interface boundary decay",
    15: "determinism across worker counts",
}
NOT_RUN = "not run"


@dataclass
class RunOutcome:
    """What a Spec Run Produced"""

    directory: Path
    summaries: dict
    criteria: dict = field(default_factory=dict)
    exhausted: list = field(default_factory=list)

    @property
    def failed(self):
        return [number for number, status in self.criteria.items() if status == "fail"]


def experiment_seed(spec, index, experiment):
    """Seed of an Experiment: Its Own, or the Spec Seed Offset by Its Position"""
    return int(experiment.get("seed", spec.get("SEED", 0) + index))


def evaluate_criteria(experiments, summaries):
    """pass / fail / not run for Every Acceptance Criterion

    A criterion shared by several experiments passes only if all of them pass.
    """
    status = {number: NOT_RUN for number in CRITERIA}
    for experiment in experiments:
        number = experiment.get("criterion")
        if number is None or experiment["name"] not in summaries:
            continue
        passed = bool(summaries[experiment["name"]].get("passed", False))
        if status[number] == NOT_RUN:
            status[number] = "pass" if passed else "fail"
        elif not passed:
            status[number] = "fail"
    return status


def run_spec(spec, out_dir, workers=1, seed=None, evaluate=False):
    """Runs Every Experiment of a Loaded Spec into an Artifact Directory

    Parameters
    ----------
    spec : dict
        Validated Spec, as Returned by load_experiment_spec
    out_dir : str or Path
        Artifact Directory, Created if Missing
    workers : int
        Worker Processes; Never Written to the Artifacts
    seed : int, optional
        Overrides the Spec Seed
    evaluate : bool
        Also Write acceptance.json

    Returns
    -------
    RunOutcome
        Experiments Whose Rejection Budget Ran Out Are Listed in exhausted and
        Flagged in the Manifest
    """
    spec = dict(spec)
    if seed is not None:
        spec["SEED"] = seed
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    entries, summaries, exhausted = [], {}, []
    for index, experiment in enumerate(spec["EXPERIMENTS"]):
        kind = parse_kind(experiment["kind"])
        params = experiment.get("params") or {}
        run_seed = experiment_seed(spec, index, experiment)
        entry = {
            "name": experiment["name"],
            "kind": kind.value,
            "params": params,
            "seed": run_seed,
            "criterion": experiment.get("criterion"),
        }
        try:
            rows = run_rows(kind, params, run_seed, workers)
        except BudgetExhaustedError as err:
            logger.error("experiment %s: %s", experiment["name"], err)
            entry.update(status="budget_exhausted", attempts=err.attempts, accepted=err.accepted)
            entries.append(entry)
            exhausted.append(experiment["name"])
            continue
        summary = summarize(kind, rows, params)
        entry.update(status="ok", rows=len(rows), table_sha256=write_table(directory / f"{experiment['name']}.csv", rows))
        write_json(directory / f"{experiment['name']}.json", summary)
        if kind in PLOT_AXES:
            emit_plot_script(directory, experiment["name"], PLOT_AXES[kind])
        summaries[experiment["name"]] = summary
        entries.append(entry)
        logger.info("experiment %s done: %d rows", experiment["name"], len(rows))
    manifest = {
        "name": spec.get("NAME", "hexperc"),
        "seed": spec.get("SEED", 0),
        "spec_hash": spec.get("SPEC_HASH"),
        "version": __version__,
        "experiments": entries,
    }
    write_json(directory / MANIFEST_NAME, manifest)
    outcome = RunOutcome(directory, summaries, exhausted=exhausted)
    if evaluate:
        outcome.criteria = evaluate_criteria(spec["EXPERIMENTS"], summaries)
        for name in exhausted:
            number = next((e.get("criterion") for e in spec["EXPERIMENTS"] if e["name"] == name), None)
            if number is not None:
                outcome.criteria[number] = "fail"
        write_json(directory / ACCEPTANCE_NAME, {str(k): v for k, v in outcome.criteria.items()})
    return outcome


# ---------------------------------------------------------------------------
# report


def _mergeable(row):
    return all(row.get(key) is not None for key in ("total", "total_sq", "n", "seed"))


def merge_rows(first, second):
    """Pools Two Rows of the Same Estimate, Recomputing Mean and Standard Error"""
    merged = Estimate.from_row(first).merge(Estimate.from_row(second))
    row = dict(first)
    row.update(total=merged.total, total_sq=merged.total_sq, n=merged.n, stderr=merged.stderr)
    row["value" if "value" in row else "mean"] = merged.mean
    return row


def merge_tables(tables):
    """Row-Wise Pooling of Equally Shaped Tables; Unmergeable Tables Keep the First"""
    merged = tables[0]
    for table in tables[1:]:
        if len(table) != len(merged) or not all(_mergeable(a) and _mergeable(b) for a, b in zip(merged, table)):
            logger.warning("tables cannot be pooled; keeping the first")
            return merged
        merged = [merge_rows(a, b) for a, b in zip(merged, table)]
    return merged


def report(directories):
    """Consolidated Summary of One or More Artifact Directories

    Experiments are matched by name; their tables are pooled through the estimate
    reducers, and summaries and criteria are recomputed from the pooled rows.

    Raises
    ------
    ValueError
        If No Directory Is Given
    """
    directories = [Path(d) for d in directories]
    if not directories:
        raise ValueError("report needs at least one artifact directory")
    loaded = [load_artifacts(directory) for directory in directories]
    experiments, tables = {}, {}
    for manifest, dir_tables in loaded:
        for experiment in manifest["experiments"]:
            if experiment["name"] in dir_tables:
                experiments.setdefault(experiment["name"], experiment)
                tables.setdefault(experiment["name"], []).append(dir_tables[experiment["name"]])
    summaries = {}
    pooled = {}
    for name, experiment in experiments.items():
        pooled[name] = merge_tables(tables[name])
        summaries[name] = summarize(experiment["kind"], pooled[name], experiment["params"])
    criteria = evaluate_criteria(list(experiments.values()), summaries)
    return {
        "directories": [str(d) for d in directories],
        "experiments": {name: {"rows": pooled[name], "summary": summaries[name]} for name in experiments},
        "criteria": {str(number): {"description": CRITERIA[number], "status": status} for number, status in criteria.items()},
    }
