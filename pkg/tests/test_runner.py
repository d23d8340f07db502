import argparse
import importlib.util
from pathlib import Path

import pytest
import yaml

from hexperc.config_loader import build_experiment_spec, load_experiment_spec
from hexperc.errors import SpecValidationError
from hexperc.runner.artifacts import MANIFEST_NAME, read_json, read_table
from hexperc.runner.experiments import ExperimentKind, parse_kind, summarize
from hexperc.runner.sharding import map_indices
from hexperc.runner.suite import evaluate_criteria, report, run_spec
from hexperc.sampling.configuration import load_configuration

ROOT = Path(__file__).resolve().parent.parent


def alpha_spec(n=20):
    return {
        "NAME": "small",
        "SEED": 3,
        "EXPERIMENTS": [{"name": "one_arm", "kind": "alpha", "params": {"pattern": "O", "meshes": [0.5], "n": n}}],
    }


def crossing_spec(n, start):
    params = {"box": {"radius": 2.0}, "mesh": 1.0, "n": n, "start": start}
    return {"NAME": "crossing", "SEED": 5, "EXPERIMENTS": [{"name": "crossing", "kind": "crossing", "params": params}]}


def write_spec(path, spec):
    with open(path, "w") as file:
        yaml.safe_dump(spec, file)
    return path


def load_runner():
    spec = importlib.util.spec_from_file_location("hexperc_runner", ROOT / "bin" / "hexperc_runner.py")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


@pytest.mark.parametrize("name", ["minimal.yaml", "experiments.yaml", "suite.yaml"])
def test_repo_specs_validate(name):
    spec = load_experiment_spec(ROOT / "config" / name)
    assert spec["EXPERIMENTS"]
    assert len(spec["SPEC_HASH"]) == 64


def test_spec_errors(tmp_path):
    with pytest.raises(SpecValidationError, match="not found"):
        load_experiment_spec(tmp_path / "missing.yaml")
    bad_kind = alpha_spec()
    bad_kind["EXPERIMENTS"][0]["kind"] = "bogus"
    with pytest.raises(SpecValidationError):
        load_experiment_spec(write_spec(tmp_path / "bad_kind.yaml", bad_kind))
    duplicate = alpha_spec()
    duplicate["EXPERIMENTS"].append(dict(duplicate["EXPERIMENTS"][0]))
    with pytest.raises(SpecValidationError, match="unique"):
        load_experiment_spec(write_spec(tmp_path / "duplicate.yaml", duplicate))


def test_parse_kind():
    assert parse_kind("twopoint") is ExperimentKind.TWO_POINT
    assert parse_kind(ExperimentKind.ALPHA) is ExperimentKind.ALPHA
    with pytest.raises(SpecValidationError):
        parse_kind("nonsense")


def test_summarize_needs_rows():
    with pytest.raises(ValueError):
        summarize("alpha", [], {})


def test_map_indices_keeps_order():
    assert map_indices(abs, range(-5, 5), workers=2) == [abs(i) for i in range(-5, 5)]


def test_run_spec_writes_artifacts(tmp_path):
    outcome = run_spec(alpha_spec(), tmp_path)
    manifest = read_json(tmp_path / MANIFEST_NAME)
    assert manifest["seed"] == 3
    entry = manifest["experiments"][0]
    assert entry["status"] == "ok"
    assert entry["rows"] == 1
    assert len(read_table(tmp_path / "one_arm.csv")) == 1
    assert (tmp_path / "plots" / "one_arm.py").exists()
    assert outcome.exhausted == []
    assert outcome.failed == []


def test_run_spec_is_reproducible(tmp_path):
    first = run_spec(alpha_spec(), tmp_path / "first")
    second = run_spec(alpha_spec(), tmp_path / "second", workers=2)
    hashes = [read_json(outcome.directory / MANIFEST_NAME)["experiments"][0]["table_sha256"] for outcome in (first, second)]
    assert hashes[0] == hashes[1]


def test_seed_override(tmp_path):
    run_spec(alpha_spec(), tmp_path, seed=11)
    manifest = read_json(tmp_path / MANIFEST_NAME)
    assert manifest["seed"] == 11
    assert manifest["experiments"][0]["seed"] == 11


def test_criteria_default_to_not_run():
    status = evaluate_criteria([{"name": "a", "criterion": 3}], {"a": {"passed": True}})
    assert status[3] == "pass"
    assert status[4] == "not run"
    assert len(status) == 15


def test_report_needs_directories():
    with pytest.raises(ValueError):
        report([])


def test_report_of_one_directory(tmp_path):
    run_spec(alpha_spec(), tmp_path)
    summary = report([tmp_path])
    rows = summary["experiments"]["one_arm"]["rows"]
    assert rows == read_table(tmp_path / "one_arm.csv")
    assert set(summary["criteria"]) == {str(number) for number in range(1, 16)}


def test_shards_pool_into_one_run(tmp_path):
    run_spec(crossing_spec(30, 0), tmp_path / "a")
    run_spec(crossing_spec(30, 30), tmp_path / "b")
    run_spec(crossing_spec(60, 0), tmp_path / "whole")
    pooled = report([tmp_path / "a", tmp_path / "b"])["experiments"]["crossing"]["rows"][0]
    whole = read_table(tmp_path / "whole" / "crossing.csv")[0]
    for key in ("total", "total_sq", "n"):
        assert pooled[key] == whole[key]


def test_cli_report_without_directories():
    assert load_runner().main(["report"]) == 2


def test_cli_alpha(tmp_path):
    runner = load_runner()
    argv = ["alpha", "--out", str(tmp_path), "--param", "pattern=O", "--param", "meshes=[0.5]", "--param", "n=20"]
    assert runner.main(argv) == 0
    assert (tmp_path / "alpha.csv").exists()


def test_cli_sample(tmp_path):
    runner = load_runner()
    argv = ["sample", "--out", str(tmp_path), "--radius", "2", "--mesh", "0.5", "--count", "2", "--seed", "4"]
    assert runner.main(argv) == 0
    configs = [load_configuration(tmp_path / f"sample_{i}.rle") for i in range(2)]
    assert configs[0].region == configs[1].region
    assert [config.sample_index for config in configs] == [0, 1]


def test_cli_bad_spec(tmp_path):
    assert load_runner().main(["suite", "--spec", str(tmp_path / "missing.yaml")]) == 2


def test_in_memory_specs_use_the_schema():
    original = alpha_spec()
    spec = build_experiment_spec(original)
    assert len(spec["SPEC_HASH"]) == 64
    assert "SPEC_HASH" not in original
    assert spec["SPEC_HASH"] == build_experiment_spec(alpha_spec())["SPEC_HASH"]
    assert spec["SPEC_HASH"] != build_experiment_spec(alpha_spec(n=21))["SPEC_HASH"]
    bad_name = alpha_spec()
    bad_name["NAME"] = 7
    bad_kind = alpha_spec()
    bad_kind["EXPERIMENTS"][0]["kind"] = "bogus"
    bad_count = alpha_spec()
    bad_count["EXPERIMENTS"][0]["params"]["n"] = "abc"
    for spec in (bad_name, bad_kind, bad_count):
        with pytest.raises(SpecValidationError, match="did not validate"):
            build_experiment_spec(spec)


@pytest.mark.parametrize("param", ["n=abc", "pattern=XYZ", "meshes=fine"])
def test_cli_bad_param(tmp_path, param):
    argv = ["alpha", "--out", str(tmp_path), "--param", param]
    assert load_runner().main(argv) == 2
    assert not (tmp_path / "alpha.csv").exists()


def test_parse_param():
    runner = load_runner()
    assert runner.parse_param("meshes=[0.5, 0.25]") == ("meshes", [0.5, 0.25])
    assert runner.parse_param("pattern=OCOC") == ("pattern", "OCOC")
    with pytest.raises(argparse.ArgumentTypeError):
        runner.parse_param("novalue")
