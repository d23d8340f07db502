"""hexperc_runner.py

Runs Percolation Experiments from the Command Line

"""

import argparse
import logging
import sys
from pathlib import Path

import yaml

from hexperc import config_loader
from hexperc.errors import BudgetExhaustedError, GeometryError, SpecValidationError
from hexperc.lattice.geometry import Box, box_sites
from hexperc.runner.artifacts import write_json
from hexperc.runner.suite import report, run_spec
from hexperc.sampling.configuration import dump_configuration, sample

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_ACCEPTANCE = 4

EXPERIMENT_COMMANDS = ("alpha", "pivotal", "measure", "xy", "ratio", "twopoint", "separation", "coupling")
DEFAULT_SUITE = Path(__file__).resolve().parent.parent / "config" / "suite.yaml"

logger = logging.getLogger("hexperc_runner")


def parse_param(text):
    """KEY=VALUE with a YAML-Parsed Value"""
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key, yaml.safe_load(value)


def build_parser():
    parser = argparse.ArgumentParser(description="Runs Critical Percolation Experiments")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Run Seed, Overriding the Spec Seed")
    common.add_argument("--workers", type=int, default=None, help="Worker Processes, Overriding the Spec WORKERS")
    common.add_argument("--out", type=str, default="artifacts", help="Artifact Directory")
    common.add_argument("--spec", type=str, default=None, help="YAML Experiment Spec")
    common.add_argument("--log-level", type=str, default="INFO", help="Logging Level")

    commands = parser.add_subparsers(dest="command", required=True)
    sampler = commands.add_parser("sample", parents=[common], help="Dump Sampled Configurations")
    sampler.add_argument("--radius", type=float, default=1.0, help="Box Radius")
    sampler.add_argument("--mesh", type=float, default=1.0 / 16.0, help="Lattice Mesh")
    sampler.add_argument("--count", type=int, default=1, help="Number of Configurations")
    for name in EXPERIMENT_COMMANDS:
        command = commands.add_parser(name, parents=[common], help=f"Run a {name} Experiment")
        command.add_argument(
            "--param", type=parse_param, action="append", default=[], help="Experiment Parameter KEY=VALUE"
        )
    commands.add_parser("suite", parents=[common], help="Run the Acceptance Suite")
    reporter = commands.add_parser("report", parents=[common], help="Merge Artifact Directories")
    reporter.add_argument("directories", nargs="*", help="Artifact Directories")
    return parser


def load_spec(args, kind=None):
    if args.spec:
        return config_loader.load_experiment_spec(args.spec)
    if kind is None:
        return config_loader.load_experiment_spec(DEFAULT_SUITE)
    spec = {
        "NAME": kind,
        "SEED": args.seed or 0,
        "EXPERIMENTS": [{"name": kind, "kind": kind, "params": dict(args.param)}],
    }
    return config_loader.build_experiment_spec(spec, f"<{kind} --param>")


def run_command(args):
    if args.command == "sample":
        region = box_sites(Box((0.0, 0.0), args.radius), args.mesh)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for index in range(args.count):
            dump_configuration(sample(region, args.seed or 0, index), out / f"sample_{index}.rle")
        logger.info("wrote %d configurations of %d sites to %s", args.count, len(region), out)
        return EXIT_OK
    elif args.command == "report":
        summary = report(args.directories)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "report.json", summary)
        for number, criterion in summary["criteria"].items():
            logger.info("criterion %s (%s): %s", number, criterion["description"], criterion["status"])
        return EXIT_OK
    spec = load_spec(args, None if args.command == "suite" else args.command)
    workers = args.workers or spec.get("WORKERS", 1)
    outcome = run_spec(spec, args.out, workers, args.seed, evaluate=args.command == "suite")
    if outcome.exhausted:
        logger.error("rejection budget exhausted for: %s", ", ".join(outcome.exhausted))
        return EXIT_BUDGET
    if outcome.failed:
        logger.error("acceptance criteria failed: %s", outcome.failed)
        return EXIT_ACCEPTANCE
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper(), logging.INFO),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return run_command(args)
    except (SpecValidationError, GeometryError, ValueError, TypeError) as err:
        logger.error("%s", err)
        return EXIT_VALIDATION
    except BudgetExhaustedError as err:
        logger.error("%s", err)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
