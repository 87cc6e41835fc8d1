"""
LIE Lab command line entry point.

Allows running the lab with: python -m lie_lab (or the ``lie-lab`` script).

Exit codes: 0 when every bound check passes, 1 when a check fails, 2 on
invalid input (configuration, grids, perturbations).
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any

from .errors import LieLabError
from .experiments.config import RunConfig, list_preset_names, load_config, preset
from .experiments.output import write_report, write_sweep
from .experiments.report import ExperimentReport
from .experiments.suites import (
    SUITES,
    run_optimality,
    run_ring,
    run_simulation,
    run_stability,
    run_verify,
)
from .experiments.sweep import sweep

logger = logging.getLogger("lie-lab")

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_ERROR = 2

# Subcommand -> (suite runner, preset used without --config).
COMMANDS: dict[str, tuple[Any, str | None]] = {
    "simulate": (run_simulation, None),
    "stability": (run_stability, "stability"),
    "optimality": (run_optimality, "optimality"),
    "ring": (run_ring, "ring"),
}


def _add_run_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="TOML run configuration")
    parser.add_argument("--preset", choices=list_preset_names(), help="Start from a named preset")
    parser.add_argument("--out", help="Output directory (default: lie-lab-<command>)")
    parser.add_argument("--nodes", type=int, help="Number of grid nodes")
    parser.add_argument("--tfinal", type=float, help="Final time")
    parser.add_argument("--seed", type=int, help="Seed; corpus suites run this seed only")
    parser.add_argument("--workers", type=int, help="Process pool size")
    parser.add_argument("--no-plots", action="store_true", help="Skip PNG figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lie-lab", description="Localized induction equation laboratory"
    )
    parser.add_argument("--log-file", default=None, help="Log file path (default: stderr)")
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    descriptions = {
        "simulate": "Simulate one configured run",
        "stability": "Check the explicit stability bounds on a perturbation corpus",
        "optimality": "Measure growth rates of looped perturbations",
        "ring": "Segmentation, bounds and growth rates on closed rings",
    }
    for name, description in descriptions.items():
        _add_run_flags(commands.add_parser(name, help=description, description=description))

    sweep_parser = commands.add_parser("sweep", help="Run one suite over values of one axis")
    _add_run_flags(sweep_parser)
    sweep_parser.add_argument("--suite", required=True, choices=sorted(SUITES))
    sweep_parser.add_argument("--axis", required=True, help="Config field, dotted path or alias")
    sweep_parser.add_argument("--values", default="", help="Comma-separated axis values")

    verify_parser = commands.add_parser("verify", help="Run every acceptance suite")
    verify_parser.add_argument("--out", help="Output directory (default: lie-lab-verify)")
    verify_parser.add_argument("--seed", type=int, help="Base seed of every preset")
    verify_parser.add_argument("--workers", type=int, default=1, help="Process pool size")
    verify_parser.add_argument("--no-plots", action="store_true", help="Skip PNG figures")
    return parser


def parse_value(text: str) -> Any:
    """Axis value from the command line: int, then float, else string."""
    text = text.strip()
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def resolve_config(args: argparse.Namespace, default_preset: str | None) -> RunConfig:
    """Base configuration from --config or a preset, then flag overrides."""
    if args.config:
        config = load_config(args.config)
    elif args.preset or default_preset:
        config = preset(args.preset or default_preset)
    else:
        config = RunConfig()

    if args.nodes is not None:
        config = config.with_override("n_nodes", args.nodes)
    if args.tfinal is not None:
        config = config.with_override("solver.t_final", args.tfinal)
    if args.seed is not None:
        perturbation = config.perturbation
        if perturbation.seed is not None:
            perturbation = replace(perturbation, seed=args.seed)
        config = replace(
            config,
            seed=args.seed,
            perturbation=perturbation,
            suite=replace(config.suite, seeds=(args.seed,)),
        )
    if args.workers is not None:
        config = config.with_override("suite.workers", args.workers)
    if args.out:
        config = replace(config, output=args.out)
    return config


def _finish(report: ExperimentReport) -> int:
    for check in report.failed_checks:
        print(f"FAIL {check.name} [{check.source}]: {check.message or check.measured}")
    status = "passed" if report.passed else "FAILED"
    print(f"{report.suite}: {len(report.checks)} checks, {status}")
    return EXIT_OK if report.passed else EXIT_FAILED_CHECK


def run(args: argparse.Namespace) -> int:
    plots = not args.no_plots
    if args.command == "verify":
        report = run_verify(seed=args.seed, workers=args.workers)
        write_report(report, Path(args.out or "lie-lab-verify"), plots)
        return _finish(report)

    if args.command == "sweep":
        template = resolve_config(args, None)
        values = [parse_value(v) for v in args.values.split(",") if v.strip()]
        result = sweep(template, args.axis, values, args.suite, template.suite.workers)
        write_sweep(result, Path(template.output or "lie-lab-sweep"))
        for value, report in zip(result.values, result.reports):
            print(f"{args.axis}={value}: {'passed' if report.passed else 'FAILED'}")
        return EXIT_OK if result.passed else EXIT_FAILED_CHECK

    runner, default_preset = COMMANDS[args.command]
    config = resolve_config(args, default_preset)
    report = runner(config)
    write_report(report, Path(config.output or f"lie-lab-{args.command}"), plots)
    return _finish(report)


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the LIE lab."""
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        filename=args.log_file,
        level=getattr(logging, args.log_level),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    try:
        return run(args)
    except LieLabError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
