"""
LIE Lab output - Files written for a run directory.

Layout of an output directory:

    report.json          every bound check with its source, slopes, orders
    summary.json         configuration, pass state, residuals, wall-clock time
    report.md            Markdown rendering of the report
    timeseries.csv       t and one column per observer channel of the main run
    snapshots/           one CSV per snapshot (s, x1, x2, x3) and index.csv
    plots/*.dat          gnuplot-ready columns per channel (PNG when matplotlib is present)
    runs/<name>/         the same trajectory files for every other run of a suite

Every file is written to a temporary file first and moved into place, so an
interrupted run never leaves a truncated file behind.
"""

import json
import logging
import os
import tempfile
from collections.abc import Callable
from pathlib import Path
from typing import IO, Any

import numpy as np

from ..numerics.solver import Trajectory
from .explain import explain_report
from .plots import PLOTTING_AVAILABLE, plot_trajectory
from .report import ExperimentReport, to_jsonable
from .sweep import SweepResult, write_sweep_csv

logger = logging.getLogger("lie-lab.output")

FLOAT_FORMAT = "%.17g"


def atomic_write(path: Path, write: Callable[[IO[str]], None]):
    """Write a text file through a temporary sibling and os.replace."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            write(handle)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def write_json(path: Path, data: Any):
    def dump(handle):
        json.dump(to_jsonable(data), handle, indent=2, sort_keys=False)
        handle.write("\n")

    atomic_write(path, dump)


def _write_table(path: Path, columns: list[str], table: np.ndarray, delimiter: str, comments: str):
    atomic_write(
        path,
        lambda handle: np.savetxt(
            handle,
            table,
            fmt=FLOAT_FORMAT,
            delimiter=delimiter,
            header=delimiter.join(columns),
            comments=comments,
        ),
    )


# =============================================================================
# Trajectories
# =============================================================================


def write_timeseries(trajectory: Trajectory, path: Path):
    """CSV with columns t, then the channels in observer order."""
    names = list(trajectory.channels)
    table = np.column_stack([trajectory.times, *(trajectory.channels[n] for n in names)])
    _write_table(path, ["t", *names], table, ",", "")


def write_snapshots(trajectory: Trajectory, directory: Path):
    """One CSV (s, x1, x2, x3) per snapshot plus index.csv mapping files to times."""
    directory.mkdir(parents=True, exist_ok=True)
    index = []
    for i, (t, curve) in enumerate(zip(trajectory.snapshot_times, trajectory.snapshots)):
        name = f"snapshot_{i:05d}.csv"
        table = np.column_stack([curve.grid.nodes, curve.points])
        _write_table(directory / name, ["s", "x1", "x2", "x3"], table, ",", "")
        index.append(f"{name},{t!r}")

    atomic_write(
        directory / "index.csv",
        lambda handle: handle.write("file,t\n" + "".join(line + "\n" for line in index)),
    )


def write_plot_data(trajectory: Trajectory, directory: Path) -> list[Path]:
    """Whitespace-separated ``t value`` files, one per channel."""
    written = []
    for name, values in trajectory.channels.items():
        path = directory / f"{name}.dat"
        _write_table(path, ["t", name], np.column_stack([trajectory.times, values]), " ", "# ")
        written.append(path)
    if trajectory.snapshots:
        final = trajectory.final
        path = directory / "final_curve.dat"
        table = np.column_stack([final.grid.nodes, final.points])
        _write_table(path, ["s", "x1", "x2", "x3"], table, " ", "# ")
        written.append(path)
    return written


def write_trajectory(trajectory: Trajectory, directory: Path, plots: bool = True):
    directory.mkdir(parents=True, exist_ok=True)
    write_timeseries(trajectory, directory / "timeseries.csv")
    write_snapshots(trajectory, directory / "snapshots")
    write_plot_data(trajectory, directory / "plots")
    if plots and PLOTTING_AVAILABLE:
        plot_trajectory(trajectory, directory / "plots")


# =============================================================================
# Reports
# =============================================================================


def summarize(report: ExperimentReport) -> dict[str, Any]:
    """The run summary: configuration, outcome, residual maxima and timings."""
    trajectories = report.trajectories.values()
    return {
        "suite": report.suite,
        "success": report.passed,
        "checks": len(report.checks),
        "failed_checks": [check.name for check in report.failed_checks],
        "errors": [check.message for check in report.failed_checks if check.message],
        "residuals": report.residuals,
        "metrics": report.metrics,
        "steps": sum(t.steps for t in trajectories),
        "wall_time": sum(t.wall_time for t in trajectories),
        "warnings": report.warnings,
        "config": report.config,
        "provenance": report.provenance,
    }


def write_report(report: ExperimentReport, directory: str | Path, plots: bool = True) -> Path:
    """
    Write every output file of a suite run.

    The trajectory named "main" (if any) fills the top of the directory;
    other trajectories go to runs/<name>/.

    Args:
        report: Finished report
        directory: Output directory, created if missing
        plots: Render PNG figures when matplotlib is available

    Returns:
        The output directory
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_json(directory / "report.json", report.to_dict())
    write_json(directory / "summary.json", summarize(report))
    markdown = explain_report(report)
    atomic_write(directory / "report.md", lambda handle: handle.write(markdown))

    for name, trajectory in report.trajectories.items():
        target = directory if name == "main" else directory / "runs" / _safe_name(name)
        write_trajectory(trajectory, target, plots)
    logger.info(f"Wrote {report.suite} results to {directory}")
    return directory


def write_sweep(result: SweepResult, directory: str | Path) -> Path:
    """sweep.csv, report.json and summary.json of a sweep."""
    directory = Path(directory)
    write_sweep_csv(result, directory / "sweep.csv")
    write_json(directory / "report.json", result.to_dict())
    write_json(
        directory / "summary.json",
        {
            "suite": result.suite,
            "axis": result.axis,
            "values": result.values,
            "success": result.passed,
            "failed_values": [v for v, r in zip(result.values, result.reports) if not r.passed],
        },
    )
    logger.info(f"Wrote sweep over {result.axis} to {directory}")
    return directory


def _safe_name(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)
