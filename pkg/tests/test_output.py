"""
Test suite for LIE Lab output files and sweeps.

Tests the run directory layout, the atomic writers and the sweep table.
"""

import csv
import json
import math

import numpy as np
import pytest

from lie_lab.errors import ConfigError
from lie_lab.experiments.config import RunConfig, SuiteConfig, preset
from lie_lab.experiments.output import (
    atomic_write,
    summarize,
    write_report,
    write_sweep,
    write_timeseries,
)
from lie_lab.experiments.report import ExperimentReport
from lie_lab.experiments.sweep import SweepResult, sweep, write_sweep_csv
from lie_lab.numerics.geometry import ArcParams, sample_exact_arc
from lie_lab.numerics.solver import Trajectory


@pytest.fixture
def trajectory():
    params = ArcParams(1.0, math.pi / 2)
    grid = params.grid(17)
    curves = [sample_exact_arc(params, t, grid) for t in (0.0, 0.1)]
    return Trajectory(
        times=np.array([0.0, 0.05, 0.1]),
        channels={"E": np.array([0.0, 1e-6, 2e-6]), "phi3": np.array([0.0, 0.5, 1.0])},
        snapshot_times=np.array([0.0, 0.1]),
        snapshots=curves,
        steps=10,
        dt=0.01,
        wall_time=0.2,
    )


@pytest.fixture
def report(trajectory):
    report = ExperimentReport("demo", config={"seed": 0})
    report.add_upper("ok", "poincare", 0.1, 1.0)
    report.record_slope("n=1", 4.0, 4.0)
    report.trajectories["main"] = trajectory
    report.trajectories["n=2 run"] = trajectory
    return report


class TestAtomicWrite:
    """Test atomic writes."""

    def test_writes(self, tmp_path):
        """Content lands at the target path."""
        path = tmp_path / "nested" / "a.txt"
        atomic_write(path, lambda handle: handle.write("hello"))
        assert path.read_text() == "hello"

    def test_failure_leaves_nothing(self, tmp_path):
        """A failing writer leaves no partial or temporary file."""
        path = tmp_path / "a.txt"

        def explode(handle):
            handle.write("partial")
            raise RuntimeError("interrupted")

        with pytest.raises(RuntimeError):
            atomic_write(path, explode)
        assert list(tmp_path.iterdir()) == []


class TestTrajectoryFiles:
    """Test per-trajectory files."""

    def test_timeseries_header(self, trajectory, tmp_path):
        """The CSV starts with t and the channels in order."""
        path = tmp_path / "timeseries.csv"
        write_timeseries(trajectory, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,E,phi3"
        assert len(lines) == 4
        assert float(lines[-1].split(",")[2]) == 1.0

    def test_report_directory(self, report, tmp_path):
        """The run directory has every file of the layout."""
        out = write_report(report, tmp_path / "run", plots=False)
        for name in ("report.json", "summary.json", "report.md", "timeseries.csv"):
            assert (out / name).is_file()
        assert (out / "snapshots" / "snapshot_00001.csv").is_file()
        assert (out / "snapshots" / "index.csv").read_text().startswith("file,t\n")
        assert (out / "plots" / "E.dat").read_text().startswith("# t E")
        assert (out / "plots" / "final_curve.dat").is_file()
        assert (out / "runs" / "n_2_run" / "timeseries.csv").is_file()

    def test_report_json(self, report, tmp_path):
        """report.json holds the checks with their sources."""
        out = write_report(report, tmp_path, plots=False)
        data = json.loads((out / "report.json").read_text())
        assert data["passed"] is True
        assert data["checks"][0]["source"] == "poincare"

    def test_summary(self, report):
        """Summaries sum steps and wall time over runs."""
        summary = summarize(report)
        assert summary["success"] is True
        assert summary["steps"] == 20
        assert summary["wall_time"] == pytest.approx(0.4)

    def test_png_plots(self, report, tmp_path):
        """Figures are rendered when matplotlib is installed."""
        pytest.importorskip("matplotlib")
        out = write_report(report, tmp_path, plots=True)
        assert list((out / "plots").glob("*.png"))


def tiny_poincare() -> RunConfig:
    config = preset("poincare")
    return config.with_override("suite.ladder", (64, 128))


class TestSweep:
    """Test sweeps over one axis."""

    def test_values_in_order(self):
        """One report per value, in value order."""
        result = sweep(tiny_poincare(), "radius", [1.0, 2.0], "poincare")
        assert result.values == [1.0, 2.0]
        assert len(result.reports) == 2
        assert result.passed
        targets = [r.metrics["target"] for r in result.reports]
        assert targets[1] == pytest.approx(2 * targets[0])

    def test_empty_values(self):
        """No values, no runs."""
        result = sweep(RunConfig(), "N", [], "poincare")
        assert result.reports == []
        assert result.passed

    def test_unknown_suite(self):
        """Unknown suites raise ConfigError."""
        with pytest.raises(ConfigError):
            sweep(RunConfig(), "N", [64], "nope")

    def test_unknown_axis(self):
        """Unknown axes raise ConfigError before any run."""
        with pytest.raises(ConfigError):
            sweep(RunConfig(), "bogus", [1], "poincare")

    def test_bad_value_fails_its_run(self):
        """An invalid value becomes a failed report, the others still run."""
        result = sweep(tiny_poincare(), "radius", [1.0, "wide"], "poincare")
        assert result.reports[0].passed
        assert not result.reports[1].passed
        assert result.reports[1].checks[0].source == "solver"

    def test_csv(self, tmp_path):
        """The table has one row per value and the fixed leading columns."""
        result = sweep(tiny_poincare(), "radius", [1.0, 2.0], "poincare")
        path = write_sweep_csv(result, tmp_path / "sweep.csv")
        with path.open() as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 2
        assert list(rows[0])[:5] == ["radius", "passed", "checks", "failed", "error"]
        assert rows[0]["passed"] == "True"
        assert any(key.startswith("order:") for key in rows[0])

    def test_missing_cells_stay_empty(self, tmp_path):
        """Metrics missing from a row are written as empty cells."""
        first = ExperimentReport("demo")
        first.add_upper("only_first", "poincare", 0.5, 1.0)
        result = SweepResult("demo", "N", [1, 2], [first, ExperimentReport("demo")])
        path = write_sweep_csv(result, tmp_path / "sweep.csv")
        with path.open() as handle:
            rows = list(csv.DictReader(handle))
        assert rows[0]["only_first"] == "0.5"
        assert rows[1]["only_first"] == ""

    def test_write_sweep(self, tmp_path):
        """Sweep directories carry the table and both JSON files."""
        result = sweep(tiny_poincare(), "N", [64], "poincare")
        out = write_sweep(result, tmp_path)
        summary = json.loads((out / "summary.json").read_text())
        assert summary["axis"] == "N"
        assert summary["failed_values"] == []
        assert (out / "sweep.csv").is_file()
        assert (out / "report.json").is_file()

    def test_workers_forced_to_one(self):
        """Sweep points never nest process pools."""
        template = RunConfig(suite=SuiteConfig(ladder=(64, 128), workers=4))
        result = sweep(template, "N", [64], "poincare")
        assert result.reports[0].config["suite"]["workers"] == 1
