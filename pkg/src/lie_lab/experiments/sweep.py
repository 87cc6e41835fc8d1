"""
LIE Lab sweep - Run one suite over the values of one configuration axis.

Runs are independent and may execute on a process pool; results are
collected in the order of the values, so the aggregated table does not
depend on the degree of concurrency.
"""

import csv
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from ..errors import ConfigError, LieLabError
from .config import RunConfig
from .report import ExperimentReport, provenance
from .suites import SUITES

logger = logging.getLogger("lie-lab.sweep")


@dataclass
class SweepResult:
    """Reports of a sweep, one per value, in value order."""

    suite: str
    axis: str
    values: list[Any] = field(default_factory=list)
    reports: list[ExperimentReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(report.passed for report in self.reports)

    def rows(self) -> list[dict[str, Any]]:
        """
        One flat row per value: pass state, every measured check, fitted slopes
        and the slowest observed convergence order per quantity.
        """
        rows = []
        for value, report in zip(self.values, self.reports):
            row: dict[str, Any] = {
                self.axis: value,
                "passed": report.passed,
                "checks": len(report.checks),
                "failed": len(report.failed_checks),
                "error": "; ".join(c.message for c in report.failed_checks if c.message),
            }
            for check in report.checks:
                row[check.name] = check.measured
            for name, slope in report.slopes.items():
                row[f"slope:{name}"] = slope["measured"]
            for name, orders in report.orders.items():
                if orders:
                    row[f"order:{name}"] = min(orders)
            rows.append(row)
        return rows

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "axis": self.axis,
            "values": list(self.values),
            "passed": self.passed,
            "reports": [report.to_dict() for report in self.reports],
        }


def _sweep_case(config: RunConfig, suite: str) -> ExperimentReport:
    report = SUITES[suite](config)
    report.trajectories.clear()
    return report


def _failed_value(suite: str, axis: str, value: Any, message: str) -> ExperimentReport:
    report = ExperimentReport(suite, config={"axis": axis, "value": value}, provenance=provenance())
    report.add_failure(f"{axis}={value}", "solver", message)
    return report


def sweep(
    template: RunConfig, axis: str, values: list[Any], suite: str, workers: int = 1
) -> SweepResult:
    """
    Run a suite once per value of an axis.

    Args:
        template: Base configuration
        axis: Config field, dotted path or alias (see RunConfig.with_override)
        values: Axis values; an empty list yields an empty result
        suite: Name of the suite in SUITES
        workers: Process pool size

    Returns:
        SweepResult with one report per value

    Raises:
        ConfigError: If the suite or the axis is unknown
    """
    if suite not in SUITES:
        raise ConfigError(f"unknown suite '{suite}', expected one of {sorted(SUITES)}")
    result = SweepResult(suite, axis, list(values))
    if not values:
        return result
    # Unknown axes fail up front; bad values only fail their own run.
    template.with_override(axis, values[0])

    configs: list[RunConfig | str] = []
    for value in values:
        try:
            config = template.with_override(axis, value)
            configs.append(replace(config, suite=replace(config.suite, workers=1)))
        except LieLabError as exc:
            configs.append(str(exc))

    logger.info(f"Sweeping {suite} over {axis} = {list(values)} on {workers} worker(s)")
    jobs = [(i, config) for i, config in enumerate(configs) if isinstance(config, RunConfig)]
    outcomes: dict[int, ExperimentReport | str] = {}
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {i: pool.submit(_sweep_case, config, suite) for i, config in jobs}
            for i, future in futures.items():
                try:
                    outcomes[i] = future.result()
                except LieLabError as exc:
                    outcomes[i] = str(exc)
    else:
        for i, config in jobs:
            try:
                outcomes[i] = _sweep_case(config, suite)
            except LieLabError as exc:
                outcomes[i] = str(exc)

    for i, value in enumerate(values):
        outcome = outcomes.get(i, configs[i])
        if not isinstance(outcome, ExperimentReport):
            outcome = _failed_value(suite, axis, value, str(outcome))
        result.reports.append(outcome)
        logger.info(f"{axis}={value}: {'passed' if outcome.passed else 'FAILED'}")
    return result


def write_sweep_csv(result: SweepResult, path: str | Path) -> Path:
    """
    Write the aggregated sweep table atomically.

    Columns are the axis, the pass state, then every metric name that
    appears in any row, sorted; missing entries stay empty.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = result.rows()
    leading = [result.axis, "passed", "checks", "failed", "error"]
    metrics = sorted({key for row in rows for key in row} - set(leading))
    fd, tmp_path = tempfile.mkstemp(prefix="sweep_", suffix=".tmp", dir=path.parent, text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=leading + metrics, restval="")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _cell(v) for k, v in row.items()})
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    return path


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    return value
