"""
LIE Lab explain - Markdown rendering of experiment reports.

This module turns an ExperimentReport into a readable document: the
outcome, every bound check grouped by the result it tests (with the
statement from constants.BOUND_DOCS), fitted slopes, convergence orders and
residual maxima.
"""

import math

from ..constants import BOUND_DOCS
from .report import BoundCheck, ExperimentReport


def explain_report(report: ExperimentReport) -> str:
    """
    Generate a Markdown explanation of a report.

    Args:
        report: Finished report

    Returns:
        Markdown text
    """
    status = "PASSED" if report.passed else "FAILED"
    parts = [f"# Suite `{report.suite}`: {status}\n"]
    if not report.checks:
        parts.append("\nNo bound checks were recorded.\n")
    else:
        failed = len(report.failed_checks)
        parts.append(f"\n{len(report.checks) - failed} of {len(report.checks)} checks passed.\n")

    by_source: dict[str, list[BoundCheck]] = {}
    for check in report.checks:
        by_source.setdefault(check.source, []).append(check)
    for source, checks in by_source.items():
        parts.append(f"\n## {source}\n\n{BOUND_DOCS[source]}\n\n")
        parts.append("| check | measured | relation | bound | result |\n")
        parts.append("|---|---|---|---|---|\n")
        for check in checks:
            result = "pass" if check.passed else "**FAIL**"
            parts.append(
                f"| `{check.name}` | {_number(check.measured)} | {check.relation} "
                f"| {_number(check.bound)} | {result} |\n"
            )
        notes = [c for c in checks if c.message]
        if notes:
            parts.append("\n")
            parts.extend(f"* `{c.name}`: {c.message}\n" for c in notes)

    if report.slopes:
        parts.append("\n## Fitted slopes\n\n| run | measured | target |\n|---|---|---|\n")
        for name, slope in report.slopes.items():
            parts.append(
                f"| `{name}` | {_number(slope['measured'])} | {_number(slope['target'])} |\n"
            )

    if report.orders:
        parts.append("\n## Observed convergence orders\n\n")
        for name, orders in report.orders.items():
            parts.append(f"* `{name}`: {', '.join(_number(v, 3) for v in orders)}\n")

    if report.residuals:
        parts.append("\n## Residual maxima\n\n")
        for name, value in report.residuals.items():
            parts.append(f"* `{name}`: {_number(value)}\n")

    if report.warnings:
        parts.append("\n## Warnings\n\n")
        parts.extend(f"* {warning}\n" for warning in report.warnings)

    provenance = report.provenance
    if provenance:
        parts.append("\n---\n\n")
        parts.append(
            ", ".join(f"{key} {value}" for key, value in provenance.items() if value) + "\n"
        )
    return "".join(parts)


def _number(value: float, digits: int = 6) -> str:
    if math.isnan(value):
        return "n/a"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{digits}g}"
