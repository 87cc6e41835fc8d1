"""
LIE Lab report - Bound checks and experiment reports.

Every check names the bound it was measured against through a stable
source tag (see constants.BOUND_SOURCES); reports collect checks, fitted
slopes, convergence orders and residual maxima together with provenance.
"""

import logging
import math
import platform
import sys
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
import scipy

from .. import __version__
from ..constants import BOUND_DOCS, BOUND_SOURCES
from ..numerics.solver import Trajectory

logger = logging.getLogger("lie-lab.report")


@dataclass
class BoundCheck:
    """One measured quantity compared with one bound."""

    name: str
    source: str
    measured: float
    bound: float
    relation: Literal["<=", ">="]
    passed: bool
    message: str = ""

    def __post_init__(self):
        if self.source not in BOUND_SOURCES:
            raise ValueError(f"unknown bound source '{self.source}'")

    @classmethod
    def upper(cls, name: str, source: str, measured: float, bound: float, message: str = ""):
        """measured <= bound; non-finite measurements fail."""
        passed = bool(math.isfinite(measured) and measured <= bound)
        return cls(name, source, float(measured), float(bound), "<=", passed, message)

    @classmethod
    def lower(cls, name: str, source: str, measured: float, bound: float, message: str = ""):
        """measured >= bound; non-finite measurements fail except +inf."""
        passed = bool(not math.isnan(measured) and measured >= bound)
        return cls(name, source, float(measured), float(bound), ">=", passed, message)

    @classmethod
    def failure(cls, name: str, source: str, message: str):
        return cls(name, source, float("nan"), float("nan"), "<=", False, message)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "source": self.source,
            "source_doc": BOUND_DOCS[self.source],
            "measured": _json_float(self.measured),
            "bound": _json_float(self.bound),
            "relation": self.relation,
            "passed": self.passed,
            "message": self.message,
        }


def _json_float(value: float) -> float | str | None:
    if math.isnan(value):
        return None
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(value)


def provenance(config_hash: str | None = None) -> dict[str, Any]:
    """Versions and platform of the current run."""
    return {
        "config_hash": config_hash,
        "lie_lab": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": sys.version.split()[0],
        "platform": platform.platform(),
    }


@dataclass
class ExperimentReport:
    """Outcome of one suite."""

    suite: str
    config: dict[str, Any] = field(default_factory=dict)
    checks: list[BoundCheck] = field(default_factory=list)
    slopes: dict[str, dict[str, float]] = field(default_factory=dict)
    orders: dict[str, list[float]] = field(default_factory=dict)
    residuals: dict[str, float] = field(default_factory=dict)
    metrics: dict[str, Any] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    provenance: dict[str, Any] = field(default_factory=dict)
    trajectories: dict[str, Trajectory] = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed_checks(self) -> list[BoundCheck]:
        return [check for check in self.checks if not check.passed]

    def add(self, check: BoundCheck) -> BoundCheck:
        self.checks.append(check)
        level = logging.DEBUG if check.passed else logging.WARNING
        logger.log(
            level,
            f"[{self.suite}] {check.name}: {check.measured:.6g} {check.relation} "
            f"{check.bound:.6g} ({'pass' if check.passed else 'FAIL'})",
        )
        return check

    def add_upper(self, name: str, source: str, measured: float, bound: float, message=""):
        return self.add(BoundCheck.upper(name, source, measured, bound, message))

    def add_lower(self, name: str, source: str, measured: float, bound: float, message=""):
        return self.add(BoundCheck.lower(name, source, measured, bound, message))

    def add_failure(self, name: str, source: str, message: str):
        logger.error(f"[{self.suite}] {name}: {message}")
        return self.add(BoundCheck.failure(name, source, message))

    def record_slope(self, name: str, measured: float, target: float):
        self.slopes[name] = {"measured": float(measured), "target": float(target)}

    def record_residual(self, name: str, value: float):
        self.residuals[name] = max(float(value), self.residuals.get(name, float("-inf")))

    def merge(self, other: "ExperimentReport", prefix: str | None = None):
        """Fold another report in, prefixing its names with its suite."""
        prefix = prefix or other.suite
        for check in other.checks:
            self.checks.append(
                BoundCheck(
                    f"{prefix}/{check.name}",
                    check.source,
                    check.measured,
                    check.bound,
                    check.relation,
                    check.passed,
                    check.message,
                )
            )
        self.slopes.update({f"{prefix}/{k}": v for k, v in other.slopes.items()})
        self.orders.update({f"{prefix}/{k}": v for k, v in other.orders.items()})
        self.residuals.update({f"{prefix}/{k}": v for k, v in other.residuals.items()})
        self.metrics[prefix] = other.metrics
        self.warnings.extend(f"{prefix}: {w}" for w in other.warnings)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "checks": [check.to_dict() for check in self.checks],
            "slopes": self.slopes,
            "orders": {k: [_json_float(v) for v in values] for k, values in self.orders.items()},
            "residuals": {k: _json_float(v) for k, v in self.residuals.items()},
            "metrics": to_jsonable(self.metrics),
            "warnings": list(self.warnings),
            "config": self.config,
            "provenance": self.provenance,
        }


def to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (float, np.floating)):
        return _json_float(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value
