"""
Experiment harness of the LIE lab.

This package contains the modules that configure runs, execute the
verification suites and write their results:
- config: RunConfig, TOML loading, overrides and presets
- report: BoundCheck and ExperimentReport
- suites: Accuracy, conservation, stability, optimality, symmetry, Poincare and ring suites
- sweep: One suite over the values of one configuration axis
- output: Output directory layout and atomic file writers
- plots: Optional matplotlib figures
- explain: Markdown rendering of reports
"""

from .config import (
    PRESETS,
    RunConfig,
    SuiteConfig,
    config_from_dict,
    list_preset_names,
    load_config,
    preset,
)
from .explain import explain_report
from .output import write_report, write_sweep
from .plots import PLOTTING_AVAILABLE
from .report import BoundCheck, ExperimentReport
from .suites import (
    SUITES,
    convergence_orders,
    fit_slope,
    run_arc_accuracy,
    run_conservation,
    run_optimality,
    run_poincare,
    run_ring,
    run_simulation,
    run_stability,
    run_symmetry,
    run_verify,
)
from .sweep import SweepResult, sweep

__all__ = [
    # Configuration
    "RunConfig",
    "SuiteConfig",
    "PRESETS",
    "preset",
    "list_preset_names",
    "load_config",
    "config_from_dict",
    # Reports
    "BoundCheck",
    "ExperimentReport",
    "explain_report",
    # Suites
    "SUITES",
    "fit_slope",
    "convergence_orders",
    "run_simulation",
    "run_arc_accuracy",
    "run_conservation",
    "run_stability",
    "run_optimality",
    "run_symmetry",
    "run_poincare",
    "run_ring",
    "run_verify",
    # Sweeps and output
    "SweepResult",
    "sweep",
    "write_report",
    "write_sweep",
    "PLOTTING_AVAILABLE",
]
