"""
Numerical laboratory for the localized induction equation.

This package simulates arc-shaped vortex filaments with fixed end tangents
and closed rings under x_t = x_s × x_ss, checks the conserved energies and
the explicit stability estimates of the translating circular arc, and
reproduces the looped perturbations that grow at the optimal linear rate.

Example:
    Check the stability estimates on the default corpus:

    >>> from lie_lab import preset, run_stability
    >>> report = run_stability(preset("stability"))
    >>> report.passed

    Or from command line:

    $ lie-lab stability --out runs/stability
"""

__version__ = "0.1.0"
__author__ = "Bissbert"

from .errors import (
    AdmissibilityError,
    BlowUpError,
    ConfigError,
    ConstantsUnavailableError,
    DegenerateInputError,
    GridError,
    InitialConditionError,
    LieLabError,
    ReflectivityError,
)
from .experiments import (
    ExperimentReport,
    RunConfig,
    load_config,
    preset,
    run_arc_accuracy,
    run_optimality,
    run_ring,
    run_stability,
    run_verify,
    sweep,
)
from .numerics import (
    ArcParams,
    Curve,
    Grid,
    PerturbationSpec,
    SolverConfig,
    VectorField,
    build_perturbation,
    sample_exact_arc,
    simulate,
    stability_constants,
)

__all__ = [
    "__version__",
    # Errors
    "LieLabError",
    "GridError",
    "DegenerateInputError",
    "AdmissibilityError",
    "ConstantsUnavailableError",
    "InitialConditionError",
    "BlowUpError",
    "ReflectivityError",
    "ConfigError",
    # Numerics
    "Grid",
    "Curve",
    "VectorField",
    "ArcParams",
    "SolverConfig",
    "PerturbationSpec",
    "sample_exact_arc",
    "build_perturbation",
    "simulate",
    "stability_constants",
    # Experiments
    "RunConfig",
    "ExperimentReport",
    "load_config",
    "preset",
    "run_arc_accuracy",
    "run_stability",
    "run_optimality",
    "run_ring",
    "run_verify",
    "sweep",
]
