"""
Numerical core of the LIE lab.

This package contains the modules that discretize and analyse the
localized induction equation:
- geometry: Grids, curves, exact arcs, stencils, reflection and rotation
- solver: Boundary conditions, RK4 time stepping and observers
- invariants: Energies, norms, identities and explicit stability constants
- perturbations: Initial perturbation families and admissibility checks
- ring: k-reflective rings and segmented solves
"""

from .geometry import (
    ArcParams,
    Curve,
    Grid,
    VectorField,
    canonical_rotation,
    derivative,
    differentiate,
    exact_arc_point,
    extend_by_reflection,
    join_residual,
    reflect_T,
    rotate,
    sample_exact_arc,
)
from .invariants import (
    FUNCTIONALS,
    StabilityConstants,
    energy_E,
    energy_E1,
    energy_E2,
    nostretch_residual,
    perturbation_observers,
    phi3_mean,
    phi3_mean_drift,
    poincare_ratio,
    sobolev_norm,
    stability_constants,
)
from .perturbations import (
    AssumptionReport,
    Perturbation,
    PerturbationSpec,
    build_perturbation,
    check_assumptions,
    check_symmetry,
    constant_shift,
    looped_arc,
    looped_growth_rate,
    looped_radius,
    recover_phi1,
    smooth_random,
    symmetrize,
)
from .ring import (
    ReflectivityReport,
    SegmentedSolution,
    Segmentation,
    check_k_reflective,
    reflective_random,
    ring_growth_rate,
    ring_looped,
    segment_and_solve,
)
from .solver import (
    BoundaryCondition,
    Observer,
    SolverConfig,
    Trajectory,
    arc_boundary_condition,
    simulate,
    step,
    symmetric_boundary_condition,
)

__all__ = [
    # Geometry
    "Grid",
    "Curve",
    "VectorField",
    "ArcParams",
    "exact_arc_point",
    "sample_exact_arc",
    "differentiate",
    "derivative",
    "reflect_T",
    "join_residual",
    "extend_by_reflection",
    "canonical_rotation",
    "rotate",
    # Solver
    "BoundaryCondition",
    "arc_boundary_condition",
    "symmetric_boundary_condition",
    "Observer",
    "SolverConfig",
    "Trajectory",
    "step",
    "simulate",
    # Invariants
    "FUNCTIONALS",
    "energy_E",
    "energy_E1",
    "energy_E2",
    "nostretch_residual",
    "phi3_mean",
    "phi3_mean_drift",
    "sobolev_norm",
    "poincare_ratio",
    "StabilityConstants",
    "stability_constants",
    "perturbation_observers",
    # Perturbations
    "PerturbationSpec",
    "Perturbation",
    "AssumptionReport",
    "constant_shift",
    "looped_arc",
    "looped_radius",
    "looped_growth_rate",
    "smooth_random",
    "symmetrize",
    "check_assumptions",
    "check_symmetry",
    "recover_phi1",
    "build_perturbation",
    # Ring
    "Segmentation",
    "ReflectivityReport",
    "SegmentedSolution",
    "check_k_reflective",
    "ring_looped",
    "ring_growth_rate",
    "reflective_random",
    "segment_and_solve",
]
