"""
LIE Lab constants - Channel names, tolerances and bound documentation.

Provides the stable identifiers shared by the solver observers, the CSV/JSON
writers and the experiment reports, together with short descriptions of
every bound the experiment suites check.
"""

import math

# =============================================================================
# Grids and numerics
# =============================================================================

GRID_KINDS: set[str] = {"interval", "periodic"}

MIN_NODES = 8

# Floor applied when comparing sampled data against exact identities.
UNIT_TOLERANCE = 1e-12

# Boundary tangent mismatch accepted on solver input (before stencil slack).
BC_TOLERANCE = 1e-8

# First-order compatibility |x_s x x_sss| at the ends; violations only warn.
COMPATIBILITY_TOLERANCE = 1e-6

# Join residual of a reflection extension before a warning is logged.
JOIN_TOLERANCE = 1e-8

# Largest admissible angle amplitude for random tangent rotations (radians).
MAX_RANDOM_AMPLITUDE = 0.25

# Number of bumps composing one random angle profile.
BUMP_COUNT = 3

# Gauss-Legendre points per cell when integrating tangents into positions.
GAUSS_POINTS = 8

# Below this |sin(angle)| the start-point equation of random arcs is singular.
SINGULAR_SINE = 1e-12

DEFAULT_DT_FACTOR = 0.25
DEFAULT_RADIUS = 1.0
DEFAULT_ANGLE = math.pi / 2

# =============================================================================
# Perturbation families
# =============================================================================

PERTURBATION_FAMILIES: set[str] = {
    "zero",
    "constant_shift",
    "looped_arc",
    "smooth_random",
    "symmetrized",
    "ring_looped",
    "reflective_random",
}

RING_FAMILIES: set[str] = {"zero", "constant_shift", "ring_looped", "reflective_random"}

# =============================================================================
# Observer channels
# =============================================================================

CHANNEL_DOCS: dict[str, str] = {
    "E": "Quadratic energy ||phi_ss||^2 - ||phi_s||^2 / R^2 of the perturbation",
    "E1": "First higher-order energy of the tangent field",
    "E2": "Second higher-order energy of the tangent field",
    "nostretch": "Max violation of 2 x^R_s . phi_s = -|phi_s|^2",
    "phi3_mean": "Integral of the axial perturbation component",
    "phi3_drift": "Right-hand side of the mean-drift identity for phi_3",
    "phi12": "L2 norm of the in-plane components (phi_1, phi_2)",
    "phi_s_h1": "H1 norm of phi_s",
    "phi_ss": "L2 norm of phi_ss",
    "phi_sss_h1": "H1 norm of phi_sss",
    "phi3": "L2 norm of phi_3",
    "phi_b": "L2 norm of phi . b",
    "phi2": "L2 norm of phi_2",
    "endpoint_lower": "|e2 . phi(0, t)|",
    "endpoint_upper": "|b . phi(L, t)|",
    "x3_offset": "max_s |x_3 - x^R_3|",
    "x3_spread": "max_s (x_3 - x^R_3) - min_s (x_3 - x^R_3)",
    "symmetry": "||T x - x|| on a symmetric interval",
    "remainder": "Cross terms of the first higher-order energy around the arc",
    "arclength": "Max relative change of chord lengths",
    "tangent_residual": "One-sided end tangents against the prescribed ones, beyond stencil slack",
}

ARC_ONLY_CHANNELS: set[str] = {"phi_b", "phi2", "endpoint_lower", "endpoint_upper", "remainder"}

STABILITY_CHANNELS: tuple[str, ...] = (
    "E",
    "phi12",
    "phi_s_h1",
    "phi_ss",
    "phi_sss_h1",
    "phi3",
    "phi_b",
    "phi2",
    "endpoint_lower",
    "endpoint_upper",
)

CONSERVATION_CHANNELS: tuple[str, ...] = ("E", "E1", "E2")

DEFAULT_CHANNELS: tuple[str, ...] = (
    "E",
    "E1",
    "E2",
    "nostretch",
    "phi3_mean",
    "phi_s_h1",
    "phi_ss",
    "phi3",
    "x3_offset",
)

# =============================================================================
# Bound sources
# =============================================================================

BOUND_SOURCES: set[str] = {
    "exact-arc",
    "energy-conservation",
    "basic-estimate",
    "higher-order-bound",
    "nondecay",
    "planar-poincare",
    "endpoint-planes",
    "axial-envelope",
    "constant-shift",
    "optimal-growth",
    "reflection-symmetry",
    "symmetry-reduction",
    "segmentation",
    "ring-stability",
    "ring-optimal-growth",
    "poincare",
    "admissibility",
    "solver",
}

BOUND_DOCS: dict[str, str] = {
    "exact-arc": (
        "The circular arc of radius R translates rigidly along e3 at speed 1/R; "
        "the scheme must reproduce it with second-order convergence."
    ),
    "energy-conservation": (
        "E(phi), E1(v) and E2(v) are constants of motion; discrete drift must "
        "vanish at second order under refinement."
    ),
    "basic-estimate": (
        "||phi_s(t)||_1 <= C0 ||phi0_ss|| with "
        "C0 = max(1, angle R / pi) (1 - angle^2 / pi^2)^(-1/2)."
    ),
    "higher-order-bound": (
        "||phi_sss(t)||_1 stays bounded by a constant times the initial data; "
        "checked as finiteness of its supremum over the run."
    ),
    "nondecay": (
        "||phi_ss(t)|| >= (1 - angle^2 / pi^2)^(1/2) ||phi0_ss||: perturbations "
        "never decay."
    ),
    "planar-poincare": (
        "||phi . b|| and ||phi_2|| are controlled by the Poincare constant "
        "times C0 ||phi0_ss||."
    ),
    "endpoint-planes": "Endpoints stay on their planes: e2 . phi(0, t) = b . phi(L, t) = 0.",
    "axial-envelope": (
        "||phi_3(t)|| grows at most affinely in time; checked as a finite "
        "affine envelope."
    ),
    "constant-shift": "A constant axial shift is a fixed point: phi(t) = phi0.",
    "optimal-growth": (
        "Looped arcs separate from the reference arc at the exact rate "
        "2 pi n / (R angle)."
    ),
    "reflection-symmetry": "Solutions of reflection-symmetric data stay symmetric.",
    "symmetry-reduction": (
        "Perturbations symmetric about the mid-chord stay symmetric, which "
        "reduces angles in [pi, 2 pi) to half the angle."
    ),
    "segmentation": (
        "A k-reflective ring solution coincides with k independent arc "
        "solutions glued at the breakpoints."
    ),
    "ring-stability": "Segmentwise explicit bounds for k-reflective ring perturbations.",
    "ring-optimal-growth": "Ring looped perturbations separate at rate (n - 1) / R.",
    "poincare": "The sharp Poincare constant on (0, L) with vanishing end values is L / pi.",
    "admissibility": "Initial data satisfy unit speed, compatibility and endpoint planes.",
    "solver": "The time integration completed without blow-up.",
}

# =============================================================================
# Acceptance tolerances
# =============================================================================

DEFAULT_HEADROOM = 0.05
ORDER_THRESHOLD = 1.9
SLOPE_TOLERANCE = 0.01
ENDPOINT_TOLERANCE = 1e-6
ADMISSIBILITY_TOLERANCE = 1e-6
SYMMETRY_TOLERANCE = 1e-8
ARC_ERROR_TOLERANCE = 1e-3
SPEED_TOLERANCE = 1e-4
SPREAD_TOLERANCE = 1e-4
DRIFT_TOLERANCE = 1e-5
SEGMENT_MISMATCH_TOLERANCE = 1e-4
REFLECTIVITY_TOLERANCE = 1e-6

# Drifts below this are treated as round-off when estimating orders.
ROUNDOFF_FLOOR = 1e-12
