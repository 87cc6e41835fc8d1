"""
LIE Perturbations - Initial perturbations of the exact arc and their checks.

This module provides the perturbation families (constant shifts, looped
arcs, smooth random tangent rotations and their symmetric variants), the
admissibility report (unit speed, boundary compatibility, endpoint planes)
and the parity machinery about the mid-chord of the arc.

Constructors return Perturbation fields carrying exact derivatives, so the
admissibility residuals are not limited by stencil accuracy.
"""

import logging
from dataclasses import dataclass, field, fields

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..constants import (
    BUMP_COUNT,
    GAUSS_POINTS,
    MAX_RANDOM_AMPLITUDE,
    PERTURBATION_FAMILIES,
    SINGULAR_SINE,
    UNIT_TOLERANCE,
)
from ..errors import AdmissibilityError, DegenerateInputError, GridError
from .geometry import (
    E2,
    E3,
    ArcParams,
    Grid,
    VectorField,
    differentiate,
    exact_arc_points,
    exact_arc_tangents,
    radius_of,
)

logger = logging.getLogger("lie-lab.perturbations")


# =============================================================================
# Types
# =============================================================================


@dataclass(frozen=True)
class PerturbationSpec:
    """Declarative description of an initial perturbation."""

    family: str
    c: tuple[float, float, float] | None = None
    n: int | None = None
    seed: int | None = None
    amplitude: float = 0.0
    margin: float = 0.1
    k: int | None = None
    symmetric: bool = False
    inner: "PerturbationSpec | None" = None

    def __post_init__(self):
        if self.family not in PERTURBATION_FAMILIES:
            raise ValueError(
                f"unknown family '{self.family}', expected one of {sorted(PERTURBATION_FAMILIES)}"
            )
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be non-negative, got {self.amplitude}")
        if not 0.0 < self.margin < 0.25:
            raise ValueError(f"margin must lie in (0, 1/4), got {self.margin}")
        if self.family == "symmetrized" and self.inner is None:
            raise ValueError("the symmetrized family wraps an inner spec")
        if self.c is not None:
            object.__setattr__(self, "c", tuple(float(x) for x in self.c))

    def to_dict(self) -> dict:
        out = {}
        for item in fields(self):
            value = getattr(self, item.name)
            if isinstance(value, PerturbationSpec):
                value = value.to_dict()
            elif isinstance(value, tuple):
                value = list(value)
            if value is not None:
                out[item.name] = value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PerturbationSpec":
        data = dict(data)
        if isinstance(data.get("inner"), dict):
            data["inner"] = cls.from_dict(data["inner"])
        if data.get("c") is not None:
            data["c"] = tuple(data["c"])
        return cls(**data)


@dataclass(frozen=True, eq=False)
class Perturbation(VectorField):
    """Perturbation field with its exact arc-length derivatives when known."""

    spec: PerturbationSpec | None = None
    slope: VectorField | None = None
    curvature: VectorField | None = None
    third: VectorField | None = None

    @property
    def has_jets(self) -> bool:
        return self.slope is not None and self.third is not None


def perturbation_from_arrays(
    spec, grid, values, slope=None, curvature=None, third=None
) -> Perturbation:
    def wrap(array):
        return None if array is None else VectorField(grid, array)

    return Perturbation(grid, values, spec, wrap(slope), wrap(curvature), wrap(third))


@dataclass
class AssumptionReport:
    """Residuals of the admissibility assumptions for one perturbation."""

    a1_residual: float
    a2_residuals: dict[str, float] = field(default_factory=dict)
    a3_residuals: dict[str, float] = field(default_factory=dict)
    derivative_source: str = "stencil"

    @property
    def max_residual(self) -> float:
        values = [self.a1_residual, *self.a2_residuals.values(), *self.a3_residuals.values()]
        return float(max(values))

    def passes(self, tolerance: float) -> bool:
        return self.max_residual <= tolerance

    def to_dict(self) -> dict:
        return {
            "a1_residual": self.a1_residual,
            "a2_residuals": dict(self.a2_residuals),
            "a3_residuals": dict(self.a3_residuals),
            "derivative_source": self.derivative_source,
            "max_residual": self.max_residual,
        }


# =============================================================================
# Helpers
# =============================================================================


def _check_arc_grid(params: ArcParams, grid: Grid):
    if grid.is_periodic or abs(grid.origin) > UNIT_TOLERANCE:
        raise GridError("arc perturbations live on the interval [0, angle R]")
    if abs(grid.length - params.length) > UNIT_TOLERANCE * max(1.0, params.length):
        raise GridError(f"grid length {grid.length} differs from arc length {params.length}")


def circle_jets(radius: float, s: np.ndarray) -> tuple[np.ndarray, ...]:
    """Position and first three derivatives of (r cos(s/r), r sin(s/r), 0)."""
    c, sn, z = np.cos(s / radius), np.sin(s / radius), np.zeros_like(s)
    position = np.stack([radius * c, radius * sn, z], axis=1)
    first = np.stack([-sn, c, z], axis=1)
    second = np.stack([-c, -sn, z], axis=1) / radius
    third = np.stack([sn, -c, z], axis=1) / radius**2
    return position, first, second, third


def mirror_basis(params: ArcParams) -> tuple[np.ndarray, np.ndarray]:
    """In-plane basis (e^r, e^theta) aligned with the mid-chord direction."""
    half = 0.5 * params.angle
    e_r = np.array([np.cos(half), np.sin(half), 0.0])
    e_theta = np.array([-np.sin(half), np.cos(half), 0.0])
    return e_r, e_theta


def _parity_project(vectors: np.ndarray, params: ArcParams, signs: tuple[int, int, int]):
    """Project (r, theta, 3) components onto even (+1) or odd (-1) parts about L/2."""
    e_r, e_theta = mirror_basis(params)
    parts = [vectors @ e_r, vectors @ e_theta, vectors[:, 2]]
    r, th, z = ((p + sign * p[::-1]) / 2.0 for p, sign in zip(parts, signs))
    return np.outer(r, e_r) + np.outer(th, e_theta) + np.outer(z, E3)


_VALUE_PARITY = (1, -1, 1)
_SLOPE_PARITY = (-1, 1, -1)


# =============================================================================
# Families
# =============================================================================


def constant_shift(c, params: ArcParams | float, grid: Grid) -> Perturbation:
    """
    Constant perturbation c at every node.

    On arcs the endpoint planes force e2 . c = 0 and b . c = 0; a violation
    raises AdmissibilityError naming the constraint.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (3,) or not np.all(np.isfinite(c)):
        raise DegenerateInputError("c must be a finite 3-vector")
    if isinstance(params, ArcParams):
        _check_arc_grid(params, grid)
        lower = float(np.dot(E2, c))
        upper = float(np.dot(params.upper_tangent, c))
        if abs(lower) > UNIT_TOLERANCE:
            raise AdmissibilityError(f"endpoint plane at s = 0 violated: e2 . c = {lower:.6g}")
        if abs(upper) > UNIT_TOLERANCE:
            raise AdmissibilityError(f"endpoint plane at s = L violated: b . c = {upper:.6g}")
    zeros = np.zeros((grid.n_nodes, 3))
    spec = PerturbationSpec("constant_shift", c=tuple(c))
    values = np.tile(c, (grid.n_nodes, 1))
    return perturbation_from_arrays(spec, grid, values, zeros, zeros, zeros)


def looped_radius(n: int, params: ArcParams) -> float:
    """Radius R_n = R angle / (2 pi n + angle) of the n-times looped arc."""
    return params.radius * params.angle / (2.0 * np.pi * n + params.angle)


def looped_growth_rate(n: int, params: ArcParams) -> float:
    """Separation speed 2 pi n / (R angle) = 1/R_n - 1/R."""
    return 2.0 * np.pi * n / (params.radius * params.angle)


def looped_arc(n: int, params: ArcParams, grid: Grid) -> Perturbation:
    """
    Perturbation turning the arc into one of radius R_n wound n more times.

    Args:
        n: Number of extra loops, n >= 1
        params: Arc parameters
        grid: Arc grid

    Returns:
        Perturbation with exact derivatives; the third component is zero
    """
    if n < 1:
        raise DegenerateInputError(f"n must be at least 1, got {n}")
    _check_arc_grid(params, grid)
    s = grid.nodes
    looped = circle_jets(looped_radius(n, params), s)
    arc = circle_jets(params.radius, s)
    values, slope, curvature, third = (a - b for a, b in zip(looped, arc))
    spec = PerturbationSpec("looped_arc", n=n)
    return perturbation_from_arrays(spec, grid, values, slope, curvature, third)


class _BumpProfile:
    """Weighted sum of C-infinity bumps exp(1 - 1/(1 - u^2)) with derivatives."""

    def __init__(self, centers, widths, weights):
        self.centers = np.asarray(centers, dtype=float)
        self.widths = np.asarray(widths, dtype=float)
        self.weights = np.asarray(weights, dtype=float)

    @classmethod
    def draw(cls, rng: np.random.Generator, amplitude: float, lo: float, hi: float):
        span = hi - lo
        widths = rng.uniform(0.15, 0.3, BUMP_COUNT) * span
        centers = np.array([rng.uniform(lo + w, hi - w) for w in widths])
        weights = rng.uniform(-1.0, 1.0, BUMP_COUNT) * amplitude
        return cls(centers, widths, weights)

    def __call__(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        f, f1, f2 = (np.zeros_like(s) for _ in range(3))
        for center, width, weight in zip(self.centers, self.widths, self.weights):
            u = (s - center) / width
            inside = np.abs(u) < 1.0
            ui = u[inside]
            q = 1.0 - ui**2
            bump = np.exp(1.0 - 1.0 / q)
            d1 = -2.0 * ui / q**2 * bump
            d2 = (-2.0 / q**2 - 8.0 * ui**2 / q**3 + 4.0 * ui**2 / q**4) * bump
            f[inside] += weight * bump
            f1[inside] += weight * d1 / width
            f2[inside] += weight * d2 / width**2
        return f, f1, f2


def _odd_about(profile: _BumpProfile, length: float):
    """Odd part about length/2 of a profile, with matching derivatives."""

    def evaluate(s):
        f, f1, f2 = profile(s)
        g, g1, g2 = profile(length - s)
        return (f - g) / 2.0, (f1 + g1) / 2.0, (f2 - g2) / 2.0

    return evaluate


def _rotated_tangent(s, radius, alpha, beta):
    """
    Unit tangent (-cos b sin p, cos b cos p, sin b) with p = s/R + alpha and
    its first two derivatives, for angle profiles alpha, beta.
    """
    a, a1, a2 = alpha(s)
    b, b1, b2 = beta(s)
    psi = s / radius + a
    psi1 = 1.0 / radius + a1
    p = np.stack([-np.sin(psi), np.cos(psi), np.zeros_like(s)], axis=1)
    q = np.stack([-np.cos(psi), -np.sin(psi), np.zeros_like(s)], axis=1)
    cb, sb = np.cos(b)[:, None], np.sin(b)[:, None]
    b1c, b2c = b1[:, None], b2[:, None]
    psi1c, psi2c = psi1[:, None], a2[:, None]

    tangent = cb * p + sb * E3
    first = -b1c * sb * p + cb * psi1c * q + b1c * cb * E3
    second = (
        (-b2c * sb - b1c**2 * cb - cb * psi1c**2) * p
        + (-2.0 * b1c * sb * psi1c + cb * psi2c) * q
        + (b2c * cb - b1c**2 * sb) * E3
    )
    return tangent, first, second


def smooth_random(
    seed: int,
    amplitude: float,
    margin: float,
    params: ArcParams,
    grid: Grid,
    symmetric: bool = False,
) -> Perturbation:
    """
    Admissible random perturbation built in tangent space.

    The arc tangent is rotated through two smooth angle profiles supported
    in [margin L, (1 - margin) L]; the rotated tangent is integrated with
    Gauss-Legendre quadrature from x(0) = x^R(0) + (delta, 0, 0), where delta
    puts the far endpoint on its plane. Symmetric perturbations use profiles
    odd about the mid-chord and choose delta to close the mirror symmetry,
    which also places the far endpoint; this works at angle = pi, where the
    endpoint equation alone leaves delta undetermined.

    Args:
        seed: Seed of the profile generator
        amplitude: Maximal weight of each bump (radians)
        margin: Support margin as a fraction of the arc length
        params: Arc parameters
        grid: Arc grid
        symmetric: Draw mid-chord symmetric perturbations

    Returns:
        Perturbation with exact derivatives
    """
    _check_arc_grid(params, grid)
    if amplitude > MAX_RANDOM_AMPLITUDE:
        raise AdmissibilityError(
            f"amplitude {amplitude} exceeds {MAX_RANDOM_AMPLITUDE}; tangent rotation may fold"
        )
    spec = PerturbationSpec(
        "smooth_random", seed=seed, amplitude=amplitude, margin=margin, symmetric=symmetric
    )
    sine = np.sin(params.angle)
    if not symmetric and abs(sine) < SINGULAR_SINE:
        raise DegenerateInputError(
            "the start point is undetermined at angle = pi; use the symmetrized family"
        )
    if amplitude == 0.0:
        zeros = np.zeros((grid.n_nodes, 3))
        return perturbation_from_arrays(spec, grid, zeros, zeros, zeros, zeros)

    L, R = params.length, params.radius
    rng = np.random.default_rng(seed)
    alpha = _BumpProfile.draw(rng, amplitude, margin * L, (1.0 - margin) * L)
    beta = _BumpProfile.draw(rng, amplitude, margin * L, (1.0 - margin) * L)
    if symmetric:
        alpha, beta = _odd_about(alpha, L), _odd_about(beta, L)

    s = grid.nodes
    tangent, first, second = _rotated_tangent(s, R, alpha, beta)

    # Cellwise Gauss-Legendre integration of the tangent.
    xg, wg = leggauss(GAUSS_POINTS)
    mid = 0.5 * (s[1:] + s[:-1])
    half = 0.5 * np.diff(s)
    samples = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    sampled, _, _ = _rotated_tangent(samples, R, alpha, beta)
    sampled = sampled.reshape(mid.size, GAUSS_POINTS, 3)
    increments = half[:, None] * np.einsum("g,cgk->ck", wg, sampled)

    reference = exact_arc_points(R, s, 0.0)
    points = np.empty_like(reference)
    points[0] = reference[0]
    points[1:] = reference[0] + np.cumsum(increments, axis=0)

    if symmetric:
        # The tangent is already mirror-symmetric; delta cancels the residual
        # offset c = x(L) - M x(0), which points along e^theta.
        _, e_theta = mirror_basis(params)
        mirrored = points[0] - 2.0 * np.dot(points[0], e_theta) * e_theta
        offset = float(np.dot(e_theta, points[-1] - mirrored))
        delta = offset / (2.0 * np.sin(0.5 * params.angle))
    else:
        drift = float(np.dot(params.upper_tangent, points[-1] - reference[-1]))
        delta = drift / sine
    points[:, 0] += delta

    arc_tangent = exact_arc_tangents(R, s)
    arc_first = np.stack([-np.cos(s / R), -np.sin(s / R), np.zeros_like(s)], axis=1) / R
    arc_second = -arc_tangent / R**2
    return perturbation_from_arrays(
        spec,
        grid,
        points - reference,
        tangent - arc_tangent,
        first - arc_first,
        second - arc_second,
    )


def symmetrize(phi0: VectorField, params: ArcParams) -> VectorField:
    """
    Project onto perturbations symmetric about s = L/2.

    In the basis (e^r, e^theta, e3) the r and axial components keep their
    even parts and the theta component its odd part. Exact derivatives of a
    Perturbation are projected with the opposite parity for odd orders.
    """
    grid = phi0.grid
    _check_arc_grid(params, grid)
    if not grid.has_midpoint:
        raise GridError("symmetrize needs a node at the mid-chord (odd node count)")
    values = _parity_project(phi0.vectors, params, _VALUE_PARITY)
    if not isinstance(phi0, Perturbation):
        return VectorField(grid, values)

    def project(jet, signs):
        return None if jet is None else _parity_project(jet.vectors, params, signs)

    spec = None if phi0.spec is None else PerturbationSpec("symmetrized", inner=phi0.spec)
    return perturbation_from_arrays(
        spec,
        grid,
        values,
        project(phi0.slope, _SLOPE_PARITY),
        project(phi0.curvature, _VALUE_PARITY),
        project(phi0.third, _SLOPE_PARITY),
    )


def check_symmetry(phi0: VectorField, params: ArcParams) -> float:
    """Max violation of the parity conditions about the mid-chord."""
    grid = phi0.grid
    if not grid.has_midpoint:
        raise GridError("check_symmetry needs a node at the mid-chord (odd node count)")
    e_r, e_theta = mirror_basis(params)
    vectors = phi0.vectors
    r, th, z = vectors @ e_r, vectors @ e_theta, vectors[:, 2]
    residual = max(
        np.max(np.abs(r - r[::-1])),
        np.max(np.abs(th + th[::-1])),
        np.max(np.abs(z - z[::-1])),
    )
    return float(residual)


def recover_phi1(phi_b: np.ndarray, phi2: np.ndarray, params: ArcParams) -> np.ndarray:
    """phi_1 from phi . b and phi_2: phi_1 = -phi_b / sin + (cos / sin) phi_2."""
    sine = np.sin(params.angle)
    if abs(sine) < SINGULAR_SINE:
        raise DegenerateInputError("phi_1 is not recoverable from phi . b at angle = pi")
    return -np.asarray(phi_b) / sine + np.cos(params.angle) / sine * np.asarray(phi2)


# =============================================================================
# Admissibility
# =============================================================================


def check_assumptions(phi0: VectorField, params: ArcParams) -> AssumptionReport:
    """
    Measure unit speed, boundary compatibility and endpoint-plane residuals.

    Exact derivatives of a Perturbation are used when present; otherwise the
    perturbation is differentiated with the geometry stencils while the arc
    itself enters through its exact derivatives.

    Args:
        phi0: Initial perturbation on the arc grid
        params: Arc parameters

    Returns:
        AssumptionReport
    """
    grid = phi0.grid
    _check_arc_grid(params, grid)
    R, s = params.radius, grid.nodes
    arc_tangent = exact_arc_tangents(R, s)
    arc_second = -arc_tangent / R**2

    if isinstance(phi0, Perturbation) and phi0.has_jets:
        slope, third, source = phi0.slope.vectors, phi0.third.vectors, "exact"
    else:
        slope = differentiate(phi0.vectors, grid, 1)
        third = differentiate(phi0.vectors, grid, 3)
        source = "stencil"

    tangent = arc_tangent + slope
    x_sss = arc_second + third
    b = params.upper_tangent
    a1 = float(np.max(np.abs(np.linalg.norm(tangent, axis=1) - 1.0)))
    a2 = {
        "tangent_lower": float(np.linalg.norm(tangent[0] - E2)),
        "tangent_upper": float(np.linalg.norm(tangent[-1] - b)),
        "compatibility_lower": float(np.linalg.norm(np.cross(tangent[0], x_sss[0]))),
        "compatibility_upper": float(np.linalg.norm(np.cross(tangent[-1], x_sss[-1]))),
    }
    a3 = {
        "plane_lower": float(abs(np.dot(E2, phi0.vectors[0]))),
        "plane_upper": float(abs(np.dot(b, phi0.vectors[-1]))),
    }
    return AssumptionReport(a1, a2, a3, source)


# =============================================================================
# Dispatch
# =============================================================================


def build_perturbation(
    spec: PerturbationSpec, params: ArcParams | float, grid: Grid
) -> Perturbation:
    """
    Construct the perturbation a spec describes.

    Arc families need ArcParams; ring families take the ring radius.
    """
    if spec.family == "zero":
        zeros = np.zeros((grid.n_nodes, 3))
        return perturbation_from_arrays(spec, grid, zeros, zeros, zeros, zeros)
    if spec.family == "constant_shift":
        return constant_shift(spec.c if spec.c is not None else (0.0, 0.0, 0.0), params, grid)
    if spec.family in ("ring_looped", "reflective_random"):
        from .ring import reflective_random, ring_looped

        radius = radius_of(params)
        if spec.family == "ring_looped":
            return ring_looped(spec.n or 2, radius, grid)
        return reflective_random(
            spec.seed or 0, spec.amplitude, spec.margin, spec.k or 6, radius, grid
        )
    if not isinstance(params, ArcParams):
        raise DegenerateInputError(f"family '{spec.family}' needs arc parameters")
    if spec.family == "looped_arc":
        return looped_arc(spec.n or 1, params, grid)
    if spec.family == "smooth_random":
        return smooth_random(
            spec.seed or 0, spec.amplitude, spec.margin, params, grid, symmetric=spec.symmetric
        )
    # symmetrized
    inner = spec.inner
    if inner.family == "smooth_random":
        return smooth_random(
            inner.seed or 0, inner.amplitude, inner.margin, params, grid, symmetric=True
        )
    return symmetrize(build_perturbation(inner, params, grid), params)
