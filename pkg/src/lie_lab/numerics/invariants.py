"""
LIE Invariants - Discrete norms, conserved energies and stability constants.

This module provides the quadrature and Sobolev norms used throughout the
package, the conserved functionals of the perturbation and tangent fields,
the explicit stability constants of arc perturbations, and factories that
turn all of these into solver observers.
"""

import logging
from collections.abc import Callable, Iterable
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from ..constants import ARC_ONLY_CHANNELS, CHANNEL_DOCS
from ..errors import ConstantsUnavailableError, GridError
from .geometry import (
    E2,
    ArcParams,
    Curve,
    Grid,
    VectorField,
    derivative,
    exact_arc_points,
    radius_of,
    reflect_T,
)
from .solver import BoundaryCondition, Observer, arclength_observer, tangent_residual_observer

logger = logging.getLogger("lie-lab.invariants")


# =============================================================================
# Quadrature and norms
# =============================================================================


def quadrature(values: np.ndarray, grid: Grid) -> float:
    """Trapezoid rule on intervals, rectangle rule on the torus."""
    if grid.is_periodic:
        return float(np.sum(values) * grid.spacing)
    return float(trapezoid(values, dx=grid.spacing))


def inner(f: VectorField, g: VectorField) -> float:
    """L2 inner product of two fields on the same grid."""
    if f.grid != g.grid:
        raise GridError("fields live on different grids")
    return quadrature(np.sum(f.vectors * g.vectors, axis=1), f.grid)


def l2_norm(field: VectorField) -> float:
    return float(np.sqrt(quadrature(np.sum(field.vectors**2, axis=1), field.grid)))


def scalar_norm(values: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(quadrature(np.asarray(values) ** 2, grid)))


def sobolev_norm(field: VectorField, order: int = 1) -> float:
    """(sum over j <= order of ||d^j field||^2)^(1/2)."""
    total = l2_norm(field) ** 2
    for j in range(1, order + 1):
        total += l2_norm(derivative(field, j)) ** 2
    return float(np.sqrt(total))


def poincare_ratio(field: VectorField) -> float:
    """Rayleigh-type quotient ||f|| / ||f_s||."""
    slope = l2_norm(derivative(field, 1))
    if slope == 0.0:
        return float("inf")
    return l2_norm(field) / slope


# =============================================================================
# Functionals
# =============================================================================


@dataclass(frozen=True)
class Functional:
    """Named deterministic functional of one or two fields."""

    name: str
    arity: int
    evaluate: Callable[..., float]

    def __call__(self, *args) -> float:
        return self.evaluate(*args)


def energy_E(phi: VectorField, radius: float) -> float:
    """E(phi) = ||phi_ss||^2 - ||phi_s||^2 / R^2."""
    slope = l2_norm(derivative(phi, 1))
    bend = l2_norm(derivative(phi, 2))
    return bend**2 - slope**2 / radius**2


def energy_E1(v: VectorField) -> float:
    """E1(v) = ||v_ss||^2 - (5/4) || |v_s|^2 ||^2."""
    v_s = derivative(v, 1).vectors
    v_ss = derivative(v, 2).vectors
    grid = v.grid
    speed2 = np.sum(v_s**2, axis=1)
    return quadrature(np.sum(v_ss**2, axis=1), grid) - 1.25 * quadrature(speed2**2, grid)


def energy_E2(v: VectorField) -> float:
    """
    E2(v) = ||v_sss||^2 - (7/2)|| |v_s||v_ss| ||^2 - 14 ||v_s . v_ss||^2
            + (21/8) || |v_s|^3 ||^2.
    """
    grid = v.grid
    v_s = derivative(v, 1).vectors
    v_ss = derivative(v, 2).vectors
    v_sss = derivative(v, 3).vectors
    a2 = np.sum(v_s**2, axis=1)
    b2 = np.sum(v_ss**2, axis=1)
    cross_term = np.sum(v_s * v_ss, axis=1)
    return (
        quadrature(np.sum(v_sss**2, axis=1), grid)
        - 3.5 * quadrature(a2 * b2, grid)
        - 14.0 * quadrature(cross_term**2, grid)
        + 2.625 * quadrature(a2**3, grid)
    )


def nostretch_residual(phi_s: VectorField, arc_tangent: VectorField) -> float:
    """Max over nodes of |2 a . phi_s + |phi_s|^2|."""
    if phi_s.grid != arc_tangent.grid:
        raise GridError("fields live on different grids")
    values = 2.0 * phi_s.dot(arc_tangent) + np.sum(phi_s.vectors**2, axis=1)
    return float(np.max(np.abs(values)))


def phi3_mean(phi: VectorField) -> float:
    """Integral of the axial component."""
    return quadrature(phi.component(2), phi.grid)


def phi3_mean_drift(phi: VectorField, radius: float) -> float:
    """
    Time derivative of the axial mean predicted by the perturbation equation:

        (phi1_s, phi2_ss) - (phi2_s, phi1_ss) - ||phi_s||^2 / R
    """
    if phi.grid.is_periodic:
        raise GridError("the mean-drift identity is stated on intervals")
    grid = phi.grid
    slope = derivative(phi, 1).vectors
    bend = derivative(phi, 2).vectors
    return (
        quadrature(slope[:, 0] * bend[:, 1], grid)
        - quadrature(slope[:, 1] * bend[:, 0], grid)
        - quadrature(np.sum(slope**2, axis=1), grid) / radius
    )


def higher_order_remainder(phi: VectorField, radius: float) -> float:
    """
    Cross terms R1 in E1(x^R_s + phi_s) = E1(x^R_s) + E1(phi_s) + R1, a cubic in phi.

    Uses the exact derivatives of the arc at the grid nodes and stencil
    derivatives of phi.
    """
    grid = phi.grid
    s = grid.nodes
    angle = s / radius
    arc_ss = -np.stack([np.cos(angle), np.sin(angle), np.zeros_like(s)], axis=1) / radius
    arc_sss = np.stack([np.sin(angle), -np.cos(angle), np.zeros_like(s)], axis=1) / radius**2
    phi_ss = derivative(phi, 2).vectors
    phi_sss = derivative(phi, 3).vectors

    arc2 = np.sum(arc_ss**2, axis=1)
    phi2 = np.sum(phi_ss**2, axis=1)
    coupling = np.sum(arc_ss * phi_ss, axis=1)
    integrand = (
        2.0 * np.sum(arc_sss * phi_sss, axis=1)
        - 5.0 * arc2 * coupling
        - 5.0 * coupling**2
        - 2.5 * arc2 * phi2
        - 5.0 * phi2 * coupling
    )
    return quadrature(integrand, grid)


FUNCTIONALS: dict[str, Functional] = {
    "E": Functional("E", 1, energy_E),
    "E1": Functional("E1", 1, energy_E1),
    "E2": Functional("E2", 1, energy_E2),
    "nostretch": Functional("nostretch", 2, nostretch_residual),
    "phi3_mean": Functional("phi3_mean", 1, phi3_mean),
    "phi3_drift": Functional("phi3_drift", 1, phi3_mean_drift),
    "remainder": Functional("remainder", 1, higher_order_remainder),
}


# =============================================================================
# Stability constants
# =============================================================================


@dataclass(frozen=True)
class StabilityConstants:
    """Explicit constants of the arc stability estimates."""

    C0: float
    nondecay_factor: float
    poincare: float

    @property
    def planar_bound(self) -> float:
        """Factor in ||phi . b||, ||phi_2|| <= planar_bound * ||phi0_ss||."""
        return 2.0 * self.poincare * self.C0

    def to_dict(self) -> dict:
        return {
            "C0": self.C0,
            "nondecay_factor": self.nondecay_factor,
            "poincare": self.poincare,
            "planar_bound": self.planar_bound,
        }


def stability_constants(params: ArcParams) -> StabilityConstants:
    """
    Constants of the basic and non-decay estimates.

    Args:
        params: Arc parameters with angle in (0, pi)

    Returns:
        StabilityConstants with C0 = max(1, angle R / pi)(1 - angle^2/pi^2)^(-1/2),
        nondecay factor (1 - angle^2/pi^2)^(1/2) and Poincare constant angle R / pi
    """
    if params.angle >= np.pi:
        raise ConstantsUnavailableError(
            f"explicit constants need angle < pi (got {params.angle:.6g}); "
            "use symmetric perturbations and the half-angle problem"
        )
    gap = 1.0 - params.angle**2 / np.pi**2
    poincare = params.length / np.pi
    return StabilityConstants(
        C0=max(1.0, poincare) / np.sqrt(gap),
        nondecay_factor=float(np.sqrt(gap)),
        poincare=poincare,
    )


# =============================================================================
# Observers
# =============================================================================


class _PerturbationFrame:
    """Caches phi = x - x^R and its derivatives for the current observation."""

    def __init__(self, params: ArcParams | float, grid: Grid):
        self.params = params
        self.radius = radius_of(params)
        self.grid = grid
        self._key: tuple[int, float] | None = None
        self._cache: dict[str, object] = {}

    def _refresh(self, curve: Curve, t: float):
        key = (id(curve), t)
        if key != self._key:
            self._key = key
            self._curve = curve
            self._cache = {}

    def get(self, curve: Curve, t: float, name: str):
        self._refresh(curve, t)
        if name not in self._cache:
            self._cache[name] = self._compute(curve, t, name)
        return self._cache[name]

    def _compute(self, curve: Curve, t: float, name: str):
        if name == "reference":
            return VectorField(self.grid, exact_arc_points(self.radius, self.grid.nodes, t))
        if name == "phi":
            return VectorField(self.grid, curve.points - self.get(curve, t, "reference").vectors)
        if name.startswith("d"):
            return derivative(self.get(curve, t, "phi"), int(name[1:]))
        if name == "tangent":
            return derivative(curve, 1)
        if name == "arc_tangent":
            return derivative(self.get(curve, t, "reference"), 1)
        raise KeyError(name)


def _channel(frame: _PerturbationFrame, name: str) -> Callable[[Curve, float], float]:
    radius = frame.radius
    grid = frame.grid

    def phi(curve, t):
        return frame.get(curve, t, "phi")

    def d(curve, t, order):
        return frame.get(curve, t, f"d{order}")

    if name == "E":
        return lambda c, t: energy_E(phi(c, t), radius)
    if name == "E1":
        return lambda c, t: energy_E1(frame.get(c, t, "tangent"))
    if name == "E2":
        return lambda c, t: energy_E2(frame.get(c, t, "tangent"))
    if name == "nostretch":
        return lambda c, t: nostretch_residual(d(c, t, 1), frame.get(c, t, "arc_tangent"))
    if name == "phi3_mean":
        return lambda c, t: phi3_mean(phi(c, t))
    if name == "phi3_drift":
        return lambda c, t: phi3_mean_drift(phi(c, t), radius)
    if name == "phi12":
        return lambda c, t: scalar_norm(np.linalg.norm(phi(c, t).vectors[:, :2], axis=1), grid)
    if name == "phi_s_h1":
        return lambda c, t: float(np.hypot(l2_norm(d(c, t, 1)), l2_norm(d(c, t, 2))))
    if name == "phi_ss":
        return lambda c, t: l2_norm(d(c, t, 2))
    if name == "phi_sss_h1":
        return lambda c, t: float(np.hypot(l2_norm(d(c, t, 3)), l2_norm(d(c, t, 4))))
    if name == "phi3":
        return lambda c, t: scalar_norm(phi(c, t).component(2), grid)
    if name == "phi2":
        return lambda c, t: scalar_norm(phi(c, t).component(1), grid)
    if name == "x3_offset":
        return lambda c, t: float(np.max(np.abs(phi(c, t).component(2))))
    if name == "x3_spread":
        return lambda c, t: float(np.ptp(phi(c, t).component(2)))
    if name == "remainder":
        return lambda c, t: higher_order_remainder(phi(c, t), radius)

    if isinstance(frame.params, ArcParams):
        b = frame.params.upper_tangent
        if name == "phi_b":
            return lambda c, t: scalar_norm(phi(c, t).dot(b), grid)
        if name == "endpoint_lower":
            return lambda c, t: float(abs(np.dot(E2, phi(c, t).vectors[0])))
        if name == "endpoint_upper":
            return lambda c, t: float(abs(np.dot(b, phi(c, t).vectors[-1])))
    raise KeyError(name)


def perturbation_observers(
    params: ArcParams | float,
    grid: Grid,
    names: Iterable[str],
    *,
    initial: Curve | None = None,
    bc: BoundaryCondition | None = None,
) -> list[Observer]:
    """
    Build solver observers for named channels.

    Channels measure phi = x - x^R(t) against the exact solution sampled on
    ``grid``. Arc-only channels are skipped on rings; "symmetry" needs a
    symmetric grid; "arclength" and "tangent_residual" need the initial
    curve and boundary condition.

    Args:
        params: Arc parameters, or the ring radius
        grid: Grid of the simulated curve
        names: Channel names (see constants.CHANNEL_DOCS)
        initial: Initial curve, for the arclength channel
        bc: Boundary condition, for the tangent residual channel

    Returns:
        List of observers in the order requested
    """
    frame = _PerturbationFrame(params, grid)
    observers = []
    for name in names:
        if name not in CHANNEL_DOCS:
            raise KeyError(f"unknown channel '{name}'")
        if name in ARC_ONLY_CHANNELS and not isinstance(params, ArcParams):
            logger.debug(f"Skipping arc-only channel '{name}' on a ring")
            continue
        if name == "symmetry":
            observers.append(
                Observer(
                    "symmetry",
                    lambda c, t: float(np.max(np.abs(reflect_T(c).points - c.points))),
                )
            )
        elif name == "arclength":
            if initial is None:
                raise ValueError("the arclength channel needs the initial curve")
            observers.append(arclength_observer(initial))
        elif name == "tangent_residual":
            if bc is None:
                raise ValueError("the tangent residual channel needs the boundary condition")
            observers.append(tangent_residual_observer(bc))
        else:
            observers.append(Observer(name, _channel(frame, name)))
    return observers

