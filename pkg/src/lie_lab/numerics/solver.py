"""
LIE Solver - Method-of-lines time integration of x_t = x_s x x_ss.

This module provides the discrete right-hand side for interval problems with
prescribed end tangents and for closed (periodic) filaments, a classical
fourth-order Runge-Kutta step, and the simulation loop that feeds observers
and collects snapshots.

Interval ends are closed with one ghost node each:

    x[-1] = x[1]   - 2 ds b_lower
    x[N]  = x[N-2] + 2 ds b_upper

so the central tangent at an endpoint is the prescribed vector and the end
velocity b x x_ss is orthogonal to b.
"""

import logging
import math
import time as _time
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from ..constants import BC_TOLERANCE, COMPATIBILITY_TOLERANCE, DEFAULT_DT_FACTOR, UNIT_TOLERANCE
from ..errors import BlowUpError, GridError, InitialConditionError
from .geometry import ArcParams, Curve, Grid, VectorField, differentiate

logger = logging.getLogger("lie-lab.solver")


# =============================================================================
# Configuration types
# =============================================================================


def _unit(vector, name: str) -> np.ndarray:
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (3,) or not np.all(np.isfinite(vector)):
        raise InitialConditionError(f"{name} must be a finite 3-vector")
    if abs(np.linalg.norm(vector) - 1.0) > UNIT_TOLERANCE:
        raise InitialConditionError(f"{name} must have unit length, got {np.linalg.norm(vector)}")
    vector.setflags(write=False)
    return vector


@dataclass(frozen=True, eq=False)
class BoundaryCondition:
    """Fixed end tangents on an interval, or a closed filament."""

    kind: Literal["fixed_tangents", "periodic"]
    b_lower: np.ndarray | None = None
    b_upper: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "fixed_tangents":
            object.__setattr__(self, "b_lower", _unit(self.b_lower, "b_lower"))
            object.__setattr__(self, "b_upper", _unit(self.b_upper, "b_upper"))
        elif self.kind == "periodic":
            if self.b_lower is not None or self.b_upper is not None:
                raise InitialConditionError("periodic conditions carry no tangents")
        else:
            raise InitialConditionError(f"unknown boundary condition '{self.kind}'")

    @classmethod
    def fixed_tangents(cls, b_lower, b_upper) -> "BoundaryCondition":
        return cls("fixed_tangents", b_lower, b_upper)

    @classmethod
    def periodic(cls) -> "BoundaryCondition":
        return cls("periodic")

    @property
    def is_periodic(self) -> bool:
        return self.kind == "periodic"


def arc_boundary_condition(params: ArcParams) -> BoundaryCondition:
    """Tangents of the exact arc: e2 at s = 0, b at s = angle * R."""
    return BoundaryCondition.fixed_tangents(params.lower_tangent, params.upper_tangent)


def symmetric_boundary_condition(params: ArcParams) -> BoundaryCondition:
    """Tangents of the reflection-extended arc on (-angle R, angle R)."""
    b = params.upper_tangent
    return BoundaryCondition.fixed_tangents(np.array([-b[0], b[1], 0.0]), b)


@dataclass(frozen=True)
class Observer:
    """Named scalar evaluated on the current curve and time."""

    name: str
    evaluate: Callable[[Curve, float], float]


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping settings; dt = dt_factor * spacing^2."""

    dt_factor: float = DEFAULT_DT_FACTOR
    t_final: float = 0.5
    renormalize_tangents: bool = False
    observers: Sequence[Observer] = ()
    snapshot_stride: int = 0
    observe_stride: int = 1
    bc_tolerance: float = BC_TOLERANCE

    def __post_init__(self):
        if not 0.0 < self.dt_factor <= 1.0:
            raise ValueError(f"dt_factor must lie in (0, 1], got {self.dt_factor}")
        if not self.t_final > 0.0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if self.snapshot_stride < 0 or self.observe_stride < 1:
            raise ValueError("strides must be positive (snapshot_stride 0 keeps only ends)")
        names = [observer.name for observer in self.observers]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate observer names in {names}")

    def time_step(self, spacing: float) -> tuple[float, int]:
        """Step size not exceeding dt_factor * spacing^2 that lands on t_final."""
        n_steps = max(1, math.ceil(self.t_final / (self.dt_factor * spacing**2) - 1e-9))
        return self.t_final / n_steps, n_steps

    def to_dict(self) -> dict:
        return {
            "dt_factor": self.dt_factor,
            "t_final": self.t_final,
            "renormalize_tangents": self.renormalize_tangents,
            "snapshot_stride": self.snapshot_stride,
            "observe_stride": self.observe_stride,
            "bc_tolerance": self.bc_tolerance,
            "observers": [observer.name for observer in self.observers],
        }


@dataclass
class Trajectory:
    """Observer channels on sample times plus curve snapshots."""

    times: np.ndarray
    channels: dict[str, np.ndarray]
    snapshot_times: np.ndarray
    snapshots: list[Curve]
    steps: int = 0
    dt: float = 0.0
    wall_time: float = 0.0

    def __post_init__(self):
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must increase strictly")
        for name, values in self.channels.items():
            if values.shape != self.times.shape:
                raise ValueError(
                    f"channel '{name}' has {values.size} values for {self.times.size} times"
                )

    @property
    def initial(self) -> Curve:
        return self.snapshots[0]

    @property
    def final(self) -> Curve:
        return self.snapshots[-1]

    def channel(self, name: str) -> np.ndarray:
        return self.channels[name]


# =============================================================================
# Right-hand side
# =============================================================================


def _rhs(points: np.ndarray, spacing: float, bc: BoundaryCondition) -> np.ndarray:
    if bc.is_periodic:
        ahead = np.roll(points, -1, axis=0)
        behind = np.roll(points, 1, axis=0)
        tangent = (ahead - behind) / (2.0 * spacing)
        curvature = (ahead - 2.0 * points + behind) / spacing**2
        return np.cross(tangent, curvature)

    ahead = np.empty_like(points)
    behind = np.empty_like(points)
    ahead[:-1] = points[1:]
    behind[1:] = points[:-1]
    behind[0] = points[1] - 2.0 * spacing * bc.b_lower
    ahead[-1] = points[-2] + 2.0 * spacing * bc.b_upper

    tangent = (ahead - behind) / (2.0 * spacing)
    tangent[0] = bc.b_lower
    tangent[-1] = bc.b_upper
    curvature = (ahead - 2.0 * points + behind) / spacing**2
    return np.cross(tangent, curvature)


def _check_grid(grid: Grid, bc: BoundaryCondition):
    if grid.is_periodic != bc.is_periodic:
        raise GridError(f"{bc.kind} boundary condition on a {grid.kind} grid")


def lie_rhs(curve: Curve, bc: BoundaryCondition) -> VectorField:
    """
    Discrete velocity x_s x x_ss of every node.

    Args:
        curve: Current filament
        bc: Boundary condition matching the curve's grid

    Returns:
        Velocity field
    """
    _check_grid(curve.grid, bc)
    return VectorField(curve.grid, _rhs(curve.points, curve.grid.spacing, bc))


# =============================================================================
# Stepping
# =============================================================================


def chord_lengths(points: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.diff(points, axis=0), axis=1)


def renormalize_chords(points: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Rescale chords to their reference lengths, re-accumulating from node 0."""
    chords = np.diff(points, axis=0)
    chords *= (reference / np.linalg.norm(chords, axis=1))[:, None]
    out = np.empty_like(points)
    out[0] = points[0]
    out[1:] = points[0] + np.cumsum(chords, axis=0)
    return out


def _rk4(points: np.ndarray, spacing: float, bc: BoundaryCondition, dt: float) -> np.ndarray:
    k1 = _rhs(points, spacing, bc)
    k2 = _rhs(points + 0.5 * dt * k1, spacing, bc)
    k3 = _rhs(points + 0.5 * dt * k2, spacing, bc)
    k4 = _rhs(points + dt * k3, spacing, bc)
    return points + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(
    curve: Curve,
    bc: BoundaryCondition,
    dt: float,
    *,
    reference_chords: np.ndarray | None = None,
    step_index: int = 0,
) -> Curve:
    """
    Advance one classical Runge-Kutta step.

    Args:
        curve: Current filament
        bc: Boundary condition
        dt: Step size, at most spacing^2 for stability
        reference_chords: When given, chords are rescaled to these lengths
            after the step (tangent renormalization)
        step_index: Index reported if the step blows up

    Returns:
        The advanced curve
    """
    _check_grid(curve.grid, bc)
    points = _rk4(curve.points, curve.grid.spacing, bc, dt)
    if not np.all(np.isfinite(points)):
        raise BlowUpError(step_index, (step_index + 1) * dt)
    if reference_chords is not None:
        points = renormalize_chords(points, reference_chords)
    return Curve(curve.grid, points)


# =============================================================================
# Diagnostics shared with observers
# =============================================================================


def boundary_tangent_residual(curve: Curve, bc: BoundaryCondition) -> float:
    """
    One-sided end tangents of the curve against the prescribed ones, in
    excess of the stencil slack. Zero on periodic grids.
    """
    if bc.is_periodic:
        return 0.0
    mismatch, slack = end_tangent_mismatch(curve, bc)
    return max(0.0, mismatch - slack)


def arclength_defect(curve: Curve, reference_chords: np.ndarray) -> float:
    """Max relative change of chord lengths against a reference."""
    return float(np.max(np.abs(chord_lengths(curve.points) / reference_chords - 1.0)))


def end_tangent_mismatch(curve: Curve, bc: BoundaryCondition) -> tuple[float, float]:
    """
    One-sided discrete tangents at both ends against the prescribed ones,
    together with the stencil slack h^2 |x_sss| / 3 of the estimate.
    """
    grid = curve.grid
    tangent = differentiate(curve.points, grid, 1)
    third = differentiate(curve.points, grid, 3)
    mismatch = max(
        np.linalg.norm(tangent[0] - bc.b_lower), np.linalg.norm(tangent[-1] - bc.b_upper)
    )
    slack = grid.spacing**2 * max(np.linalg.norm(third[0]), np.linalg.norm(third[-1]))
    return float(mismatch), float(slack)


def compatibility_residual(curve: Curve, bc: BoundaryCondition) -> float:
    """Max of |b x x_sss| over both ends."""
    third = differentiate(curve.points, curve.grid, 3)
    return float(
        max(
            np.linalg.norm(np.cross(bc.b_lower, third[0])),
            np.linalg.norm(np.cross(bc.b_upper, third[-1])),
        )
    )


def arclength_observer(initial: Curve) -> Observer:
    reference = chord_lengths(initial.points)
    return Observer("arclength", lambda curve, t: arclength_defect(curve, reference))


def tangent_residual_observer(bc: BoundaryCondition) -> Observer:
    return Observer("tangent_residual", lambda curve, t: boundary_tangent_residual(curve, bc))


def _check_initial(initial: Curve, bc: BoundaryCondition, config: SolverConfig):
    if bc.is_periodic:
        return
    mismatch, slack = end_tangent_mismatch(initial, bc)
    if mismatch > config.bc_tolerance + slack:
        raise InitialConditionError(
            f"initial end tangents differ from the boundary data by {mismatch:.3e}"
        )
    residual = compatibility_residual(initial, bc)
    fourth = differentiate(initial.points, initial.grid, 4)
    slack = initial.grid.spacing * max(np.linalg.norm(fourth[0]), np.linalg.norm(fourth[-1]))
    if residual > COMPATIBILITY_TOLERANCE + slack:
        logger.warning(f"First-order compatibility residual {residual:.3e} at the ends")


# =============================================================================
# Simulation
# =============================================================================


def simulate(initial: Curve, bc: BoundaryCondition, config: SolverConfig) -> Trajectory:
    """
    Integrate the filament up to config.t_final.

    Observers are evaluated on the initial curve and then every
    ``observe_stride`` steps (always including the last step). Snapshots are
    kept every ``snapshot_stride`` steps, plus the initial and final curves.

    Args:
        initial: Initial filament
        bc: Boundary condition
        config: Solver settings

    Returns:
        Trajectory with channels, snapshots and step statistics
    """
    grid = initial.grid
    _check_grid(grid, bc)
    _check_initial(initial, bc, config)

    dt, n_steps = config.time_step(grid.spacing)
    reference = chord_lengths(initial.points) if config.renormalize_tangents else None
    logger.debug(f"Simulating {n_steps} steps of dt={dt:.3e} on {grid.n_nodes} nodes")

    times: list[float] = []
    channels: dict[str, list[float]] = {observer.name: [] for observer in config.observers}
    snapshot_times = [0.0]
    snapshots = [initial]

    def observe(curve: Curve, t: float):
        times.append(t)
        for observer in config.observers:
            channels[observer.name].append(float(observer.evaluate(curve, t)))

    started = _time.perf_counter()
    observe(initial, 0.0)
    points = initial.points
    progress = max(1, n_steps // 10)
    for index in range(n_steps):
        points = _rk4(points, grid.spacing, bc, dt)
        if not np.all(np.isfinite(points)):
            raise BlowUpError(index, (index + 1) * dt)
        if reference is not None:
            points = renormalize_chords(points, reference)

        t = (index + 1) * dt
        last = index == n_steps - 1
        observed = (index + 1) % config.observe_stride == 0 or last
        kept = last or (config.snapshot_stride and (index + 1) % config.snapshot_stride == 0)
        if observed or kept:
            curve = Curve(grid, points)
            if observed:
                observe(curve, t)
            if kept:
                snapshot_times.append(t)
                snapshots.append(curve)
        if (index + 1) % progress == 0:
            logger.debug(f"Step {index + 1}/{n_steps} (t={t:.4g})")

    return Trajectory(
        times=np.asarray(times),
        channels={name: np.asarray(values) for name, values in channels.items()},
        snapshot_times=np.asarray(snapshot_times),
        snapshots=snapshots,
        steps=n_steps,
        dt=dt,
        wall_time=_time.perf_counter() - started,
    )

