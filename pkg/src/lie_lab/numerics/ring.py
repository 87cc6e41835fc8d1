"""
LIE Ring - Closed filaments, k-reflective data and segmentation.

This module provides the breakpoint layout of a ring, the k-reflective
check on ring perturbations, the looped and random reflective perturbation
families, and the segmented solve that replaces one periodic problem by k
independent arc problems with fixed end tangents.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..constants import REFLECTIVITY_TOLERANCE, UNIT_TOLERANCE
from ..errors import DegenerateInputError, GridError, ReflectivityError
from .geometry import (
    ArcParams,
    Curve,
    Grid,
    VectorField,
    differentiate,
    exact_arc_tangents,
    radius_of,
    rotation_about_e3,
    sample_exact_arc,
)
from .perturbations import (
    Perturbation,
    PerturbationSpec,
    circle_jets,
    perturbation_from_arrays,
    smooth_random,
)
from .solver import BoundaryCondition, SolverConfig, Trajectory, simulate

logger = logging.getLogger("lie-lab.ring")


# =============================================================================
# Segmentation
# =============================================================================


@dataclass(frozen=True, eq=False)
class Segmentation:
    """
    Split of a ring of radius R into k arcs of equal length.

    Breakpoints sit on grid nodes: s_j = (offset_nodes + j N/k) h. The arc
    between s_j and s_(j+1) carries the circle tangents b^j and b^(j+1) as
    its end tangents.
    """

    k: int
    radius: float
    grid: Grid
    offset_nodes: int = 0

    def __post_init__(self):
        if not self.grid.is_periodic:
            raise GridError("segmentation needs a periodic grid")
        if self.k < 3:
            raise ReflectivityError(f"k must be at least 3, got {self.k}")
        if self.grid.n_nodes % self.k:
            raise ReflectivityError(
                f"k = {self.k} does not divide the node count {self.grid.n_nodes}"
            )
        circumference = 2.0 * np.pi * radius_of(self.radius)
        if abs(self.grid.length - circumference) > UNIT_TOLERANCE * max(1.0, circumference):
            raise GridError(f"grid length {self.grid.length} differs from 2 pi R = {circumference}")
        object.__setattr__(self, "offset_nodes", int(self.offset_nodes) % self.grid.n_nodes)

    @property
    def nodes_per_segment(self) -> int:
        return self.grid.n_nodes // self.k

    @property
    def segment_length(self) -> float:
        return self.grid.length / self.k

    @property
    def breakpoint_nodes(self) -> np.ndarray:
        m = self.nodes_per_segment
        return (self.offset_nodes + m * np.arange(self.k)) % self.grid.n_nodes

    @property
    def breakpoints(self) -> np.ndarray:
        return self.grid.spacing * self.breakpoint_nodes

    @property
    def tangents(self) -> np.ndarray:
        """b^j = (-sin(s_j/R), cos(s_j/R), 0) for every breakpoint."""
        return exact_arc_tangents(self.radius, self.breakpoints)

    @property
    def segment_params(self) -> ArcParams:
        return ArcParams(self.radius, 2.0 * np.pi / self.k)

    def segment_indices(self, j: int) -> np.ndarray:
        """Ring node indices of segment j, both breakpoints included."""
        start = self.breakpoint_nodes[j % self.k]
        return (start + np.arange(self.nodes_per_segment + 1)) % self.grid.n_nodes

    def segment_grid(self, j: int) -> Grid:
        return Grid.interval(
            self.segment_length, self.nodes_per_segment + 1, origin=self.breakpoints[j % self.k]
        )

    def boundary_condition(self, j: int) -> BoundaryCondition:
        tangents = self.tangents
        return BoundaryCondition.fixed_tangents(tangents[j % self.k], tangents[(j + 1) % self.k])

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "radius": self.radius,
            "n_nodes": self.grid.n_nodes,
            "offset_nodes": self.offset_nodes,
            "breakpoints": self.breakpoints.tolist(),
        }


# =============================================================================
# k-reflective property
# =============================================================================


@dataclass
class ReflectivityReport:
    """Residuals of the k-reflective conditions, one entry per breakpoint."""

    k: int
    tangent_residuals: np.ndarray
    reflection_residuals: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(max(self.tangent_residuals.max(), self.reflection_residuals.max()))

    def passes(self, tolerance: float = REFLECTIVITY_TOLERANCE) -> bool:
        return self.max_residual <= tolerance

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "tangent_residuals": self.tangent_residuals.tolist(),
            "reflection_residuals": self.reflection_residuals.tolist(),
            "max_residual": self.max_residual,
        }


def _reflect_across(vectors: np.ndarray, normal: np.ndarray) -> np.ndarray:
    return vectors - 2.0 * np.outer(vectors @ normal, normal)


def check_k_reflective(
    phi0: VectorField, k: int, radius: float, offset_nodes: int = 0
) -> ReflectivityReport:
    """
    Check a ring perturbation for the k-reflective property.

    Condition (i) asks phi0_s to vanish at every breakpoint; condition (ii)
    asks phi0 on the two segments meeting at s_j to be mirror images across
    the plane normal to b^j.

    Args:
        phi0: Perturbation on a periodic grid of circumference 2 pi R
        k: Number of segments
        radius: Ring radius R
        offset_nodes: Node index of the first breakpoint

    Returns:
        ReflectivityReport with one residual of each kind per breakpoint
    """
    segmentation = Segmentation(k, radius, phi0.grid, offset_nodes)
    n, m = phi0.grid.n_nodes, segmentation.nodes_per_segment
    values = phi0.vectors
    if isinstance(phi0, Perturbation) and phi0.slope is not None:
        slope = phi0.slope.vectors
    else:
        slope = differentiate(values, phi0.grid, 1)

    offsets = np.arange(m + 1)
    tangent_residuals = np.empty(k)
    reflection_residuals = np.empty(k)
    for j, (node, normal) in enumerate(zip(segmentation.breakpoint_nodes, segmentation.tangents)):
        tangent_residuals[j] = np.linalg.norm(slope[node])
        below = values[(node - offsets) % n]
        above = values[(node + offsets) % n]
        gap = below - _reflect_across(above, normal)
        reflection_residuals[j] = np.max(np.linalg.norm(gap, axis=1))
    return ReflectivityReport(k, tangent_residuals, reflection_residuals)


# =============================================================================
# Ring perturbations
# =============================================================================


def _check_ring_grid(radius: float, grid: Grid):
    circumference = 2.0 * np.pi * radius
    if not grid.is_periodic:
        raise GridError("ring perturbations live on a periodic grid")
    if abs(grid.length - circumference) > UNIT_TOLERANCE * max(1.0, circumference):
        raise GridError(f"grid length {grid.length} differs from 2 pi R = {circumference}")


def ring_looped(n: int, radius: float, grid: Grid) -> Perturbation:
    """
    Perturbation winding the ring n times on a circle of radius R/n.

    It is k-reflective for every k >= 3 dividing n - 1.
    """
    if n < 2:
        raise DegenerateInputError(f"n must be at least 2, got {n}")
    radius = radius_of(radius)
    _check_ring_grid(radius, grid)
    s = grid.nodes
    looped = circle_jets(radius / n, s)
    circle = circle_jets(radius, s)
    values, slope, curvature, third = (a - b for a, b in zip(looped, circle))
    spec = PerturbationSpec("ring_looped", n=n)
    return perturbation_from_arrays(spec, grid, values, slope, curvature, third)


def ring_growth_rate(n: int, radius: float) -> float:
    """Axial separation speed 1/R_n - 1/R = (n - 1)/R of ring_looped(n)."""
    return (n - 1) / radius


def reflective_random(
    seed: int, amplitude: float, margin: float, k: int, radius: float, grid: Grid
) -> Perturbation:
    """
    Random k-reflective ring perturbation.

    A symmetric random perturbation of the arc of angle 2 pi / k is drawn
    once and placed, rotated, on every segment. Its support stays away from
    the segment ends, so the slope vanishes at the breakpoints and adjacent
    copies are mirror images across the planes normal to b^j.
    """
    radius = radius_of(radius)
    _check_ring_grid(radius, grid)
    segmentation = Segmentation(k, radius, grid)
    m = segmentation.nodes_per_segment
    local = smooth_random(
        seed,
        amplitude,
        margin,
        segmentation.segment_params,
        Grid.interval(segmentation.segment_length, m + 1),
        symmetric=True,
    )
    jets = [local.vectors, local.slope.vectors, local.curvature.vectors, local.third.vectors]
    assembled = [np.empty((grid.n_nodes, 3)) for _ in jets]
    for j in range(k):
        rotation = rotation_about_e3(segmentation.breakpoints[j] / radius)
        owned = segmentation.segment_indices(j)[:-1]
        for target, jet in zip(assembled, jets):
            target[owned] = jet[:-1] @ rotation.T

    spec = PerturbationSpec(
        "reflective_random", seed=seed, amplitude=amplitude, margin=margin, k=k, symmetric=True
    )
    return perturbation_from_arrays(spec, grid, *assembled)


# =============================================================================
# Segmented solve
# =============================================================================


@dataclass
class SegmentedSolution:
    """Segment trajectories, their assembly and the direct periodic solve."""

    segmentation: Segmentation
    reflectivity: ReflectivityReport
    segments: list[Trajectory]
    assembled: Trajectory
    periodic: Trajectory
    mismatch: float = 0.0
    interface_gap: float = 0.0
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "segmentation": self.segmentation.to_dict(),
            "reflectivity": self.reflectivity.to_dict(),
            "mismatch": self.mismatch,
            "interface_gap": self.interface_gap,
            "warnings": list(self.warnings),
        }


def _solve_segment(curve: Curve, bc: BoundaryCondition, config: SolverConfig) -> Trajectory:
    return simulate(curve, bc, config)


def segment_and_solve(
    x0: Curve,
    k: int,
    config: SolverConfig,
    radius: float,
    offset_nodes: int = 0,
    workers: int = 1,
    tolerance: float = REFLECTIVITY_TOLERANCE,
    phi0: VectorField | None = None,
) -> SegmentedSolution:
    """
    Solve a ring as k independent arc problems and compare with the periodic solve.

    Each segment evolves under its own fixed end tangents b^j, b^(j+1).
    Snapshots of the segments are concatenated on the shared snapshot
    times; the last node of every segment is dropped in favour of the first
    node of the next one, and the difference between the two is reported as
    the interface gap.

    Args:
        x0: Initial ring on a periodic grid of circumference 2 pi R
        k: Number of segments
        config: Solver settings; observers apply to the periodic solve only
        radius: Ring radius R
        offset_nodes: Node index of the first breakpoint
        workers: Process pool size for the segment solves (1 = sequential)
        tolerance: Acceptance level of the k-reflective check
        phi0: The perturbation x0 - x^R with exact derivatives, when known;
            its slope then replaces stencil slopes in the k-reflective check

    Returns:
        SegmentedSolution

    Raises:
        ReflectivityError: If x0 - x^R fails the k-reflective check
    """
    segmentation = Segmentation(k, radius, x0.grid, offset_nodes)
    if phi0 is None:
        phi0 = x0 - sample_exact_arc(radius, 0.0, x0.grid)
    elif phi0.grid != x0.grid:
        raise GridError("phi0 and x0 live on different grids")
    report = check_k_reflective(phi0, k, radius, offset_nodes)
    if not report.passes(tolerance):
        raise ReflectivityError(
            f"initial ring is not {k}-reflective: residual {report.max_residual:.3e} "
            f"exceeds {tolerance:.1e}"
        )

    segment_config = replace(config, observers=())
    jobs = []
    for j in range(k):
        indices = segmentation.segment_indices(j)
        curve = Curve(segmentation.segment_grid(j), x0.points[indices])
        jobs.append((curve, segmentation.boundary_condition(j)))

    logger.info(f"Solving {k} ring segments with {workers} worker(s)")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_solve_segment, c, bc, segment_config) for c, bc in jobs]
            segments = [future.result() for future in futures]
    else:
        segments = [_solve_segment(c, bc, segment_config) for c, bc in jobs]
    periodic = simulate(x0, BoundaryCondition.periodic(), config)

    snapshot_times = periodic.snapshot_times
    assembled_snapshots: list[Curve] = []
    mismatches, gaps = [], []
    for index in range(snapshot_times.size):
        points = np.empty_like(x0.points)
        gap = 0.0
        for j, trajectory in enumerate(segments):
            local = trajectory.snapshots[index].points
            points[segmentation.segment_indices(j)[:-1]] = local[:-1]
            following = segments[(j + 1) % k].snapshots[index].points[0]
            gap = max(gap, float(np.linalg.norm(local[-1] - following)))
        curve = Curve(x0.grid, points)
        assembled_snapshots.append(curve)
        mismatches.append(float(np.max(np.abs(points - periodic.snapshots[index].points))))
        gaps.append(gap)

    assembled = Trajectory(
        times=snapshot_times.copy(),
        channels={"mismatch": np.array(mismatches), "interface_gap": np.array(gaps)},
        snapshot_times=snapshot_times.copy(),
        snapshots=assembled_snapshots,
        steps=periodic.steps,
        dt=periodic.dt,
        wall_time=sum(t.wall_time for t in segments),
    )
    solution = SegmentedSolution(
        segmentation, report, segments, assembled, periodic, max(mismatches), max(gaps)
    )
    if solution.interface_gap > tolerance:
        message = f"Segment interface gap {solution.interface_gap:.3e} exceeds {tolerance:.1e}"
        logger.warning(message)
        solution.warnings.append(message)
    logger.info(
        f"Segmented solve: mismatch {solution.mismatch:.3e}, gap {solution.interface_gap:.3e}"
    )
    return solution
