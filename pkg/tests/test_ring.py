"""
Test suite for LIE rings.

Tests segmentation layout, the k-reflective check, the ring perturbation
families and the segmented solve.
"""

import math

import numpy as np
import pytest

from lie_lab.errors import DegenerateInputError, GridError, ReflectivityError
from lie_lab.numerics.geometry import Grid, VectorField, sample_exact_arc
from lie_lab.numerics.ring import (
    Segmentation,
    check_k_reflective,
    reflective_random,
    ring_growth_rate,
    ring_looped,
    segment_and_solve,
)
from lie_lab.numerics.solver import SolverConfig


@pytest.fixture
def grid():
    return Grid.periodic(2 * math.pi, 96)


class TestSegmentation:
    """Test breakpoint layout."""

    def test_layout(self, grid):
        """Four segments of 24 nodes with breakpoints on nodes."""
        segmentation = Segmentation(4, 1.0, grid)
        assert segmentation.nodes_per_segment == 24
        assert segmentation.segment_length == pytest.approx(math.pi / 2)
        np.testing.assert_array_equal(segmentation.breakpoint_nodes, [0, 24, 48, 72])
        assert segmentation.segment_params.angle == pytest.approx(math.pi / 2)

    def test_offset_wraps(self, grid):
        """Offsets wrap around the ring."""
        segmentation = Segmentation(4, 1.0, grid, offset_nodes=100)
        assert segmentation.offset_nodes == 4
        assert segmentation.breakpoint_nodes[-1] == 76

    def test_segment_indices_wrap(self, grid):
        """The last segment ends on node 0."""
        segmentation = Segmentation(3, 1.0, grid, offset_nodes=5)
        indices = segmentation.segment_indices(2)
        assert indices[0] == 69
        assert indices[-1] == 5

    def test_segment_grid(self, grid):
        """Segment grids start at their breakpoint."""
        segmentation = Segmentation(4, 1.0, grid)
        segment = segmentation.segment_grid(1)
        assert segment.n_nodes == 25
        assert segment.origin == pytest.approx(math.pi / 2)
        assert segment.spacing == pytest.approx(grid.spacing)

    def test_boundary_tangents(self, grid):
        """Segment j carries b^j and b^(j+1)."""
        bc = Segmentation(4, 1.0, grid).boundary_condition(3)
        np.testing.assert_allclose(bc.b_lower, [1.0, 0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(bc.b_upper, [0.0, 1.0, 0.0], atol=1e-12)

    @pytest.mark.parametrize("k", [1, 2])
    def test_k_too_small(self, grid, k):
        """At least three segments are needed."""
        with pytest.raises(ReflectivityError):
            Segmentation(k, 1.0, grid)

    def test_k_must_divide(self, grid):
        """k must divide the node count."""
        with pytest.raises(ReflectivityError):
            Segmentation(5, 1.0, grid)

    def test_needs_periodic_grid(self):
        """Segmentation is defined on rings only."""
        with pytest.raises(GridError):
            Segmentation(4, 1.0, Grid.interval(2 * math.pi, 96))

    def test_wrong_circumference(self, grid):
        """The grid must match the radius."""
        with pytest.raises(GridError):
            Segmentation(4, 2.0, grid)


class TestReflectivity:
    """Test the k-reflective check."""

    def test_unperturbed_ring(self, grid):
        """phi = 0 is k-reflective for every admissible k."""
        for k in (3, 4, 6, 8):
            assert check_k_reflective(VectorField.zeros(grid), k, 1.0).passes()

    def test_looped_ring(self, grid):
        """ring_looped(4) is 3-reflective."""
        phi = ring_looped(4, 1.0, grid)
        report = check_k_reflective(phi, 3, 1.0)
        assert report.passes(), report.to_dict()
        assert report.tangent_residuals.shape == (3,)

    @pytest.mark.parametrize("n,k", [(2, 3), (2, 4), (4, 4)])
    def test_looped_ring_not_reflective(self, grid, n, k):
        """ring_looped(n) fails when k does not divide n - 1."""
        assert not check_k_reflective(ring_looped(n, 1.0, grid), k, 1.0).passes()

    def test_reflective_random(self, grid):
        """Random reflective draws pass their own check."""
        phi = reflective_random(3, 0.05, 0.1, 4, 1.0, grid)
        assert phi.spec.k == 4
        assert check_k_reflective(phi, 4, 1.0).passes(1e-10)
        assert np.max(np.abs(phi.vectors)) > 0.0

    def test_random_field_not_reflective(self, grid):
        """A generic field fails the check."""
        rng = np.random.default_rng(0)
        field = VectorField(grid, 1e-2 * rng.normal(size=(96, 3)))
        assert not check_k_reflective(field, 4, 1.0).passes()


class TestRingLooped:
    """Test looped ring perturbations."""

    def test_growth_rate(self):
        """Rate (n - 1)/R."""
        assert ring_growth_rate(3, 2.0) == pytest.approx(1.0)

    def test_looped_circle(self, grid):
        """The perturbed ring lies on the circle of radius R/n."""
        phi = ring_looped(3, 1.0, grid)
        curve = sample_exact_arc(1.0, 0.0, grid) + phi
        np.testing.assert_allclose(np.linalg.norm(curve.points, axis=1), 1.0 / 3)

    def test_n_at_least_two(self, grid):
        """n = 1 is the ring itself."""
        with pytest.raises(DegenerateInputError):
            ring_looped(1, 1.0, grid)

    def test_wrong_grid(self):
        """Ring perturbations need the ring circumference."""
        with pytest.raises(GridError):
            ring_looped(2, 1.0, Grid.periodic(1.0, 96))


class TestSegmentAndSolve:
    """Test the segmented ring solve."""

    def test_unperturbed_ring(self):
        """Segments reassemble the periodic solution up to O(h^2)."""
        grid = Grid.periodic(2 * math.pi, 48)
        x0 = sample_exact_arc(1.0, 0.0, grid)
        config = SolverConfig(t_final=0.01, snapshot_stride=5)
        solution = segment_and_solve(x0, 3, config, 1.0)
        assert len(solution.segments) == 3
        assert len(solution.assembled.snapshots) == len(solution.periodic.snapshots)
        assert solution.mismatch < grid.spacing**2
        assert solution.interface_gap < 1e-12
        assert solution.assembled.channel("mismatch")[0] == 0.0
        assert not solution.warnings

    def test_exact_slopes(self):
        """Exact perturbation slopes drive the reflectivity check."""
        grid = Grid.periodic(2 * math.pi, 48)
        phi0 = ring_looped(4, 1.0, grid)
        x0 = sample_exact_arc(1.0, 0.0, grid) + phi0
        solution = segment_and_solve(x0, 3, SolverConfig(t_final=1e-3), 1.0, phi0=phi0)
        assert solution.reflectivity.passes()
        assert solution.to_dict()["segmentation"]["k"] == 3

    def test_not_reflective(self):
        """Non-reflective data are refused before solving."""
        grid = Grid.periodic(2 * math.pi, 48)
        phi0 = ring_looped(2, 1.0, grid)
        x0 = sample_exact_arc(1.0, 0.0, grid) + phi0
        with pytest.raises(ReflectivityError):
            segment_and_solve(x0, 3, SolverConfig(t_final=1e-3), 1.0, phi0=phi0)

    def test_phi0_grid_mismatch(self):
        """phi0 must live on the ring grid."""
        grid = Grid.periodic(2 * math.pi, 48)
        x0 = sample_exact_arc(1.0, 0.0, grid)
        other = VectorField.zeros(Grid.periodic(2 * math.pi, 96))
        with pytest.raises(GridError):
            segment_and_solve(x0, 3, SolverConfig(t_final=1e-3), 1.0, phi0=other)
