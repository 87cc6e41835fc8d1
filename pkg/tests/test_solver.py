"""
Test suite for the LIE solver.

Tests boundary conditions, step-size selection and short runs against the
exact translating arc and ring.
"""

import math

import numpy as np
import pytest

from lie_lab.errors import BlowUpError, GridError, InitialConditionError
from lie_lab.numerics.geometry import ArcParams, Curve, Grid, reflect_T, sample_exact_arc
from lie_lab.numerics.solver import (
    BoundaryCondition,
    Observer,
    SolverConfig,
    Trajectory,
    arc_boundary_condition,
    arclength_observer,
    boundary_tangent_residual,
    lie_rhs,
    simulate,
    step,
    symmetric_boundary_condition,
    tangent_residual_observer,
)


@pytest.fixture
def params():
    return ArcParams(1.0, math.pi / 2)


class TestBoundaryCondition:
    """Test boundary condition validation."""

    def test_arc_tangents(self, params):
        """Arc conditions carry e2 and b."""
        bc = arc_boundary_condition(params)
        np.testing.assert_allclose(bc.b_lower, [0.0, 1.0, 0.0])
        np.testing.assert_allclose(bc.b_upper, params.upper_tangent)

    def test_non_unit_tangent(self):
        """Tangents must have unit length."""
        with pytest.raises(InitialConditionError):
            BoundaryCondition.fixed_tangents([0.0, 2.0, 0.0], [1.0, 0.0, 0.0])

    def test_periodic_without_tangents(self):
        """Periodic conditions reject tangents."""
        assert BoundaryCondition.periodic().is_periodic
        with pytest.raises(InitialConditionError):
            BoundaryCondition("periodic", b_lower=[0.0, 1.0, 0.0])

    def test_unknown_kind(self):
        """Unknown kinds are rejected."""
        with pytest.raises(InitialConditionError):
            BoundaryCondition("clamped")

    def test_symmetric_tangents(self, params):
        """The extended arc starts with the mirrored end tangent."""
        bc = symmetric_boundary_condition(params)
        np.testing.assert_allclose(bc.b_lower, [1.0, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(bc.b_upper, [-1.0, 0.0, 0.0], atol=1e-15)

    def test_grid_kind_mismatch(self, params):
        """Periodic conditions need periodic grids."""
        curve = sample_exact_arc(params, 0.0, params.grid(33))
        with pytest.raises(GridError):
            lie_rhs(curve, BoundaryCondition.periodic())


class TestSolverConfig:
    """Test solver settings."""

    def test_time_step_lands_on_final_time(self):
        """n_steps * dt == t_final with dt <= dt_factor h^2."""
        config = SolverConfig(dt_factor=0.25, t_final=0.1)
        dt, n_steps = config.time_step(0.05)
        assert dt <= 0.25 * 0.05**2 * (1 + 1e-12)
        assert n_steps * dt == pytest.approx(0.1)

    def test_time_step_exact_division(self):
        """No extra step when t_final is a multiple of the bound."""
        dt, n_steps = SolverConfig(dt_factor=0.5, t_final=1.0).time_step(0.5)
        assert n_steps == 8
        assert dt == pytest.approx(0.125)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"dt_factor": 0.0},
            {"dt_factor": 1.5},
            {"t_final": 0.0},
            {"observe_stride": 0},
            {"snapshot_stride": -1},
        ],
    )
    def test_invalid(self, kwargs):
        """Invalid settings raise ValueError."""
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)

    def test_duplicate_observers(self):
        """Observer names must be unique."""
        observer = Observer("x", lambda curve, t: 0.0)
        with pytest.raises(ValueError):
            SolverConfig(observers=(observer, observer))

    def test_to_dict(self):
        """Observers are reported by name."""
        config = SolverConfig(observers=(Observer("x", lambda curve, t: 0.0),))
        assert config.to_dict()["observers"] == ["x"]


class TestRightHandSide:
    """Test the discrete velocity."""

    def test_arc_translates_along_e3(self, params):
        """The exact arc moves with velocity e3 / R up to O(h^2)."""
        grid = params.grid(65)
        velocity = lie_rhs(sample_exact_arc(params, 0.0, grid), arc_boundary_condition(params))
        expected = np.tile([0.0, 0.0, 1.0], (65, 1))
        np.testing.assert_allclose(velocity.vectors, expected, atol=grid.spacing**2)

    def test_ring_translates(self):
        """A ring of radius 2 moves with speed 1/2."""
        grid = Grid.periodic(4 * math.pi, 64)
        velocity = lie_rhs(sample_exact_arc(2.0, 0.0, grid), BoundaryCondition.periodic())
        np.testing.assert_allclose(velocity.vectors[:, :2], 0.0, atol=1e-12)
        np.testing.assert_allclose(velocity.vectors[:, 2], 0.5, rtol=grid.spacing**2)

    def test_end_velocity_orthogonal_to_tangent(self, params):
        """b x x_ss is orthogonal to b at both ends."""
        grid = params.grid(33)
        rng = np.random.default_rng(1)
        curve = sample_exact_arc(params, 0.0, grid) + 1e-3 * rng.normal(size=(33, 3))
        bc = arc_boundary_condition(params)
        velocity = lie_rhs(curve, bc).vectors
        assert abs(velocity[0] @ bc.b_lower) < 1e-12
        assert abs(velocity[-1] @ bc.b_upper) < 1e-12

    def test_reflection_commutes_with_rhs(self, params):
        """On the extended arc, rhs(T x) = T rhs(x) for any curve."""
        grid = params.symmetric_grid(65)
        rng = np.random.default_rng(5)
        curve = sample_exact_arc(params, 0.0, grid) + 1e-2 * rng.normal(size=(65, 3))
        bc = symmetric_boundary_condition(params)
        reflected_first = lie_rhs(reflect_T(curve), bc).vectors
        reflected_after = reflect_T(lie_rhs(curve, bc)).vectors
        np.testing.assert_allclose(reflected_first, reflected_after, atol=1e-9)

    def test_reflection_commutes_with_step(self, params):
        """One RK4 step of T x is T of one step of x."""
        grid = params.symmetric_grid(33)
        rng = np.random.default_rng(6)
        curve = sample_exact_arc(params, 0.0, grid) + 1e-2 * rng.normal(size=(33, 3))
        bc = symmetric_boundary_condition(params)
        dt = 0.25 * grid.spacing**2
        stepped_first = step(reflect_T(curve), bc, dt).points
        stepped_after = reflect_T(step(curve, bc, dt)).points
        np.testing.assert_allclose(stepped_first, stepped_after, atol=1e-12)


class TestTangentResidual:
    """Test the end tangent diagnostic."""

    def test_exact_arc(self, params):
        """Stencil error of the exact arc stays within the slack."""
        curve = sample_exact_arc(params, 0.0, params.grid(65))
        assert boundary_tangent_residual(curve, arc_boundary_condition(params)) == 0.0

    def test_wrong_tangents(self, params):
        """Tangents that disagree with the curve leave a residual of order one."""
        curve = sample_exact_arc(params, 0.0, params.grid(65))
        bc = BoundaryCondition.fixed_tangents([1.0, 0.0, 0.0], params.upper_tangent)
        residual = boundary_tangent_residual(curve, bc)
        assert residual == pytest.approx(math.sqrt(2.0), abs=1e-2)

    def test_periodic(self):
        """Closed filaments have no end tangents."""
        grid = Grid.periodic(2 * math.pi, 32)
        curve = sample_exact_arc(1.0, 0.0, grid)
        assert boundary_tangent_residual(curve, BoundaryCondition.periodic()) == 0.0

    def test_observer_channel(self, params):
        """The observer reports the residual along a run and flags wrong tangents."""
        grid = params.grid(33)
        initial = sample_exact_arc(params, 0.0, grid)
        bc = arc_boundary_condition(params)
        config = SolverConfig(t_final=0.02, observers=(tangent_residual_observer(bc),))
        trajectory = simulate(initial, bc, config)
        assert np.max(trajectory.channel("tangent_residual")) < grid.spacing
        wrong = BoundaryCondition.fixed_tangents([1.0, 0.0, 0.0], params.upper_tangent)
        assert tangent_residual_observer(wrong).evaluate(initial, 0.0) > 1.0


class TestSimulate:
    """Test the simulation loop."""

    def test_exact_arc_run(self, params):
        """A short run stays within O(h^2) of the exact solution."""
        grid = params.grid(33)
        config = SolverConfig(t_final=0.05, snapshot_stride=10)
        initial = sample_exact_arc(params, 0.0, grid)
        trajectory = simulate(initial, arc_boundary_condition(params), config)
        assert isinstance(trajectory, Trajectory)
        assert trajectory.steps * trajectory.dt == pytest.approx(0.05)
        assert trajectory.snapshot_times[0] == 0.0
        assert trajectory.snapshot_times[-1] == pytest.approx(0.05)
        exact = sample_exact_arc(params, 0.05, grid)
        error = np.max(np.abs(trajectory.final.points - exact.points))
        assert error < grid.spacing**2

    def test_observers_sampled(self, params):
        """Observers run on the initial curve and every stride."""
        grid = params.grid(17)
        config = SolverConfig(
            t_final=0.02,
            observe_stride=2,
            observers=(Observer("t", lambda curve, t: t),),
        )
        initial = sample_exact_arc(params, 0.0, grid)
        trajectory = simulate(initial, arc_boundary_condition(params), config)
        np.testing.assert_allclose(trajectory.channel("t"), trajectory.times)
        assert trajectory.times[0] == 0.0
        assert trajectory.times[-1] == pytest.approx(0.02)

    def test_arclength_preserved(self, params):
        """Chord lengths drift by O(h^2) only."""
        grid = params.grid(33)
        initial = sample_exact_arc(params, 0.0, grid)
        config = SolverConfig(t_final=0.05, observers=(arclength_observer(initial),))
        trajectory = simulate(initial, arc_boundary_condition(params), config)
        assert np.max(trajectory.channel("arclength")) < grid.spacing**2

    def test_renormalized_chords(self, params):
        """Tangent renormalization keeps chords at their initial length."""
        grid = params.grid(33)
        initial = sample_exact_arc(params, 0.0, grid)
        config = SolverConfig(
            t_final=0.02, renormalize_tangents=True, observers=(arclength_observer(initial),)
        )
        trajectory = simulate(initial, arc_boundary_condition(params), config)
        assert np.max(trajectory.channel("arclength")) < 1e-12

    def test_ring_run(self):
        """The ring translates rigidly."""
        grid = Grid.periodic(2 * math.pi, 64)
        trajectory = simulate(
            sample_exact_arc(1.0, 0.0, grid),
            BoundaryCondition.periodic(),
            SolverConfig(t_final=0.05),
        )
        final = trajectory.final.points
        np.testing.assert_allclose(np.linalg.norm(final[:, :2], axis=1), 1.0, atol=1e-6)
        np.testing.assert_allclose(final[:, 2], 0.05, rtol=grid.spacing**2)

    def test_wrong_initial_tangents(self, params):
        """Initial curves must match the boundary tangents."""
        grid = params.grid(33)
        bc = BoundaryCondition.fixed_tangents([1.0, 0.0, 0.0], params.upper_tangent)
        with pytest.raises(InitialConditionError):
            simulate(sample_exact_arc(params, 0.0, grid), bc, SolverConfig(t_final=0.01))


class TestBlowUp:
    """Test non-finite detection."""

    def test_step_blows_up(self, params):
        """An oversized step on rough data produces non-finite values."""
        grid = params.grid(33)
        rng = np.random.default_rng(3)
        curve = Curve(grid, sample_exact_arc(params, 0.0, grid).points + rng.normal(size=(33, 3)))
        bc = arc_boundary_condition(params)
        with pytest.raises(BlowUpError) as excinfo:
            for index in range(200):
                curve = step(curve, bc, 1e3, step_index=index)
        assert excinfo.value.time == pytest.approx((excinfo.value.step_index + 1) * 1e3)

    def test_error_attributes(self):
        """Step index and time are kept on the exception."""
        error = BlowUpError(7, 0.5, "overflow")
        assert error.step_index == 7
        assert error.time == 0.5
        assert "overflow" in str(error)
        assert isinstance(error, RuntimeError)
