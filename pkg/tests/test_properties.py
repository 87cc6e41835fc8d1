"""
Property-based tests for LIE Lab numerics.

Uses hypothesis to check stencil exactness, rotation geometry, parity
projections, closed-form rates and translation equivariance of the solver
over random inputs.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lie_lab.errors import AdmissibilityError
from lie_lab.numerics.geometry import (
    E2,
    E3,
    ArcParams,
    Curve,
    Grid,
    VectorField,
    canonical_rotation,
    differentiate,
    sample_exact_arc,
)
from lie_lab.numerics.invariants import poincare_ratio
from lie_lab.numerics.perturbations import (
    check_symmetry,
    constant_shift,
    looped_growth_rate,
    looped_radius,
    symmetrize,
)
from lie_lab.numerics.solver import BoundaryCondition, arc_boundary_condition, lie_rhs, step

coefficients = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)
radii = st.floats(min_value=0.2, max_value=5.0, allow_nan=False)
angles = st.floats(min_value=0.05, max_value=2 * math.pi - 0.05, allow_nan=False)


class TestStencils:
    """Finite differences on polynomials."""

    @given(
        a=coefficients,
        b=coefficients,
        c=coefficients,
        length=st.floats(min_value=0.5, max_value=4.0),
        n=st.integers(min_value=12, max_value=80),
    )
    @settings(max_examples=50, deadline=None)
    def test_quadratics_exact(self, a, b, c, length, n):
        """First and second derivatives of quadratics are exact at every node."""
        grid = Grid.interval(length, n)
        s = grid.nodes
        values = a + b * s + c * s**2
        np.testing.assert_allclose(differentiate(values, grid, 1), b + 2 * c * s, atol=1e-8)
        np.testing.assert_allclose(differentiate(values, grid, 2), 2 * c, atol=1e-6)

    @given(n=st.integers(min_value=16, max_value=64), k=st.integers(min_value=1, max_value=3))
    @settings(max_examples=25, deadline=None)
    def test_periodic_modes(self, n, k):
        """Central differences of a Fourier mode carry the symbol sin(kh)/h."""
        grid = Grid.periodic(2 * math.pi, n)
        s = grid.nodes
        derivative = differentiate(np.sin(k * s), grid, 1)
        symbol = math.sin(k * grid.spacing) / grid.spacing
        np.testing.assert_allclose(derivative, symbol * np.cos(k * s), atol=1e-12)


class TestRotations:
    """Canonical rotations of boundary data."""

    @given(
        polar=st.floats(min_value=0.05, max_value=math.pi - 0.05),
        azimuth=st.floats(min_value=0.0, max_value=2 * math.pi),
        reflex=st.booleans(),
    )
    @settings(max_examples=50, deadline=None)
    def test_proper_orthogonal(self, polar, azimuth, reflex):
        """Q is a rotation taking (a, e3) to (b, e2)."""
        ring = math.sin(polar)
        a = np.array([ring * math.cos(azimuth), ring * math.sin(azimuth), math.cos(polar)])
        rotation, angle = canonical_rotation(a, reflex)
        np.testing.assert_allclose(rotation @ rotation.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(rotation) == pytest.approx(1.0)
        b = np.array([-math.sin(angle), math.cos(angle), 0.0])
        np.testing.assert_allclose(rotation @ a, b, atol=1e-10)
        np.testing.assert_allclose(rotation @ E3, E2, atol=1e-10)


class TestParity:
    """Mid-chord parity projection."""

    @given(
        radius=radii,
        angle=angles,
        half=st.integers(min_value=5, max_value=30),
        seed=st.integers(min_value=0, max_value=2**16),
    )
    @settings(max_examples=30, deadline=None)
    def test_symmetrize_idempotent(self, radius, angle, half, seed):
        """Projecting twice changes nothing and the result is symmetric."""
        params = ArcParams(radius, angle)
        grid = params.grid(2 * half + 1)
        field = VectorField(grid, np.random.default_rng(seed).normal(size=(grid.n_nodes, 3)))
        once = symmetrize(field, params)
        np.testing.assert_allclose(symmetrize(once, params).vectors, once.vectors, atol=1e-12)
        assert check_symmetry(once, params) < 1e-12


class TestClosedForms:
    """Closed-form rates and admissibility."""

    @given(n=st.integers(min_value=1, max_value=10), radius=radii, angle=angles)
    def test_looped_rate(self, n, radius, angle):
        """The looped growth rate is the curvature gap 1/R_n - 1/R."""
        params = ArcParams(radius, angle)
        gap = 1.0 / looped_radius(n, params) - 1.0 / radius
        assert looped_growth_rate(n, params) == pytest.approx(gap, rel=1e-10)

    @given(shift=coefficients, radius=radii, angle=angles)
    def test_axial_shift_admissible(self, shift, radius, angle):
        """Axial shifts satisfy both endpoint planes."""
        params = ArcParams(radius, angle)
        phi = constant_shift((0.0, 0.0, shift), params, params.grid(17))
        np.testing.assert_allclose(phi.vectors[:, 2], shift)

    @given(shift=st.floats(min_value=1e-3, max_value=1.0), angle=angles)
    def test_tangential_shift_rejected(self, shift, angle):
        """A shift along e2 leaves the lower endpoint plane."""
        params = ArcParams(1.0, angle)
        with pytest.raises(AdmissibilityError):
            constant_shift((0.0, shift, 0.0), params, params.grid(17))

    @given(length=st.floats(min_value=0.5, max_value=10.0))
    @settings(max_examples=20, deadline=None)
    def test_poincare_below_sharp_constant(self, length):
        """The discrete Rayleigh quotient of the sine mode stays near L / pi."""
        grid = Grid.interval(length, 129)
        mode = VectorField(grid, np.outer(np.sin(np.pi * grid.nodes / length), E2))
        target = length / math.pi
        assert abs(poincare_ratio(mode) - target) / target < (math.pi * grid.spacing / length) ** 2


class TestEquivariance:
    """The discrete flow only sees derivatives of the curve."""

    @given(
        shift=st.tuples(coefficients, coefficients, coefficients),
        radius=st.floats(min_value=0.5, max_value=3.0),
        angle=st.floats(min_value=0.3, max_value=3.0),
        n=st.integers(min_value=17, max_value=65),
        closed=st.booleans(),
        seed=st.integers(min_value=0, max_value=2**16),
    )
    @settings(max_examples=40, deadline=None)
    def test_translation(self, shift, radius, angle, n, closed, seed):
        """rhs(x + c) = rhs(x) and step(x + c) = step(x) + c."""
        if closed:
            grid = Grid.periodic(2 * math.pi * radius, n)
            curve = sample_exact_arc(radius, 0.0, grid)
            bc = BoundaryCondition.periodic()
        else:
            params = ArcParams(radius, angle)
            grid = params.grid(n)
            curve = sample_exact_arc(params, 0.0, grid)
            bc = arc_boundary_condition(params)
        noise = 1e-3 * np.random.default_rng(seed).normal(size=(n, 3))
        curve = Curve(grid, curve.points + noise)
        moved = Curve(grid, curve.points + np.asarray(shift))

        np.testing.assert_allclose(
            lie_rhs(moved, bc).vectors, lie_rhs(curve, bc).vectors, atol=1e-7
        )
        dt = 0.25 * grid.spacing**2
        np.testing.assert_allclose(
            step(moved, bc, dt).points, step(curve, bc, dt).points + np.asarray(shift), atol=1e-11
        )
