"""
LIE Geometry - Grids, sampled curves and exact reference solutions.

This module provides uniform arc-length grids, the immutable Curve and
VectorField containers, second-order finite-difference derivatives, the exact
translating arc, and the reflection and rotation machinery used to move
between boundary configurations.
"""

import logging
from dataclasses import dataclass
from typing import Literal, TypeVar

import numpy as np

from ..constants import GRID_KINDS, JOIN_TOLERANCE, MIN_NODES, UNIT_TOLERANCE
from ..errors import DegenerateInputError, GridError

logger = logging.getLogger("lie-lab.geometry")

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])

# Reflection across the plane xi_2 = 0.
MIRROR = np.array([1.0, -1.0, 1.0])


# =============================================================================
# Grids
# =============================================================================


@dataclass(frozen=True)
class Grid:
    """Uniform sampling of an interval or a torus in arc length."""

    kind: Literal["interval", "periodic"]
    length: float
    n_nodes: int
    origin: float = 0.0

    def __post_init__(self):
        if self.kind not in GRID_KINDS:
            raise GridError(f"unknown grid kind '{self.kind}'")
        if not isinstance(self.n_nodes, (int, np.integer)):
            raise GridError(f"n_nodes must be an integer, got {self.n_nodes!r}")
        if self.n_nodes < MIN_NODES:
            raise GridError(f"n_nodes must be at least {MIN_NODES}, got {self.n_nodes}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise GridError(f"length must be positive and finite, got {self.length}")
        if not np.isfinite(self.origin):
            raise GridError("origin must be finite")
        if self.kind == "periodic" and self.origin != 0.0:
            raise GridError("periodic grids start at s = 0")

    @classmethod
    def interval(cls, length: float, n_nodes: int, origin: float = 0.0) -> "Grid":
        """Interval [origin, origin + length] with both endpoints as nodes."""
        return cls("interval", float(length), int(n_nodes), float(origin))

    @classmethod
    def periodic(cls, length: float, n_nodes: int) -> "Grid":
        """Torus of circumference ``length``; node n_nodes coincides with node 0."""
        return cls("periodic", float(length), int(n_nodes))

    @classmethod
    def symmetric(cls, half_length: float, n_nodes: int) -> "Grid":
        """Interval (-half_length, half_length) with a node at s = 0."""
        if n_nodes % 2 == 0:
            raise GridError(f"symmetric grids need an odd node count, got {n_nodes}")
        return cls.interval(2.0 * half_length, n_nodes, origin=-float(half_length))

    @property
    def is_periodic(self) -> bool:
        return self.kind == "periodic"

    @property
    def spacing(self) -> float:
        if self.is_periodic:
            return self.length / self.n_nodes
        return self.length / (self.n_nodes - 1)

    @property
    def end(self) -> float:
        return self.origin + self.length

    @property
    def nodes(self) -> np.ndarray:
        if self.is_periodic:
            return self.spacing * np.arange(self.n_nodes)
        return np.linspace(self.origin, self.end, self.n_nodes)

    @property
    def is_symmetric(self) -> bool:
        """Interval centred on s = 0 with a node there."""
        return (
            not self.is_periodic
            and self.n_nodes % 2 == 1
            and abs(self.origin + 0.5 * self.length) <= UNIT_TOLERANCE * self.length
        )

    @property
    def has_midpoint(self) -> bool:
        return not self.is_periodic and self.n_nodes % 2 == 1


# =============================================================================
# Sampled data
# =============================================================================


def _as_vectors(grid: Grid, values, what: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.shape != (grid.n_nodes, 3):
        raise GridError(
            f"{what} must have shape ({grid.n_nodes}, 3), got {tuple(array.shape)}"
        )
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class VectorField:
    """Sampled 3-vectors on a grid (tangents, derivatives, perturbations)."""

    grid: Grid
    vectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vectors", _as_vectors(self.grid, self.vectors, "vectors"))

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros((grid.n_nodes, 3)))

    @classmethod
    def constant(cls, grid: Grid, vector) -> "VectorField":
        return cls(grid, np.tile(np.asarray(vector, dtype=float), (grid.n_nodes, 1)))

    def component(self, index: int) -> np.ndarray:
        return self.vectors[:, index]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=1)

    def dot(self, other) -> np.ndarray:
        """Nodewise dot product with a field or a fixed 3-vector."""
        values = other.vectors if isinstance(other, VectorField) else np.asarray(other)
        return np.sum(self.vectors * values, axis=-1)

    def _check_grid(self, other: "VectorField"):
        if other.grid != self.grid:
            raise GridError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, VectorField):
            self._check_grid(other)
            return VectorField(self.grid, self.vectors + other.vectors)
        return VectorField(self.grid, self.vectors + np.asarray(other, dtype=float))

    def __sub__(self, other):
        if isinstance(other, VectorField):
            self._check_grid(other)
            return VectorField(self.grid, self.vectors - other.vectors)
        return VectorField(self.grid, self.vectors - np.asarray(other, dtype=float))

    def __mul__(self, scalar: float):
        return VectorField(self.grid, self.vectors * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return VectorField(self.grid, -self.vectors)


@dataclass(frozen=True, eq=False)
class Curve:
    """Sampled positions of a filament at one instant."""

    grid: Grid
    points: np.ndarray

    def __post_init__(self):
        points = _as_vectors(self.grid, self.points, "points")
        if not np.all(np.isfinite(points)):
            raise DegenerateInputError("curve points must be finite")
        object.__setattr__(self, "points", points)

    def __sub__(self, other):
        if isinstance(other, Curve):
            if other.grid != self.grid:
                raise GridError("curves live on different grids")
            return VectorField(self.grid, self.points - other.points)
        return Curve(self.grid, self.points - np.asarray(other, dtype=float))

    def __add__(self, other):
        if isinstance(other, VectorField):
            if other.grid != self.grid:
                raise GridError("field and curve live on different grids")
            return Curve(self.grid, self.points + other.vectors)
        return Curve(self.grid, self.points + np.asarray(other, dtype=float))

    def as_field(self) -> VectorField:
        return VectorField(self.grid, self.points)


Sampled = TypeVar("Sampled", Curve, VectorField)


def values_of(data: Curve | VectorField) -> np.ndarray:
    """Raw (n, 3) array behind a curve or a field."""
    return data.points if isinstance(data, Curve) else data.vectors


def _rebuild(like: Sampled, values: np.ndarray) -> Sampled:
    if isinstance(like, Curve):
        return Curve(like.grid, values)
    return VectorField(like.grid, values)


# =============================================================================
# Arc parameters and the exact solution
# =============================================================================


@dataclass(frozen=True)
class ArcParams:
    """Radius R and opening angle of a filament arc; length = angle * R."""

    radius: float
    angle: float

    def __post_init__(self):
        if not np.isfinite(self.radius) or self.radius <= 0:
            raise DegenerateInputError(f"radius must be positive, got {self.radius}")
        if not np.isfinite(self.angle) or not 0.0 < self.angle < 2.0 * np.pi:
            raise DegenerateInputError(f"angle must lie in (0, 2 pi), got {self.angle}")

    @property
    def length(self) -> float:
        return self.angle * self.radius

    @property
    def lower_tangent(self) -> np.ndarray:
        """Tangent of the arc at s = 0."""
        return E2.copy()

    @property
    def upper_tangent(self) -> np.ndarray:
        """Tangent b = (-sin angle, cos angle, 0) of the arc at s = angle * R."""
        return np.array([-np.sin(self.angle), np.cos(self.angle), 0.0])

    def grid(self, n_nodes: int) -> Grid:
        return Grid.interval(self.length, n_nodes)

    def symmetric_grid(self, n_nodes: int) -> Grid:
        return Grid.symmetric(self.length, n_nodes)


def radius_of(params: "ArcParams | float") -> float:
    if isinstance(params, ArcParams):
        return params.radius
    radius = float(params)
    if not np.isfinite(radius) or radius <= 0:
        raise DegenerateInputError(f"radius must be positive, got {radius}")
    return radius


def exact_arc_points(radius: float, s, t: float) -> np.ndarray:
    """Vectorised x^R(s, t) = (R cos(s/R), R sin(s/R), t/R)."""
    s = np.asarray(s, dtype=float)
    return np.stack(
        [radius * np.cos(s / radius), radius * np.sin(s / radius), np.full(s.shape, t / radius)],
        axis=-1,
    )


def exact_arc_tangents(radius: float, s) -> np.ndarray:
    """Unit tangents (-sin(s/R), cos(s/R), 0) of the exact arc."""
    s = np.asarray(s, dtype=float)
    return np.stack([-np.sin(s / radius), np.cos(s / radius), np.zeros(s.shape)], axis=-1)


def exact_arc_point(params: "ArcParams | float", s: float, t: float) -> np.ndarray:
    """
    Evaluate the exact translating arc at one arc length and time.

    Args:
        params: Arc parameters, or a bare radius for rings
        s: Arc length
        t: Time

    Returns:
        The 3-vector (R cos(s/R), R sin(s/R), t/R)
    """
    radius = radius_of(params)
    if not (np.isfinite(s) and np.isfinite(t)):
        raise DegenerateInputError(f"non-finite arguments s={s}, t={t}")
    return exact_arc_points(radius, float(s), float(t))


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= UNIT_TOLERANCE * max(1.0, abs(a), abs(b))


def sample_exact_arc(params: "ArcParams | float", t: float, grid: Grid) -> Curve:
    """
    Sample the exact solution on a grid.

    Arc parameters accept the arc grid [0, angle R] and its reflection
    extension (-angle R, angle R); periodic grids must have circumference
    2 pi R. A bare radius on an interval grid samples the circle over that
    interval, which is how ring segments are described.
    """
    radius = radius_of(params)
    if grid.is_periodic:
        if not _close(grid.length, 2.0 * np.pi * radius):
            raise GridError(
                f"periodic grid length {grid.length} differs from 2 pi R = {2 * np.pi * radius}"
            )
    elif isinstance(params, ArcParams):
        plain = _close(grid.origin, 0.0) and _close(grid.length, params.length)
        extended = _close(grid.origin, -params.length) and _close(grid.length, 2 * params.length)
        if not (plain or extended):
            raise GridError(
                f"grid [{grid.origin}, {grid.end}] does not match arc length {params.length}"
            )
    return Curve(grid, exact_arc_points(radius, grid.nodes, t))


# =============================================================================
# Finite differences
# =============================================================================

# Central stencils: (offsets, weights), second-order accurate.
_CENTRAL: dict[int, tuple[tuple[int, ...], tuple[float, ...]]] = {
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}

# Forward one-sided stencils, second-order accurate. Backward stencils use the
# same weights mirrored, with a sign flip for odd orders.
_FORWARD: dict[int, tuple[float, ...]] = {
    1: (-1.5, 2.0, -0.5),
    2: (2.0, -5.0, 4.0, -1.0),
    3: (-2.5, 9.0, -12.0, 7.0, -1.5),
    4: (3.0, -14.0, 26.0, -24.0, 11.0, -2.0),
}


def differentiate(values: np.ndarray, grid: Grid, order: int) -> np.ndarray:
    """
    Differentiate sampled values along the grid.

    Interior nodes use central differences::

        f'    ~ (f[i+1] - f[i-1]) / 2h
        f''   ~ (f[i+1] - 2 f[i] + f[i-1]) / h^2

    and interval endpoints use one-sided stencils of the same order.
    Periodic grids wrap around.

    Args:
        values: Array of shape (n,) or (n, 3)
        grid: Grid the values live on
        order: Derivative order, 1 to 4

    Returns:
        Array of the same shape with the derivative estimate
    """
    if order not in _CENTRAL:
        raise GridError(f"derivative order must be 1..4, got {order}")
    if grid.n_nodes < order + 4:
        raise GridError(f"order {order} needs at least {order + 4} nodes, got {grid.n_nodes}")
    values = np.asarray(values, dtype=float)
    if values.shape[0] != grid.n_nodes:
        raise GridError("values do not match the grid")
    offsets, weights = _CENTRAL[order]
    scale = grid.spacing**order
    out = np.zeros_like(values)

    if grid.is_periodic:
        for offset, weight in zip(offsets, weights):
            out += weight * np.roll(values, -offset, axis=0)
        return out / scale

    n = grid.n_nodes
    half = max(abs(o) for o in offsets)
    for offset, weight in zip(offsets, weights):
        out[half : n - half] += weight * values[half + offset : n - half + offset]

    forward = np.asarray(_FORWARD[order])
    width = forward.size
    sign = -1.0 if order % 2 else 1.0
    for i in range(half):
        out[i] = np.tensordot(forward, values[i : i + width], axes=1)
        out[n - 1 - i] = sign * np.tensordot(forward, values[n - i - width : n - i][::-1], axes=1)
    return out / scale


def derivative(field: Curve | VectorField, order: int) -> VectorField:
    """Derivative of a curve or field of the given order (1..4)."""
    return VectorField(field.grid, differentiate(values_of(field), field.grid, order))


# =============================================================================
# Reflection
# =============================================================================


def reflect_T(field: Sampled) -> Sampled:
    """
    Apply (T y)(s) = (y1(-s), -y2(-s), y3(-s)) nodewise.

    Args:
        field: Curve or field on a symmetric interval grid

    Returns:
        The reflected data, of the same type
    """
    if not field.grid.is_symmetric:
        raise GridError("reflection needs a symmetric interval grid with a node at s = 0")
    return _rebuild(field, values_of(field)[::-1] * MIRROR)


def join_residual(curve: Curve) -> float:
    """
    How far a curve on [0, L] is from joining smoothly with its reflection.

    The mirrored component must vanish at s = 0 and the others must have zero
    slope there. Slopes come from one-sided stencils, so smooth data show a
    residual of order ds^2.
    """
    points = curve.points
    slope = np.tensordot(np.asarray(_FORWARD[1]), points[:3], axes=1) / curve.grid.spacing
    return float(max(abs(points[0, 1]), abs(slope[0]), abs(slope[2])))


def extend_by_reflection(curve: Curve) -> Curve:
    """
    Extend a curve on [0, L] to (-L, L) so that T maps it to itself.

    The node at s = 0 is projected onto the mirror plane. A join residual
    above tolerance is logged as a warning, since the extension is then only
    continuous.
    """
    grid = curve.grid
    if grid.is_periodic or not _close(grid.origin, 0.0):
        raise GridError("reflection extension needs an interval grid starting at s = 0")
    residual = join_residual(curve)
    if residual > JOIN_TOLERANCE + grid.spacing**2:
        logger.warning(f"Reflection join residual {residual:.3e} exceeds tolerance")

    points = curve.points
    centre = points[0] * np.array([1.0, 0.0, 1.0])
    extended = np.concatenate([points[:0:-1] * MIRROR, centre[None, :], points[1:]])
    return Curve(Grid.symmetric(grid.length, 2 * grid.n_nodes - 1), extended)


# =============================================================================
# Rotations
# =============================================================================


def canonical_rotation(a, reflex: bool = False) -> tuple[np.ndarray, float]:
    """
    Rotation taking boundary data (a, e3) to the canonical pair (b, e2).

    The opening angle is the dihedral angle between the planes normal to a
    and to e3, in (0, pi); ``reflex=True`` selects the complementary
    configuration 2 pi - angle, where the filament fills the larger sector.

    Args:
        a: Unit tangent prescribed at the lower end
        reflex: Use the reflex opening angle

    Returns:
        Tuple (Q, angle) with Q proper orthogonal, Q a = b(angle), Q e3 = e2
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise DegenerateInputError("a must be a finite 3-vector")
    if abs(np.linalg.norm(a) - 1.0) > 1e-10:
        raise DegenerateInputError(f"a must have unit length, got |a| = {np.linalg.norm(a)}")
    across = a - a[2] * E3
    spread = np.linalg.norm(across)
    if spread < 1e-12:
        raise DegenerateInputError("a is parallel to e3; the opening angle is undefined")

    angle = float(np.arccos(np.clip(a[2], -1.0, 1.0)))
    theta = 2.0 * np.pi - angle if reflex else angle
    b = np.array([-np.sin(theta), np.cos(theta), 0.0])

    u = across / spread
    source = np.column_stack([E3, u, np.cross(E3, u)])
    w = (b - b[1] * E2) / np.linalg.norm(b - b[1] * E2)
    target = np.column_stack([E2, w, np.cross(E2, w)])
    return target @ source.T, theta


def rotate(data: Sampled, rotation: np.ndarray) -> Sampled:
    """Apply a rotation matrix to every node."""
    return _rebuild(data, values_of(data) @ np.asarray(rotation, dtype=float).T)


def rotation_about_e3(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
