"""Grid geometry, immutable discrete fields, quadrature and difference operators.

All integrals of the energy reduce to the uniform node sum ``h**N * sum(values)``.
Derivatives use a sparse 1-D difference matrix applied along each axis:
central differences at interior nodes and one-sided differences against a
zero ghost node at the two boundary nodes of every axis.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage, sparse

from app.core.exceptions import ValidationError

ArrayLike = Union["Field", np.ndarray]


@dataclass(frozen=True)
class Grid:
    """Node-centered lattice on [-L, L]^N with an odd number of nodes per axis"""

    dims: int
    half_extent: float
    points_per_axis: int

    def __post_init__(self):
        if self.dims < 3:
            raise ValidationError(f"Grid dimension must be at least 3, got {self.dims}")
        if not self.half_extent > 0:
            raise ValidationError(f"half_extent must be positive, got {self.half_extent}")
        if self.points_per_axis < 3 or self.points_per_axis % 2 == 0:
            raise ValidationError(
                f"points_per_axis must be an odd integer >= 3, got {self.points_per_axis}"
            )

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / (self.points_per_axis - 1)

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points_per_axis,) * self.dims

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.dims

    @property
    def center_index(self) -> int:
        return (self.points_per_axis - 1) // 2

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dims

    @cached_property
    def axis(self) -> np.ndarray:
        """Node coordinates along one axis; index c maps to exactly 0.0"""
        offsets = np.arange(self.points_per_axis) - self.center_index
        return offsets * self.spacing

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays, one per axis"""
        return tuple(
            self.axis.reshape([-1 if k == j else 1 for j in range(self.dims)])
            for k in range(self.dims)
        )

    def index_offsets(self) -> Tuple[np.ndarray, ...]:
        """Broadcastable integer offsets i - c, one per axis"""
        offsets = np.arange(self.points_per_axis) - self.center_index
        return tuple(
            offsets.reshape([-1 if k == j else 1 for j in range(self.dims)])
            for k in range(self.dims)
        )

    def radius_squared(self) -> np.ndarray:
        return sum(x ** 2 for x in self.coordinates())

    @cached_property
    def difference_matrix(self) -> sparse.csr_matrix:
        """1-D first-derivative operator with zero ghost values outside the box"""
        n = self.points_per_axis
        h = self.spacing
        main = np.zeros(n)
        main[0] = 1.0 / h
        main[-1] = -1.0 / h
        upper = np.full(n - 1, 0.5 / h)
        lower = np.full(n - 1, -0.5 / h)
        upper[0] = 0.0
        lower[-1] = 0.0
        return sparse.diags([lower, main, upper], offsets=[-1, 0, 1], format="csr")

    @cached_property
    def difference_matrix_transpose(self) -> sparse.csr_matrix:
        return self.difference_matrix.T.tocsr()


@dataclass(frozen=True, eq=False)
class Field:
    """Real values on every node of a grid; never mutated after construction"""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1 and values.size == self.grid.size:
            values = values.reshape(self.grid.shape)
        if values.shape != self.grid.shape:
            raise ValidationError(
                f"Field values of shape {values.shape} do not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("Field values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[..., np.ndarray]) -> "Field":
        """Evaluate fn(x_1, ..., x_N) on broadcast coordinate arrays"""
        values = np.broadcast_to(fn(*grid.coordinates()), grid.shape)
        return cls(grid, values)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, values)

    def _check(self, other: "Field") -> None:
        if other.grid != self.grid:
            raise ValidationError("Fields live on different grids")

    def __add__(self, other: "Field") -> "Field":
        self._check(other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self._check(other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class Pair:
    """Element (u, v) of X = H x H on one shared grid"""

    u: Field
    v: Field

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ValidationError("Both components of a pair must share one grid")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @classmethod
    def zeros(cls, grid: Grid) -> "Pair":
        return cls(Field.zeros(grid), Field.zeros(grid))

    @classmethod
    def from_arrays(cls, grid: Grid, u: np.ndarray, v: np.ndarray) -> "Pair":
        return cls(Field(grid, u), Field(grid, v))

    def components(self) -> Iterator[Field]:
        yield self.u
        yield self.v

    def map(self, fn: Callable[[Field], Field]) -> "Pair":
        return Pair(fn(self.u), fn(self.v))

    def __add__(self, other: "Pair") -> "Pair":
        return Pair(self.u + other.u, self.v + other.v)

    def __sub__(self, other: "Pair") -> "Pair":
        return Pair(self.u - other.u, self.v - other.v)

    def __mul__(self, scalar: float) -> "Pair":
        return Pair(self.u * scalar, self.v * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "Pair":
        return Pair(-self.u, -self.v)


def _values(f: ArrayLike) -> np.ndarray:
    return f.values if isinstance(f, Field) else np.asarray(f, dtype=np.float64)


def integrate(f: ArrayLike, grid: Grid = None) -> float:
    """Uniform-weight quadrature h^N * sum over nodes"""
    if grid is None:
        if not isinstance(f, Field):
            raise ValidationError("integrate needs a grid when given a bare array")
        grid = f.grid
    return float(grid.cell_volume * np.sum(_values(f)))


def apply_along_axis(matrix: sparse.spmatrix, values: np.ndarray, axis: int) -> np.ndarray:
    """Apply a 1-D operator along one axis of an N-D array"""
    moved = np.moveaxis(values, axis, 0)
    shape = moved.shape
    out = matrix @ moved.reshape(shape[0], -1)
    return np.moveaxis(np.asarray(out).reshape(shape), 0, axis)


def partial_derivatives(values: np.ndarray, grid: Grid) -> Tuple[np.ndarray, ...]:
    return tuple(
        apply_along_axis(grid.difference_matrix, values, k) for k in range(grid.dims)
    )


def adjoint_divergence(components: Sequence[np.ndarray], grid: Grid) -> np.ndarray:
    """sum_k D_k^T w_k, the exact adjoint of partial_derivatives"""
    out = np.zeros(grid.shape)
    for k, w in enumerate(components):
        out += apply_along_axis(grid.difference_matrix_transpose, w, k)
    return out


def grad(f: Field) -> Tuple[Field, ...]:
    """Discrete gradient, one Field per spatial direction"""
    return tuple(Field(f.grid, d) for d in partial_derivatives(f.values, f.grid))


def gradient_norm_squared(values: np.ndarray, grid: Grid) -> np.ndarray:
    return sum(d ** 2 for d in partial_derivatives(values, grid))


def scale_field(f: Field, t: float) -> Field:
    """g(x) = t * f(x / t) by multilinear interpolation, zero outside the box"""
    if not t > 0:
        raise ValidationError(f"Scaling parameter must be positive, got {t}")
    if t == 1.0:
        return f
    grid = f.grid
    c = grid.center_index
    # index space: node i samples f at c + (i - c) / t
    axes = [c + offset / t for offset in grid.index_offsets()]
    coords = np.stack(np.broadcast_arrays(*axes))
    values = ndimage.map_coordinates(f.values, coords, order=1, mode="grid-constant", cval=0.0)
    return Field(grid, t * values)


def scale_pair(p: Pair, t: float) -> Pair:
    return p.map(lambda f: scale_field(f, t))


def resample_field(f: Field, grid: Grid) -> Field:
    """f on the nodes of another grid by multilinear interpolation, zero outside f's box"""
    if grid.dims != f.grid.dims:
        raise ValidationError(f"Cannot resample a {f.grid.dims}-D field onto a {grid.dims}-D grid")
    source = f.grid
    axes = [x / source.spacing + source.center_index for x in grid.coordinates()]
    coords = np.stack(np.broadcast_arrays(*axes))
    values = ndimage.map_coordinates(f.values, coords, order=1, mode="grid-constant", cval=0.0)
    return Field(grid, values)


def resample_pair(p: Pair, grid: Grid) -> Pair:
    return Pair(resample_field(p.u, grid), resample_field(p.v, grid))


def l2_norm(values: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(grid.cell_volume * np.sum(values ** 2)))


def h1_norm(values: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(grid.cell_volume * np.sum(values ** 2 + gradient_norm_squared(values, grid))))


def distance_H(f: Field, g: Field) -> float:
    """d_H(f, g) = ||f - g||_{H^1} + |grad(f^2) - grad(g^2)|_2"""
    f._check(g)
    grid = f.grid
    difference = f.values - g.values
    square_difference = f.values ** 2 - g.values ** 2
    return h1_norm(difference, grid) + float(
        np.sqrt(grid.cell_volume * np.sum(gradient_norm_squared(square_difference, grid)))
    )


def distance_X(p: Pair, q: Pair) -> float:
    return distance_H(p.u, q.u) + distance_H(p.v, q.v)


def inner_mass_fraction(f: Field) -> float:
    """Share of the integral of f^2 carried by the inner half-box [-L/2, L/2]^N"""
    total = float(np.sum(f.values ** 2))
    if total == 0.0:
        return 1.0
    grid = f.grid
    inner = np.ones(grid.shape, dtype=bool)
    for x in grid.coordinates():
        inner = inner & (np.abs(x) <= grid.half_extent / 2)
    return float(np.sum(f.values[inner] ** 2) / total)


def richardson(coarse: float, fine: float, order: float = 2.0, ratio: float = 2.0) -> float:
    """Extrapolate two approximations with error ~ C h^order"""
    factor = ratio ** order
    return (factor * fine - coarse) / (factor - 1.0)
