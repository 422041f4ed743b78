"""
Grid fields: sampled functions on a uniform cell-centered grid over [-R, R]^n.

WHY CELL-CENTERED?
- Every integral in the workbench is a midpoint Riemann sum over cells.
- Indicator functions of grid-aligned cubes are then integrated exactly,
  so norms and averages of indicators carry no quadrature error beyond
  the cells crossed by the set boundary.
- Cell centers never coincide with the origin (x_i = -R + (i + 1/2)h and
  N is even), which keeps power weights |x|^(-a) finite everywhere.

Fields are immutable once constructed. Operators never wrap around the
box: values outside [-R, R]^n are zero (compactly supported data).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centered grid on the box [-R, R]^n with N cells per axis."""

    dimension: int
    half_width: float
    cells: int

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if not self.half_width > 0:
            raise ValueError(f"half-width R must be positive, got {self.half_width}")
        if self.cells < 2 or self.cells % 2 != 0:
            raise ValueError(f"cells per axis N must be even and >= 2, got {self.cells}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.cells

    @property
    def shape(self) -> tuple:
        return (self.cells,) * self.dimension

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dimension

    @property
    def total_cells(self) -> int:
        return self.cells ** self.dimension

    def axis_centers(self) -> np.ndarray:
        return -self.half_width + (np.arange(self.cells) + 0.5) * self.spacing

    def coordinates(self) -> tuple:
        """Cell-center coordinate arrays, one per axis (indexing='ij')."""
        axis = self.axis_centers()
        return tuple(np.meshgrid(*([axis] * self.dimension), indexing="ij"))

    def points(self) -> np.ndarray:
        """All cell centers as an (N^n, n) array in row-major order."""
        return np.stack([c.ravel() for c in self.coordinates()], axis=1)

    def distance_from(self, center: Optional[Sequence[float]] = None) -> np.ndarray:
        coords = self.coordinates()
        if center is None:
            center = (0.0,) * self.dimension
        squared = sum((c - float(x0)) ** 2 for c, x0 in zip(coords, center))
        return np.sqrt(squared)

    def index_of(self, point: Sequence[float]) -> tuple:
        """Index of the cell containing a point of the box."""
        point = np.asarray(point, dtype=float)
        if np.any(np.abs(point) > self.half_width):
            raise ValueError(f"point {tuple(point)} lies outside the box [-{self.half_width}, {self.half_width}]^{self.dimension}")
        idx = np.floor((point + self.half_width) / self.spacing).astype(int)
        return tuple(np.clip(idx, 0, self.cells - 1))

    def with_cells(self, cells: int) -> "GridSpec":
        """Same box, different resolution."""
        return GridSpec(self.dimension, self.half_width, cells)

    def refined(self) -> "GridSpec":
        return self.with_cells(2 * self.cells)

    def enlarged(self, factor: int) -> "GridSpec":
        """
        Box grown by an integer factor at the same spacing.

        Cell centers of the enlarged grid contain those of this grid, so a
        field can be embedded without interpolation.
        """
        if factor < 1:
            raise ValueError(f"enlargement factor must be >= 1, got {factor}")
        return GridSpec(self.dimension, self.half_width * factor, self.cells * factor)

    def embedding_offset(self, larger: "GridSpec") -> int:
        """Index offset of this grid inside an aligned larger grid."""
        if larger.dimension != self.dimension or not np.isclose(larger.spacing, self.spacing):
            raise ValueError("grids must share dimension and spacing to be embedded")
        offset = (larger.half_width - self.half_width) / self.spacing
        if offset < -1e-9 or abs(offset - round(offset)) > 1e-9:
            raise ValueError(f"grid of half-width {self.half_width} is not aligned inside half-width {larger.half_width}")
        return int(round(offset))


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real function sampled at cell centers."""

    grid: GridSpec
    values: np.ndarray
    support_radius: Optional[float] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError(f"values have shape {values.shape}, grid expects {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        if self.support_radius is not None:
            if not 0 < self.support_radius:
                raise ValueError(f"support radius must be positive, got {self.support_radius}")
            outside = self.grid.distance_from() > self.support_radius
            if np.any(values[outside] != 0.0):
                raise ValueError(f"field is nonzero outside its recorded support radius {self.support_radius}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, values)

    def abs(self) -> "ScalarField":
        return ScalarField(self.grid, np.abs(self.values), self.support_radius)

    def scaled(self, factor: float) -> "ScalarField":
        return ScalarField(self.grid, factor * self.values, self.support_radius)

    def power(self, exponent: float) -> "ScalarField":
        return ScalarField(self.grid, np.abs(self.values) ** exponent)

    def __add__(self, other: "ScalarField") -> "ScalarField":
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")
        return ScalarField(self.grid, self.values + other.values)

    def __mul__(self, other: "ScalarField") -> "ScalarField":
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")
        return ScalarField(self.grid, self.values * other.values)

    def embedded(self, larger: GridSpec) -> "ScalarField":
        """Zero-extend onto an aligned larger grid."""
        offset = self.grid.embedding_offset(larger)
        values = np.zeros(larger.shape)
        window = tuple(slice(offset, offset + self.grid.cells) for _ in range(self.grid.dimension))
        values[window] = self.values
        return ScalarField(larger, values, self.support_radius)

    def integral(self) -> float:
        return float(np.sum(self.values) * self.grid.cell_volume)


@dataclass(frozen=True, eq=False)
class VectorField:
    components: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.components:
            raise ValueError("a vector field needs at least one component")
        grids = {c.grid for c in self.components}
        if len(grids) != 1:
            raise ValueError("all components must share one grid")

    @property
    def grid(self) -> GridSpec:
        return self.components[0].grid

    def magnitude(self) -> ScalarField:
        squared = sum(c.values ** 2 for c in self.components)
        return ScalarField(self.grid, np.sqrt(squared))


def constant_field(grid: GridSpec, value: float = 1.0) -> ScalarField:
    return ScalarField(grid, np.full(grid.shape, float(value)))


def make_bump(grid: GridSpec, center: Sequence[float], radius: float, amplitude: float = 1.0) -> ScalarField:
    """
    Smooth compactly supported bump A*exp(1 - 1/(1 - |x-c|^2/rho^2)).

    The bump is the C^infinity_c test function of every experiment. Its
    ball must lie inside the box so that no operator sees a truncated
    support.

    Args:
        grid: Grid to sample on
        center: Bump center c (length n)
        radius: Support radius rho > 0
        amplitude: Peak value A, attained at c

    Returns:
        ScalarField with support_radius = |c| + rho
    """
    center = np.asarray(center, dtype=float)
    if center.shape != (grid.dimension,):
        raise ValueError(f"center must have {grid.dimension} coordinates, got {center.shape}")
    if not radius > 0:
        raise ValueError(f"bump radius must be positive, got {radius}")
    reach = float(np.max(np.abs(center)) + radius)
    if reach > grid.half_width:
        raise ValueError(
            f"bump ball B({tuple(center)}, {radius}) exceeds the box: "
            f"max_j |c_j| + rho = {reach:.6g} > R = {grid.half_width}"
        )
    s = (grid.distance_from(center) / radius) ** 2
    values = np.zeros(grid.shape)
    inside = s < 1.0
    values[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - s[inside]))
    support = float(np.linalg.norm(center) + radius)
    return ScalarField(grid, values, support_radius=min(support, np.sqrt(grid.dimension) * grid.half_width))


def bump_gradient_exact(grid: GridSpec, center: Sequence[float], radius: float, amplitude: float = 1.0) -> VectorField:
    """Closed-form gradient of make_bump, used as the finite-difference oracle."""
    center = np.asarray(center, dtype=float)
    bump = make_bump(grid, center, radius, amplitude).values
    s = (grid.distance_from(center) / radius) ** 2
    inside = s < 1.0
    factor = np.zeros(grid.shape)
    factor[inside] = -bump[inside] / (1.0 - s[inside]) ** 2 * (2.0 / radius ** 2)
    components = tuple(
        ScalarField(grid, factor * (coord - c0)) for coord, c0 in zip(grid.coordinates(), center)
    )
    return VectorField(components)


def gradient(f: ScalarField) -> VectorField:
    """
    Central differences in the interior, one-sided stencils on the box faces.

    np.gradient uses exactly (f(x+h e_j) - f(x-h e_j)) / 2h inside and
    second-order one-sided differences at the boundary.
    """
    h = f.grid.spacing
    parts = np.gradient(f.values, h, edge_order=2)
    if f.grid.dimension == 1:
        parts = [parts]
    return VectorField(tuple(ScalarField(f.grid, part) for part in parts))


def lp_norm(f: ScalarField, p: float, weight: Optional[ScalarField] = None) -> float:
    """
    (sum |f|^p w h^n)^(1/p), with w a measure density (w = 1 if omitted).

    Callers pass the density directly: for ||w f||_p use lp_norm(w*f, p);
    for ||f||_{L^p(u)} use lp_norm(f, p, weight=u). p = inf returns max |f|.
    """
    if not p > 0:
        raise ValueError(f"exponent p must be positive, got {p}")
    magnitude = np.abs(f.values)
    if np.isinf(p):
        return float(magnitude.max())
    density = 1.0
    if weight is not None:
        if weight.grid != f.grid:
            raise ValueError("weight and field live on different grids")
        if np.any(weight.values <= 0):
            raise ValueError("weight density must be positive")
        density = weight.values
    total = np.sum(magnitude ** p * density) * f.grid.cell_volume
    return float(total ** (1.0 / p))
