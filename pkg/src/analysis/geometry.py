"""
Cubes, balls, dyadic cube families and sphere quadrature.

CUBE FAMILIES
A maximal function is a supremum over a family of cubes. The workbench
replaces "all cubes" by a centered dyadic surrogate:

- side lengths h*2^j for j = j_min..j_max,
- centers on cell centers (optionally thinned to a lattice of stride
  2^(j - stride_shift)),
- half-open membership [c - l/2, c + l/2) per axis.

With an even number of cells per side the half-open cube centered at
cell i covers exactly the cells i - s/2 .. i + s/2 - 1 (s = 2^j), so cube
averages are box filters and "sup over cubes containing x" is a running
maximum. Both come from scipy.ndimage.

Families for compactly supported fields let cubes leave the box (the
field is zero outside). Families for weights keep every cube inside the
box, since a weight is only known on the box.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from numpy.polynomial.legendre import leggauss
from scipy import ndimage
from scipy.special import gamma

from src.analysis.field import GridSpec, ScalarField

logger = logging.getLogger(__name__)

# Elements per block chunk when cubes are materialized as rows
BLOCK_CHUNK_ELEMENTS = 1 << 22


def unit_ball_volume(dimension: int) -> float:
    """omega_n = pi^(n/2) / Gamma(n/2 + 1)."""
    return float(math.pi ** (dimension / 2.0) / gamma(dimension / 2.0 + 1.0))


def sphere_area(dimension: int) -> float:
    """sigma(S^(n-1)) = n * omega_n."""
    return dimension * unit_ball_volume(dimension)


def _membership_tolerance(grid: GridSpec) -> float:
    return 1e-9 * grid.spacing


@dataclass(frozen=True)
class Cube:
    center: tuple
    side: float

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError(f"cube side must be positive, got {self.side}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return self.side ** self.dimension

    def dilated(self, factor: float) -> "Cube":
        return Cube(self.center, self.side * factor)

    def contains(self, point: Sequence[float], tolerance: float = 0.0) -> bool:
        point = np.asarray(point, dtype=float)
        low = np.asarray(self.center) - self.side / 2.0 - tolerance
        high = np.asarray(self.center) + self.side / 2.0 - tolerance
        return bool(np.all(point >= low) and np.all(point < high))

    def mask(self, grid: GridSpec) -> np.ndarray:
        """Cells whose centers lie in the half-open cube."""
        tol = _membership_tolerance(grid)
        inside = np.ones(grid.shape, dtype=bool)
        for coord, c in zip(grid.coordinates(), self.center):
            inside &= (coord >= c - self.side / 2.0 - tol) & (coord < c + self.side / 2.0 - tol)
        return inside

    def inside_box(self, grid: GridSpec) -> bool:
        tol = _membership_tolerance(grid)
        return all(abs(c) + self.side / 2.0 <= grid.half_width + tol for c in self.center)


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return unit_ball_volume(self.dimension) * self.radius ** self.dimension

    def mask(self, grid: GridSpec) -> np.ndarray:
        return grid.distance_from(self.center) <= self.radius

    def inside_box(self, grid: GridSpec) -> bool:
        return all(abs(c) + self.radius <= grid.half_width for c in self.center)


def average(f: ScalarField, region) -> float:
    """Mean of f over the cell centers of a cube or ball."""
    inside = region.mask(f.grid)
    if not inside.any():
        raise ValueError(f"{region} contains no cell center of the grid")
    return float(np.mean(f.values[inside]))


@dataclass(frozen=True)
class CubeFamily:
    """
    Centered dyadic cubes of side h*2^j, j_min <= j <= j_max.

    Attributes:
        grid: Grid the centers live on
        j_min, j_max: Scale range
        inside_only: Keep only cubes contained in the box (weights)
        stride_shift: Thin centers to a lattice of stride 2^(j - stride_shift)
    """

    grid: GridSpec
    j_min: int
    j_max: int
    inside_only: bool = False
    stride_shift: Optional[int] = None

    def __post_init__(self):
        if self.j_min < 0 or self.j_max < self.j_min:
            raise ValueError(f"invalid scale range j_min={self.j_min}, j_max={self.j_max}")
        limit = self.largest_scale(self.grid, self.inside_only)
        if self.j_max > limit:
            raise ValueError(f"j_max={self.j_max} exceeds the largest admissible scale {limit}")
        if self.stride_shift is not None and self.stride_shift < 0:
            raise ValueError(f"stride_shift must be >= 0, got {self.stride_shift}")

    @staticmethod
    def largest_scale(grid: GridSpec, inside_only: bool) -> int:
        # cubes of side up to twice the box, or up to the box for weights
        span = grid.cells if inside_only else 2 * grid.cells
        return int(math.floor(math.log2(span)))

    @classmethod
    def dyadic(
        cls,
        grid: GridSpec,
        j_min: int = 0,
        j_max: Optional[int] = None,
        inside_only: bool = False,
        stride_shift: Optional[int] = None,
    ) -> "CubeFamily":
        if j_max is None:
            j_max = cls.largest_scale(grid, inside_only)
        return cls(grid, j_min, j_max, inside_only, stride_shift)

    @property
    def scales(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def restricted(self, j_min: Optional[int] = None, j_max: Optional[int] = None) -> "CubeFamily":
        return CubeFamily(
            self.grid,
            self.j_min if j_min is None else j_min,
            self.j_max if j_max is None else j_max,
            self.inside_only,
            self.stride_shift,
        )

    def cells_per_side(self, j: int) -> int:
        return 1 << j

    def side(self, j: int) -> float:
        return self.grid.spacing * (1 << j)

    def stride(self, j: int) -> int:
        if self.stride_shift is None:
            return 1
        return 1 << max(0, j - self.stride_shift)

    def axis_centers(self, j: int) -> np.ndarray:
        """Center indices along one axis for scale j."""
        s = self.cells_per_side(j)
        centers = np.arange(0, self.grid.cells, self.stride(j))
        if self.inside_only:
            low = centers - s // 2
            centers = centers[(low >= 0) & (low + s <= self.grid.cells)]
        return centers

    def lattice_mask(self, j: int) -> np.ndarray:
        """Boolean grid mask of admissible centers at scale j."""
        axis = np.zeros(self.grid.cells, dtype=bool)
        axis[self.axis_centers(j)] = True
        mask = axis
        for _ in range(self.grid.dimension - 1):
            mask = np.multiply.outer(mask, axis)
        return mask.astype(bool)

    def center_indices(self, j: int) -> np.ndarray:
        """(k, n) array of admissible center indices at scale j."""
        axis = self.axis_centers(j)
        grids = np.meshgrid(*([axis] * self.grid.dimension), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def cube_at(self, index: Sequence[int], j: int) -> Cube:
        centers = self.grid.axis_centers()
        return Cube(tuple(centers[i] for i in index), self.side(j))

    def cube_count(self) -> int:
        return int(sum(len(self.axis_centers(j)) ** self.grid.dimension for j in self.scales))

    def cubes(self) -> Iterator[Cube]:
        for j in self.scales:
            for index in self.center_indices(j):
                yield self.cube_at(index, j)

    def cubes_containing(self, point: Sequence[float]) -> List[Cube]:
        """All family cubes whose half-open box contains the point."""
        cell = np.asarray(self.grid.index_of(point))
        tol = _membership_tolerance(self.grid)
        found = []
        for j in self.scales:
            s = self.cells_per_side(j)
            axis = self.axis_centers(j)
            candidates = [axis[(axis >= c - s) & (axis <= c + s)] for c in cell]
            mesh = np.meshgrid(*candidates, indexing="ij")
            for index in zip(*(m.ravel() for m in mesh)):
                cube = self.cube_at(index, j)
                if cube.contains(point, tolerance=tol):
                    found.append(cube)
        if not found:
            raise RuntimeError(f"no family cube contains {tuple(point)}; the family does not cover the box")
        return found


def scale_averages(values: np.ndarray, family: CubeFamily, j: int) -> np.ndarray:
    """
    Average of values over the scale-j cube centered at every cell.

    Non-admissible centers hold -inf, so they never win a supremum.
    """
    s = family.cells_per_side(j)
    means = ndimage.uniform_filter(values, size=s, mode="constant", cval=0.0)
    return np.where(family.lattice_mask(j), means, -np.inf)


def containing_supremum(per_center: np.ndarray, family: CubeFamily, j: int) -> np.ndarray:
    """
    For every cell x, the max of per_center over scale-j centers whose cube contains x.

    Cube centered at c covers cells c - s/2 .. c + s/2 - 1, so x is covered
    by centers x - s/2 + 1 .. x + s/2: a window of length s shifted by one.
    """
    s = family.cells_per_side(j)
    origin = -1 if s > 1 else 0
    return ndimage.maximum_filter(per_center, size=s, mode="constant", cval=-np.inf, origin=origin)


def iter_blocks(
    values: np.ndarray, family: CubeFamily, j: int, chunk_elements: int = BLOCK_CHUNK_ELEMENTS
) -> Iterator[tuple]:
    """
    Yield (center_indices, rows) chunks: rows[k] are the s^n values of the
    scale-j cube at center_indices[k], zero-padded outside the box.
    """
    s = family.cells_per_side(j)
    dimension = values.ndim
    padded = np.pad(values, s, mode="constant", constant_values=0.0)
    windows = sliding_window_view(padded, (s,) * dimension)
    centers = family.center_indices(j)
    # window starting at padded index c - s/2 + s covers cube cells c - s/2 .. c + s/2 - 1
    starts = centers - s // 2 + s
    per_chunk = max(1, chunk_elements // (s ** dimension))
    for begin in range(0, len(centers), per_chunk):
        chunk = starts[begin : begin + per_chunk]
        rows = windows[tuple(chunk.T)].reshape(len(chunk), -1)
        yield centers[begin : begin + per_chunk], rows


def scatter_centers(grid: GridSpec, centers: np.ndarray, data: np.ndarray) -> np.ndarray:
    """Place per-center values on the grid, -inf elsewhere."""
    out = np.full(grid.shape, -np.inf)
    out[tuple(centers.T)] = data
    return out


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Nodes y_i on S^(n-1) with weights sigma_i summing to sigma(S^(n-1))."""

    dimension: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.weights)

    @property
    def total_measure(self) -> float:
        return float(np.sum(self.weights))


def sphere_quadrature(dimension: int, node_count: int = 64, polar_nodes: Optional[int] = None) -> SphereQuadrature:
    """
    Quadrature on the unit sphere.

    n = 1: the two points +-1 with unit weights.
    n = 2: equi-angular nodes, weights 2*pi/M (exact for trigonometric
    polynomials of degree < M).
    n = 3: Gauss-Legendre in cos(theta) times equi-angular phi; M must
    factor as polar_nodes * azimuthal_nodes.
    """
    if dimension == 1:
        return SphereQuadrature(1, np.array([[-1.0], [1.0]]), np.array([1.0, 1.0]))
    if dimension == 2:
        if node_count < 8:
            raise ValueError(f"circle quadrature needs at least 8 nodes, got {node_count}")
        theta = 2.0 * np.pi * np.arange(node_count) / node_count
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return SphereQuadrature(2, nodes, np.full(node_count, 2.0 * np.pi / node_count))
    if dimension == 3:
        if polar_nodes is None:
            # divisor of M closest to sqrt(M/2): about twice as many azimuths as rings
            target = math.sqrt(node_count / 2.0)
            divisors = [d for d in range(2, node_count + 1) if node_count % d == 0]
            polar_nodes = min(divisors, key=lambda d: abs(d - target)) if divisors else 2
        if node_count % polar_nodes != 0:
            raise ValueError(f"{node_count} nodes do not factor into {polar_nodes} polar rings")
        azimuthal = node_count // polar_nodes
        if polar_nodes < 2 or azimuthal < 4:
            raise ValueError(f"sphere quadrature too coarse: {polar_nodes} rings x {azimuthal} azimuths")
        cos_theta, polar_weights = leggauss(polar_nodes)
        phi = 2.0 * np.pi * (np.arange(azimuthal) + 0.5) / azimuthal
        ct, ph = np.meshgrid(cos_theta, phi, indexing="ij")
        st = np.sqrt(1.0 - ct ** 2)
        nodes = np.stack([(st * np.cos(ph)).ravel(), (st * np.sin(ph)).ravel(), ct.ravel()], axis=1)
        weights = np.repeat(polar_weights * 2.0 * np.pi / azimuthal, azimuthal)
        return SphereQuadrature(3, nodes, weights)
    raise ValueError(f"sphere quadrature supports n = 1, 2, 3, got {dimension}")
