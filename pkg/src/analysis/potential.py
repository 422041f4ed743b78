"""
Riesz potentials I_alpha of grid fields and of finite discrete measures.

I_alpha f(x) = int f(y) |x - y|^(alpha - n) dy,   0 < alpha < n.

The grid version is a discrete convolution with the kernel |z|^(alpha-n)
sampled on integer cell offsets. The cell holding the singularity uses
the exact cell average of |z|^(alpha-n): by homogeneity the integral over
a cell of side h is h^alpha times the unit-cell integral, and the unit
cell integral solves a self-similar equation after a 16x subdivision
(the central 2^n subcells form a cell of side 1/8).

Evaluation goes through scipy.signal.fftconvolve when the evaluation
grid is aligned with the field grid, and through a chunked direct sum
otherwise. The direct sum also certifies the fast path.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve

from src.analysis.field import GridSpec, ScalarField

logger = logging.getLogger(__name__)

SUBCELL_REFINEMENT = 16
DIRECT_CHUNK_ELEMENTS = 1 << 22
COINCIDENCE_TOLERANCE = 1e-12


def _check_order(alpha: float, dimension: int):
    if not 0 < alpha < dimension:
        raise ValueError(f"Riesz potential order must satisfy 0 < alpha < n = {dimension}, got alpha={alpha}")


def singular_cell_integral(alpha: float, dimension: int, spacing: float) -> float:
    """int over [-h/2, h/2]^n of |z|^(alpha - n) dz."""
    _check_order(alpha, dimension)
    if dimension == 1:
        return 2.0 * (spacing / 2.0) ** alpha / alpha
    m = SUBCELL_REFINEMENT
    axis = (np.arange(m) + 0.5) / m - 0.5
    mesh = np.meshgrid(*([axis] * dimension), indexing="ij")
    radius = np.sqrt(sum(c ** 2 for c in mesh))
    central = np.all([np.abs(c) < 1.0 / m for c in mesh], axis=0)
    outer = np.sum(radius[~central] ** (alpha - dimension)) / m ** dimension
    unit = outer / (1.0 - (2.0 / m) ** alpha)
    return float(unit * spacing ** alpha)


def riesz_kernel(alpha: float, dimension: int, spacing: float, reach: int) -> np.ndarray:
    """Kernel weights |k h|^(alpha-n) h^n on offsets |k_j| <= reach, singular cell averaged."""
    _check_order(alpha, dimension)
    axis = np.arange(-reach, reach + 1) * spacing
    mesh = np.meshgrid(*([axis] * dimension), indexing="ij")
    radius = np.sqrt(sum(c ** 2 for c in mesh))
    kernel = np.zeros(radius.shape)
    off_center = radius > 0
    kernel[off_center] = radius[off_center] ** (alpha - dimension) * spacing ** dimension
    kernel[(reach,) * dimension] = singular_cell_integral(alpha, dimension, spacing)
    return kernel


def riesz_potential_array(values: np.ndarray, alpha: float, spacing: float) -> np.ndarray:
    """I_alpha of grid samples (zero outside the array), evaluated on the same cells."""
    reach = max(values.shape) - 1
    kernel = riesz_kernel(alpha, values.ndim, spacing, reach)
    return fftconvolve(values, kernel, mode="same")


def _direct_potential(f: ScalarField, alpha: float, targets: np.ndarray) -> np.ndarray:
    grid = f.grid
    n = grid.dimension
    support = np.abs(f.values) > 0
    sources = grid.points()[support.ravel()]
    masses = f.values[support] * grid.cell_volume
    center_mass = singular_cell_integral(alpha, n, grid.spacing) / grid.cell_volume
    result = np.zeros(len(targets))
    if len(sources) == 0:
        return result
    per_chunk = max(1, DIRECT_CHUNK_ELEMENTS // len(sources))
    for begin in range(0, len(targets), per_chunk):
        chunk = targets[begin : begin + per_chunk]
        distance = np.sqrt(((chunk[:, None, :] - sources[None, :, :]) ** 2).sum(axis=2))
        coincident = distance < COINCIDENCE_TOLERANCE * grid.spacing
        safe = np.where(coincident, 1.0, distance)
        kernel = np.where(coincident, center_mass, safe ** (alpha - n))
        result[begin : begin + per_chunk] = kernel @ masses
    return result


def riesz_potential(
    f: ScalarField, alpha: float, eval_grid: Optional[GridSpec] = None, method: str = "auto"
) -> ScalarField:
    """
    I_alpha f on eval_grid (defaults to the field's grid).

    Args:
        f: Compactly supported field
        alpha: Order, 0 < alpha < n
        eval_grid: Where to evaluate; must share n
        method: "fft", "direct" or "auto" (fft whenever the grids are aligned)

    Returns:
        ScalarField on eval_grid
    """
    grid = f.grid
    _check_order(alpha, grid.dimension)
    target = eval_grid or grid
    if target.dimension != grid.dimension:
        raise ValueError(f"evaluation grid has dimension {target.dimension}, field has {grid.dimension}")

    larger = None
    if method in ("auto", "fft"):
        for candidate, inner in ((target, grid), (grid, target)):
            try:
                inner.embedding_offset(candidate)
                larger = candidate
                break
            except ValueError:
                continue
        if larger is None and method == "fft":
            raise ValueError("fft evaluation needs an evaluation grid aligned with the field grid")
    elif method != "direct":
        raise ValueError(f"unknown method '{method}', expected 'fft', 'direct' or 'auto'")

    if larger is None:
        logger.debug(f"I_{alpha}: direct quadrature onto {target.cells}^{target.dimension} points")
        values = _direct_potential(f, alpha, target.points()).reshape(target.shape)
        return ScalarField(target, values)

    source = f.embedded(larger) if larger is not grid else f
    full = riesz_potential_array(source.values, alpha, grid.spacing)
    if larger is target:
        return ScalarField(target, full)
    offset = target.embedding_offset(larger)
    window = tuple(slice(offset, offset + target.cells) for _ in range(target.dimension))
    return ScalarField(target, full[window])


def certify_fast_potential(f: ScalarField, alpha: float) -> float:
    """Relative max difference of the fft and direct evaluations on f's grid."""
    fast = riesz_potential(f, alpha, method="fft").values
    slow = riesz_potential(f, alpha, method="direct").values
    scale = max(float(np.max(np.abs(slow))), np.finfo(float).tiny)
    return float(np.max(np.abs(fast - slow)) / scale)


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite sum of point masses sum_i m_i delta_{y_i}."""

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        masses = np.asarray(self.masses, dtype=float).ravel()
        if points.shape[0] != masses.shape[0]:
            raise ValueError(f"{points.shape[0]} atoms but {masses.shape[0]} masses")
        if np.any(masses <= 0):
            raise ValueError("atom masses must be positive")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "masses", masses)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    def __len__(self) -> int:
        return len(self.masses)

    def restricted(self, region) -> "DiscreteMeasure":
        """Atoms inside a Cube (half-open) or Ball (closed)."""
        if hasattr(region, "side"):
            low = np.asarray(region.center) - region.side / 2.0
            high = np.asarray(region.center) + region.side / 2.0
            keep = np.all((self.points >= low) & (self.points < high), axis=1)
        else:
            keep = np.linalg.norm(self.points - np.asarray(region.center), axis=1) <= region.radius
        return DiscreteMeasure(self.points[keep].reshape(-1, self.dimension), self.masses[keep])

    def shifted(self, offset) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points + np.asarray(offset, dtype=float), self.masses)

    def mass_in_ball(self, center, radius: float) -> float:
        inside = np.linalg.norm(self.points - np.asarray(center, dtype=float), axis=1) <= radius
        return float(np.sum(self.masses[inside]))


def riesz_potential_measure(mu: DiscreteMeasure, alpha: float, grid: GridSpec) -> ScalarField:
    """I_alpha mu(x) = sum_i m_i |x - y_i|^(alpha - n) at every cell center."""
    if mu.dimension != grid.dimension:
        raise ValueError(f"measure lives in R^{mu.dimension}, grid in R^{grid.dimension}")
    _check_order(alpha, grid.dimension)
    targets = grid.points()
    values = np.zeros(len(targets))
    if len(mu) == 0:
        return ScalarField(grid, values.reshape(grid.shape))
    per_chunk = max(1, DIRECT_CHUNK_ELEMENTS // len(mu))
    for begin in range(0, len(targets), per_chunk):
        chunk = targets[begin : begin + per_chunk]
        distance = np.sqrt(((chunk[:, None, :] - mu.points[None, :, :]) ** 2).sum(axis=2))
        if np.any(distance < COINCIDENCE_TOLERANCE * grid.spacing):
            raise ValueError(
                "an atom sits on a cell center; move atoms off cell centers (e.g. onto cell corners)"
            )
        values[begin : begin + per_chunk] = distance ** (alpha - grid.dimension) @ mu.masses
    return ScalarField(grid, values.reshape(grid.shape))


def a1_power_weight(mu: DiscreteMeasure, alpha: float, r: float, grid: GridSpec) -> ScalarField:
    """(I_alpha mu)^r, an A_1 weight for 0 <= r < n/(n - alpha)."""
    if r < 0:
        raise ValueError(f"weight exponent r must be >= 0, got {r}")
    if len(mu) == 0:
        raise ValueError("the zero measure does not generate a weight")
    potential = riesz_potential_measure(mu, alpha, grid)
    return ScalarField(grid, potential.values ** r)


@dataclass
class KolmogorovEstimate:
    lhs: float
    rhs: float
    beyond_critical: bool

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else math.inf


def kolmogorov_local_estimate(mu: DiscreteMeasure, alpha: float, cube, r: float, grid: GridSpec) -> KolmogorovEstimate:
    """
    Both sides of (avg_Q I_alpha(1_{2Q} mu)^r)^(1/r) <= C inf_Q I_alpha mu.

    The bound holds for r below (n/alpha)' = n/(n - alpha); larger r is
    still evaluated but flagged.
    """
    n = grid.dimension
    _check_order(alpha, n)
    critical = n / (n - alpha)
    beyond = r >= critical
    if beyond:
        logger.warning(f"Kolmogorov estimate at r={r} >= critical exponent {critical:.4g}; no uniform bound expected")
    inside = cube.mask(grid)
    if not inside.any():
        raise ValueError(f"{cube} contains no cell center of the grid")
    rhs = float(riesz_potential_measure(mu, alpha, grid).values[inside].min())
    if r == 0:
        return KolmogorovEstimate(1.0, rhs, beyond)
    local = mu.restricted(cube.dilated(2.0))
    near = riesz_potential_measure(local, alpha, grid).values[inside]
    lhs = float(np.mean(near ** r) ** (1.0 / r))
    return KolmogorovEstimate(lhs, rhs, beyond)


def convolution_a1_check(g: ScalarField, alpha: float = 1.0, family=None) -> tuple:
    """
    Both sides of [I_alpha g]_{A_1} <= [|x|^(alpha-n)]_{A_1} for g >= 0.

    I_alpha g is an average of kernel translates; both constants run over
    the same cube family, so they agree up to the grid's loss of
    translation invariance near the box faces.

    Returns:
        (A_1 constant of I_alpha g, A_1 constant of the kernel)
    """
    # weights imports this module
    from src.analysis.weights import a1_constant

    if np.any(g.values < 0) or not np.any(g.values > 0):
        raise ValueError("the convolution check needs a nonnegative, nonzero g")
    n = g.grid.dimension
    _check_order(alpha, n)
    potential = riesz_potential(g, alpha)
    kernel = ScalarField(g.grid, g.grid.distance_from() ** (alpha - n))
    lhs = a1_constant(potential, family).value
    rhs = a1_constant(kernel, family).value
    logger.info(f"A_1 of I_{alpha:g} g: {lhs:.4f}, A_1 of |x|^({alpha:g}-n): {rhs:.4f}")
    return lhs, rhs
