"""
Maximal operators over dyadic cube families and polar averages.

CUBE MAXIMAL FUNCTIONS
M_gauge f(x) = sup over family cubes Q containing x of l(Q)^alpha * ||f||_{gauge,Q}

Gauges:
- mean:     avg_Q |f|                     (alpha > 0 gives M_alpha)
- power:    (avg_Q |f|^r)^(1/r)
- lorentz:  ||f||_{L^{p,q}(Q, dx/|Q|)}
- orlicz:   Luxemburg average ||f||_{Phi,Q}

Mean and power gauges are box filters. Lorentz and Orlicz gauges need
every cube's values, so cubes are materialized in chunks; thinning the
center lattice (CubeFamily.stride_shift) keeps them affordable at large
scales.

POLAR MAXIMAL FUNCTIONS
M_Omega, the spherical maximal function and measure maximal functions
are suprema over radii t of translation stencils, one FFT per radius.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.analysis.field import ScalarField
from src.analysis.geometry import (
    CubeFamily,
    SphereQuadrature,
    containing_supremum,
    iter_blocks,
    scale_averages,
    scatter_centers,
)
from src.analysis.lorentz import LorentzIndex, YoungFunction, lorentz_norm_rows, luxemburg_rows
from src.analysis.potential import DiscreteMeasure
from src.analysis.singular import SphereFunction
from src.analysis.stencils import apply_stencil

logger = logging.getLogger(__name__)

MAX_ITERATES = 4


@dataclass(frozen=True)
class MaximalGauge:
    """How a cube is measured: variant plus its parameters."""

    variant: str
    r: float = 1.0
    lorentz: Optional[LorentzIndex] = None
    young: Optional[YoungFunction] = None
    alpha: float = 0.0

    def __post_init__(self):
        if self.variant not in ("mean", "power", "lorentz", "orlicz"):
            raise ValueError(f"unknown gauge variant '{self.variant}'")
        if self.variant == "power" and not self.r > 0:
            raise ValueError(f"power gauge needs r > 0, got {self.r}")
        if self.variant == "lorentz" and self.lorentz is None:
            raise ValueError("lorentz gauge needs a LorentzIndex")
        if self.variant == "orlicz" and self.young is None:
            raise ValueError("orlicz gauge needs a YoungFunction")
        if self.alpha < 0:
            raise ValueError(f"fractional order must be >= 0, got {self.alpha}")

    @classmethod
    def mean(cls, alpha: float = 0.0) -> "MaximalGauge":
        return cls("mean", alpha=alpha)

    @classmethod
    def power(cls, r: float) -> "MaximalGauge":
        return cls("power", r=r)

    @classmethod
    def lorentz_gauge(cls, p: float, q: float) -> "MaximalGauge":
        return cls("lorentz", lorentz=LorentzIndex(p, q))

    @classmethod
    def orlicz(cls, young: YoungFunction) -> "MaximalGauge":
        return cls("orlicz", young=young)

    @property
    def label(self) -> str:
        if self.variant == "mean":
            return "M" if self.alpha == 0 else f"M_{self.alpha:g}"
        if self.variant == "power":
            return f"M_L^{self.r:g}"
        if self.variant == "lorentz":
            return f"M_L^({self.lorentz.p:g},{self.lorentz.q:g})"
        return f"M_[{self.young.label}]"


def gauge_per_center(values: np.ndarray, gauge: MaximalGauge, family: CubeFamily, j: int) -> np.ndarray:
    """Gauge of |values| on every admissible scale-j cube, -inf elsewhere."""
    magnitude = np.abs(values)
    if gauge.variant == "mean":
        return scale_averages(magnitude, family, j)
    if gauge.variant == "power":
        means = scale_averages(magnitude ** gauge.r, family, j)
        # uniform_filter can leave tiny negative round-off
        return np.where(np.isfinite(means), np.maximum(means, 0.0) ** (1.0 / gauge.r), -np.inf)

    out = np.full(values.shape, -np.inf)
    for centers, rows in iter_blocks(magnitude, family, j):
        data = np.zeros(len(rows))
        live = rows.max(axis=1) > 0
        if live.any():
            if gauge.variant == "lorentz":
                data[live] = lorentz_norm_rows(rows[live], gauge.lorentz)
            else:
                data[live] = luxemburg_rows(rows[live], gauge.young)
        out[tuple(centers.T)] = data
    return out


def cube_maximal(f: ScalarField, gauge: MaximalGauge, family: CubeFamily) -> ScalarField:
    """
    sup over family cubes Q containing x of l(Q)^alpha * gauge(f, Q).

    Args:
        f: Field (zero outside the box)
        gauge: Cube gauge
        family: Cube family on f's grid

    Returns:
        ScalarField of the maximal function at every cell center
    """
    if family.grid != f.grid:
        raise ValueError("cube family and field live on different grids")
    best = np.full(f.grid.shape, -np.inf)
    for j in family.scales:
        per_center = gauge_per_center(f.values, gauge, family, j)
        if gauge.alpha:
            per_center = per_center * family.side(j) ** gauge.alpha
        best = np.maximum(best, containing_supremum(per_center, family, j))
    if not np.all(np.isfinite(best)):
        raise RuntimeError("cube family leaves cells uncovered")
    return ScalarField(f.grid, best)


def hardy_littlewood(f: ScalarField, family: CubeFamily) -> ScalarField:
    return cube_maximal(f, MaximalGauge.mean(), family)


def fractional_maximal(f: ScalarField, alpha: float, family: CubeFamily) -> ScalarField:
    """M_alpha f = sup l(Q)^alpha avg_Q |f|; alpha = 1 is the gradient maximal function's operator."""
    if not 0 <= alpha < f.grid.dimension:
        raise ValueError(f"fractional order must satisfy 0 <= alpha < n, got {alpha}")
    return cube_maximal(f, MaximalGauge.mean(alpha), family)


def orlicz_maximal(f: ScalarField, young: YoungFunction, family: CubeFamily) -> ScalarField:
    return cube_maximal(f, MaximalGauge.orlicz(young), family)


def iterated_maximal(f: ScalarField, k: int, family: CubeFamily) -> ScalarField:
    """M^k f; M^0 f = |f|."""
    if k < 0:
        raise ValueError(f"iteration count must be >= 0, got {k}")
    if k > MAX_ITERATES:
        raise ValueError(f"iteration count {k} exceeds the supported maximum {MAX_ITERATES}")
    current = f.abs()
    for _ in range(k):
        current = hardy_littlewood(current, family)
    return current


def sharp_maximal(f: ScalarField, family: CubeFamily) -> ScalarField:
    """M# f = sup over Q containing x of avg_Q |f - f_Q|."""
    if family.grid != f.grid:
        raise ValueError("cube family and field live on different grids")
    best = np.full(f.grid.shape, -np.inf)
    for j in family.scales:
        centers_all = []
        oscillation = []
        for centers, rows in iter_blocks(f.values, family, j):
            means = rows.mean(axis=1, keepdims=True)
            centers_all.append(centers)
            oscillation.append(np.mean(np.abs(rows - means), axis=1))
        per_center = scatter_centers(f.grid, np.concatenate(centers_all), np.concatenate(oscillation))
        best = np.maximum(best, containing_supremum(per_center, family, j))
    return ScalarField(f.grid, best)


def _radius_grid(f: ScalarField, t_grid: Optional[Sequence[float]]) -> np.ndarray:
    h = f.grid.spacing
    if t_grid is None:
        limit = 2.0 * f.grid.half_width
        count = int(math.floor(2.0 * math.log2(limit / h)))
        return h * 2.0 ** (np.arange(0, count + 1) / 2.0)
    radii = np.asarray(t_grid, dtype=float)
    if radii.size == 0 or np.any(radii <= 0):
        raise ValueError("radius grid must be a nonempty set of positive radii")
    return radii


def rough_maximal(
    f: ScalarField, omega: SphereFunction, t_grid: Optional[Sequence[float]] = None
) -> ScalarField:
    """
    M_Omega f(x) = sup_t t^(-n) int_{|y| < t} |Omega(y')| |f(x - y)| dy.

    Radial midpoints on [0, t] with step at most h, times the sphere nodes.
    """
    if f.grid.dimension != omega.dimension:
        raise ValueError("field and Omega dimensions differ")
    n = f.grid.dimension
    h = f.grid.spacing
    magnitude = np.abs(f.values)
    weights_sphere = omega.quadrature.weights * np.abs(omega.values)
    best = np.zeros(f.grid.shape)
    for t in _radius_grid(f, t_grid):
        count = max(4, int(math.ceil(t / h)))
        step = t / count
        radii = (np.arange(count) + 0.5) * step
        displacements = (radii[:, None, None] * omega.quadrature.nodes[None, :, :]).reshape(-1, n)
        weights = (radii[:, None] ** (n - 1) * step * weights_sphere[None, :]).ravel() / t ** n
        best = np.maximum(best, apply_stencil(magnitude, displacements, weights, h))
    return ScalarField(f.grid, best)


def sphere_maximal(
    f: ScalarField, quadrature: SphereQuadrature, t_grid: Optional[Sequence[float]] = None
) -> ScalarField:
    """sup_t | sum_i sigma_i f(x - t y_i) |, the unnormalized spherical maximal function."""
    if f.grid.dimension != quadrature.dimension:
        raise ValueError("field and quadrature dimensions differ")
    best = np.zeros(f.grid.shape)
    for t in _radius_grid(f, t_grid):
        sums = apply_stencil(f.values, t * quadrature.nodes, quadrature.weights, f.grid.spacing)
        best = np.maximum(best, np.abs(sums))
    return ScalarField(f.grid, best)


def measure_maximal(
    f: ScalarField, mu: DiscreteMeasure, t_grid: Optional[Sequence[float]] = None
) -> ScalarField:
    """M_mu f(x) = sup_t sum_i m_i |f(x + t y_i)|."""
    if len(mu) == 0:
        raise ValueError("measure maximal function of the zero measure")
    if mu.dimension != f.grid.dimension:
        raise ValueError("field and measure dimensions differ")
    magnitude = np.abs(f.values)
    best = np.zeros(f.grid.shape)
    for t in _radius_grid(f, t_grid):
        best = np.maximum(best, apply_stencil(magnitude, -t * mu.points, mu.masses, f.grid.spacing))
    return ScalarField(f.grid, best)


def measure_growth_constant(
    mu: DiscreteMeasure, exponent: float, radii: Sequence[float], centers: Optional[np.ndarray] = None
) -> float:
    """
    sup over sampled centers x and radii r of mu(B(x, r)) / r^exponent.

    Centers default to the atoms; the measure has growth of order
    `exponent` when this stays bounded as the sampling is refined.
    """
    centers = mu.points if centers is None else np.atleast_2d(centers)
    best = 0.0
    for x in centers:
        for r in radii:
            best = max(best, mu.mass_in_ball(x, r) / r ** exponent)
    return best
