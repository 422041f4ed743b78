"""
Rough homogeneous singular integrals and their classical instances.

T_Omega f(x) = pv int Omega(y') |y|^(-n) f(x - y) dy, with Omega sampled at
the nodes of a sphere quadrature.

POLAR QUADRATURE
Writing y = r*y', the truncated operator is
    T^t f(x) = int_t^inf sum_i sigma_i Omega_i f(x - r y_i) dr/r.
The radial integral runs over log-spaced nodes, 8 per octave by default,
grouped in half-octave bands that start at h/2. Truncation levels
t = h*2^(j/2) fall on band edges, so every T^t is a suffix sum of band
contributions and T* is a running maximum over those sums. Each band is
one translation stencil (see stencils.py).

Radii beyond the box diameter contribute nothing: x and x - r*y' cannot
both lie in the box.

The Riesz transforms (Omega = y'_j) and the Beurling transform (n = 2,
Omega = -(1/pi) e^(-2 i theta), split into real and imaginary parts) are
the kernels used by the identity checks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.signal import fftconvolve

from src.analysis.field import GridSpec, ScalarField, gradient
from src.analysis.geometry import SphereQuadrature, sphere_area, sphere_quadrature, unit_ball_volume
from src.analysis.lorentz import LorentzIndex, lorentz_norm_from_samples
from src.analysis.stencils import apply_stencil

logger = logging.getLogger(__name__)

NODES_PER_OCTAVE = 8
MEAN_ZERO_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class SphereFunction:
    """Omega sampled at quadrature nodes."""

    quadrature: SphereQuadrature
    values: np.ndarray
    label: str = "omega"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if values.shape != (self.quadrature.node_count,):
            raise ValueError(f"{values.shape[0]} values for {self.quadrature.node_count} sphere nodes")
        if not np.all(np.isfinite(values)):
            raise ValueError("sphere function values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, quadrature: SphereQuadrature, fn: Callable[[np.ndarray], np.ndarray], label: str = "omega"):
        return cls(quadrature, fn(quadrature.nodes), label)

    @property
    def dimension(self) -> int:
        return self.quadrature.dimension

    @property
    def integral(self) -> float:
        return float(np.sum(self.quadrature.weights * self.values))

    @property
    def mean_zero(self) -> bool:
        scale = float(np.sum(self.quadrature.weights * np.abs(self.values)))
        return abs(self.integral) <= MEAN_ZERO_TOLERANCE * max(scale, np.finfo(float).tiny)

    def projected(self) -> "SphereFunction":
        """Omega minus its sigma-mean."""
        mean = self.integral / self.quadrature.total_measure
        return SphereFunction(self.quadrature, self.values - mean, self.label)

    def abs(self) -> "SphereFunction":
        return SphereFunction(self.quadrature, np.abs(self.values), self.label)

    def lr_norm(self, r: float) -> float:
        if not r > 0:
            raise ValueError(f"exponent must be positive, got {r}")
        if math.isinf(r):
            return float(np.max(np.abs(self.values)))
        return float(np.sum(self.quadrature.weights * np.abs(self.values) ** r) ** (1.0 / r))

    @cached_property
    def weak_norm(self) -> float:
        """||Omega||_{L^{n,inf}(S^(n-1))}."""
        return sphere_weak_norm(self)


def project_mean_zero(omega: SphereFunction) -> SphereFunction:
    return omega.projected()


def sphere_weak_norm(omega: SphereFunction, p: Optional[float] = None) -> float:
    """||Omega||_{L^{p,inf}} with respect to the quadrature measure; p defaults to n."""
    exponent = float(omega.dimension if p is None else p)
    return lorentz_norm_from_samples(omega.values, omega.quadrature.weights, LorentzIndex(exponent, math.inf))


def box_reach(grid: GridSpec) -> float:
    """Diameter of the box: no displacement beyond it connects two box points."""
    return 2.0 * grid.half_width * math.sqrt(grid.dimension)


def half_octave_bands(start: float, stop: float) -> List[Tuple[float, float]]:
    """Consecutive [start*2^(k/2), start*2^((k+1)/2)] bands, the last clipped at stop."""
    bands = []
    low = start
    while low < stop * (1.0 - 1e-12):
        high = min(low * math.sqrt(2.0), stop)
        bands.append((low, high))
        low = low * math.sqrt(2.0)
    return bands


def _log_nodes(low: float, high: float, nodes_per_octave: int) -> Tuple[np.ndarray, float]:
    count = max(1, int(math.ceil(nodes_per_octave * math.log2(high / low) - 1e-9)))
    step = math.log(high / low) / count
    radii = low * np.exp((np.arange(count) + 0.5) * step)
    return radii, step


def _band_stencil(omega: SphereFunction, low: float, high: float, nodes_per_octave: int):
    radii, step = _log_nodes(low, high, nodes_per_octave)
    nodes = omega.quadrature.nodes
    displacements = (radii[:, None, None] * nodes[None, :, :]).reshape(-1, omega.dimension)
    weights = np.tile(step * omega.quadrature.weights * omega.values, len(radii))
    return displacements, weights


def _check_pair(f: ScalarField, omega: SphereFunction):
    if f.grid.dimension != omega.dimension:
        raise ValueError(f"field lives in R^{f.grid.dimension} but Omega on S^{omega.dimension - 1}")


def _band_contributions(
    f: ScalarField, omega: SphereFunction, start: float, nodes_per_octave: int, method: str
) -> Tuple[List[Tuple[float, float]], List[np.ndarray]]:
    bands = half_octave_bands(start, box_reach(f.grid))
    parts = []
    for low, high in bands:
        displacements, weights = _band_stencil(omega, low, high, nodes_per_octave)
        parts.append(apply_stencil(f.values, displacements, weights, f.grid.spacing, method))
    return bands, parts


def truncated_rough(
    f: ScalarField,
    omega: SphereFunction,
    t: float,
    nodes_per_octave: int = NODES_PER_OCTAVE,
    method: str = "fft",
) -> ScalarField:
    """
    T^t f = int_{|y| > t} Omega(y') |y|^(-n) f(x - y) dy at every cell center.

    t = h/2 is the principal-value surrogate. Smaller t would resolve
    nothing the grid can see and is rejected.
    """
    _check_pair(f, omega)
    h = f.grid.spacing
    if t < h / 2.0 * (1.0 - 1e-12):
        raise ValueError(f"truncation t={t} is below half the grid spacing h/2={h / 2.0}")
    _, parts = _band_contributions(f, omega, t, nodes_per_octave, method)
    total = np.sum(parts, axis=0) if parts else np.zeros(f.grid.shape)
    return ScalarField(f.grid, total)


def annulus_contributions(
    f: ScalarField, omega: SphereFunction, t: float, nodes_per_octave: int = NODES_PER_OCTAVE
) -> List[ScalarField]:
    """Contributions of the dyadic annuli t*2^k < |y| <= t*2^(k+1); they sum to T^t f."""
    _check_pair(f, omega)
    _, parts = _band_contributions(f, omega, t, nodes_per_octave, "fft")
    return [ScalarField(f.grid, sum(parts[k : k + 2])) for k in range(0, len(parts), 2)]


def truncation_levels(
    f: ScalarField, omega: SphereFunction, nodes_per_octave: int = NODES_PER_OCTAVE
) -> Tuple[np.ndarray, List[ScalarField]]:
    """
    T^t f for every t = h*2^(j/2) >= h/2 below the box diameter.

    Returns:
        (t_values, fields) in increasing t
    """
    _check_pair(f, omega)
    if not omega.mean_zero:
        logger.warning(f"{omega.label} does not have mean zero; truncations need not converge as t -> 0")
    bands, parts = _band_contributions(f, omega, f.grid.spacing / 2.0, nodes_per_octave, "fft")
    t_values = np.array([low for low, _ in bands])
    fields = []
    running = np.zeros(f.grid.shape)
    for part in reversed(parts):
        running = running + part
        fields.append(ScalarField(f.grid, running))
    return t_values, fields[::-1]


def maximal_rough(f: ScalarField, omega: SphereFunction, nodes_per_octave: int = NODES_PER_OCTAVE) -> ScalarField:
    """T*_Omega f = sup_t |T^t f| over the truncation grid."""
    _, fields = truncation_levels(f, omega, nodes_per_octave)
    return ScalarField(f.grid, np.max([np.abs(level.values) for level in fields], axis=0))


def riesz_kernel_function(quadrature: SphereQuadrature, component: int) -> SphereFunction:
    if not 0 <= component < quadrature.dimension:
        raise ValueError(f"Riesz component must be in 0..{quadrature.dimension - 1}, got {component}")
    return SphereFunction(quadrature, quadrature.nodes[:, component], f"riesz-{component + 1}")


def riesz_transform(
    f: ScalarField,
    component: int,
    mode: str = "pv",
    quadrature: Optional[SphereQuadrature] = None,
    nodes_per_octave: int = NODES_PER_OCTAVE,
) -> ScalarField:
    """
    R_j f with Omega(y') = y'_j (unnormalized, so R_j = (1-n)^(-1) d_j I_1).

    mode "pv" gives the principal value, "maximal" gives R*_j.
    """
    quadrature = quadrature or sphere_quadrature(f.grid.dimension)
    omega = riesz_kernel_function(quadrature, component)
    if mode == "pv":
        return truncated_rough(f, omega, f.grid.spacing / 2.0, nodes_per_octave)
    if mode == "maximal":
        return maximal_rough(f, omega, nodes_per_octave)
    raise ValueError(f"unknown mode '{mode}', expected 'pv' or 'maximal'")


def beurling_kernel_functions(quadrature: SphereQuadrature) -> Tuple[SphereFunction, SphereFunction]:
    """Real and imaginary parts of -(1/pi) e^(-2 i theta) on the circle."""
    if quadrature.dimension != 2:
        raise ValueError("the Beurling transform lives in the plane (n = 2)")
    y1, y2 = quadrature.nodes[:, 0], quadrature.nodes[:, 1]
    cos2, sin2 = y1 ** 2 - y2 ** 2, 2.0 * y1 * y2
    return (
        SphereFunction(quadrature, -cos2 / math.pi, "beurling-re"),
        SphereFunction(quadrature, sin2 / math.pi, "beurling-im"),
    )


def _complex_combination(a_re, a_im, b_re, b_im):
    return a_re - b_im, a_im + b_re


def beurling(
    f_re: ScalarField,
    f_im: Optional[ScalarField] = None,
    mode: str = "pv",
    quadrature: Optional[SphereQuadrature] = None,
    nodes_per_octave: int = NODES_PER_OCTAVE,
) -> Tuple[ScalarField, ScalarField]:
    """
    Beurling transform S f of a complex field given as (real, imaginary) parts.

    mode "pv" returns (Re S f, Im S f); mode "maximal" returns (S* f, 0)
    where S* f = sup_t |S^t f|.
    """
    if f_re.grid.dimension != 2:
        raise ValueError("the Beurling transform lives in the plane (n = 2)")
    f_im = f_im or ScalarField(f_re.grid, np.zeros(f_re.grid.shape))
    quadrature = quadrature or sphere_quadrature(2)
    k_re, k_im = beurling_kernel_functions(quadrature)

    if mode == "pv":
        t = f_re.grid.spacing / 2.0
        rr = truncated_rough(f_re, k_re, t, nodes_per_octave).values
        ii = truncated_rough(f_im, k_im, t, nodes_per_octave).values
        ri = truncated_rough(f_im, k_re, t, nodes_per_octave).values
        ir = truncated_rough(f_re, k_im, t, nodes_per_octave).values
        return ScalarField(f_re.grid, rr - ii), ScalarField(f_re.grid, ri + ir)
    if mode == "maximal":
        _, rr = truncation_levels(f_re, k_re, nodes_per_octave)
        _, ii = truncation_levels(f_im, k_im, nodes_per_octave)
        _, ri = truncation_levels(f_im, k_re, nodes_per_octave)
        _, ir = truncation_levels(f_re, k_im, nodes_per_octave)
        modulus = np.zeros(f_re.grid.shape)
        for a, b, c, d in zip(rr, ii, ri, ir):
            modulus = np.maximum(modulus, np.hypot(a.values - b.values, c.values + d.values))
        return ScalarField(f_re.grid, modulus), ScalarField(f_re.grid, np.zeros(f_re.grid.shape))
    raise ValueError(f"unknown mode '{mode}', expected 'pv' or 'maximal'")


def cauchy_transform(f_re: ScalarField, f_im: Optional[ScalarField] = None) -> Tuple[ScalarField, ScalarField]:
    """
    C f(z) = (1/pi) int f(zeta) / (z - zeta) dA(zeta), Cartesian midpoint sum.

    The kernel is odd, so the singular cell contributes zero.
    """
    grid = f_re.grid
    if grid.dimension != 2:
        raise ValueError("the Cauchy transform lives in the plane (n = 2)")
    f_im = f_im or ScalarField(grid, np.zeros(grid.shape))
    reach = grid.cells - 1
    axis = np.arange(-reach, reach + 1) * grid.spacing
    x, y = np.meshgrid(axis, axis, indexing="ij")
    r2 = x ** 2 + y ** 2
    r2[reach, reach] = 1.0
    k_re = x / (math.pi * r2) * grid.cell_volume
    k_im = -y / (math.pi * r2) * grid.cell_volume
    k_re[reach, reach] = 0.0
    k_im[reach, reach] = 0.0

    def conv(values, kernel):
        return fftconvolve(values, kernel, mode="same")

    re = conv(f_re.values, k_re) - conv(f_im.values, k_im)
    im = conv(f_re.values, k_im) + conv(f_im.values, k_re)
    return ScalarField(grid, re), ScalarField(grid, im)


def complex_derivative(u: ScalarField, v: Optional[ScalarField] = None) -> Tuple[ScalarField, ScalarField]:
    """d/dz (u + i v) = ((u_x + v_y) + i (v_x - u_y)) / 2."""
    if u.grid.dimension != 2:
        raise ValueError("the complex derivative needs n = 2")
    v = v or ScalarField(u.grid, np.zeros(u.grid.shape))
    du = gradient(u).components
    dv = gradient(v).components
    re = 0.5 * (du[0].values + dv[1].values)
    im = 0.5 * (dv[0].values - du[1].values)
    return ScalarField(u.grid, re), ScalarField(u.grid, im)


def kernel_convolution_oracle(f: ScalarField, omega: SphereFunction, t: float) -> ScalarField:
    """
    T^t f by a Cartesian midpoint sum over cells with |z| > t.

    Omega is interpolated between nodes: linearly in angle on the circle,
    nearest node elsewhere. An independent discretization of the polar
    quadrature, used as its oracle.
    """
    _check_pair(f, omega)
    grid = f.grid
    n = grid.dimension
    reach = grid.cells - 1
    axis = np.arange(-reach, reach + 1) * grid.spacing
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    radius = np.sqrt(sum(c ** 2 for c in mesh))
    outside = radius > t
    kernel = np.zeros(radius.shape)
    directions = np.stack([c[outside] / radius[outside] for c in mesh], axis=1)
    kernel[outside] = _interpolate_sphere(omega, directions) * radius[outside] ** (-n) * grid.cell_volume
    return ScalarField(grid, fftconvolve(f.values, kernel, mode="same"))


def _interpolate_sphere(omega: SphereFunction, directions: np.ndarray) -> np.ndarray:
    nodes = omega.quadrature.nodes
    if omega.dimension == 2:
        node_angles = np.mod(np.arctan2(nodes[:, 1], nodes[:, 0]), 2.0 * math.pi)
        order = np.argsort(node_angles)
        angles = np.concatenate([node_angles[order], node_angles[order][:1] + 2.0 * math.pi])
        values = np.concatenate([omega.values[order], omega.values[order][:1]])
        wanted = np.mod(np.arctan2(directions[:, 1], directions[:, 0]), 2.0 * math.pi)
        wanted = np.where(wanted < angles[0], wanted + 2.0 * math.pi, wanted)
        return np.interp(wanted, angles, values)
    nearest = np.argmax(directions @ nodes.T, axis=1)
    return omega.values[nearest]


def spherical_mean_identity(
    f: ScalarField, quadrature: SphereQuadrature, t: float, nodes_per_octave: int = NODES_PER_OCTAVE
) -> Tuple[ScalarField, ScalarField]:
    """
    Both sides of  sum_i sigma_i f(x - t y_i) = int_t^inf sum_i sigma_i grad f(x - r y_i) . y_i dr.

    Returns:
        (sphere sum, radial integral of the gradient)
    """
    grid = f.grid
    if quadrature.dimension != grid.dimension:
        raise ValueError("quadrature and field dimensions differ")
    lhs = apply_stencil(f.values, t * quadrature.nodes, quadrature.weights, grid.spacing)
    components = gradient(f).components
    rhs = np.zeros(grid.shape)
    for low, high in half_octave_bands(t, box_reach(grid)):
        radii, step = _log_nodes(low, high, nodes_per_octave)
        displacements = (radii[:, None, None] * quadrature.nodes[None, :, :]).reshape(-1, grid.dimension)
        for j, component in enumerate(components):
            weights = (step * radii[:, None] * quadrature.weights[None, :] * quadrature.nodes[None, :, j]).ravel()
            rhs += apply_stencil(component.values, displacements, weights, grid.spacing)
    return ScalarField(grid, lhs), ScalarField(grid, rhs)


def ball_weak_norm_identity(omega: SphereFunction, k: int = 0, radial_shells: int = 64) -> Tuple[float, float]:
    """
    Both sides of ||Omega(y')||_{L^{n,inf}(B_k, dy/|B_k|)} = c_n ||Omega||_{L^{n,inf}(S)},
    c_n = sigma(S^(n-1))^(-1/n), on the ball of radius 2^k.

    Shell measures are exact: sigma_i (r_b^n - r_a^n) / n.
    """
    n = omega.dimension
    radius = 2.0 ** k
    edges = np.linspace(0.0, radius, radial_shells + 1)
    shell = (edges[1:] ** n - edges[:-1] ** n) / n
    ball = unit_ball_volume(n) * radius ** n
    measures = (shell[:, None] * omega.quadrature.weights[None, :]).ravel() / ball
    samples = np.tile(omega.values, radial_shells)
    lhs = lorentz_norm_from_samples(samples, measures, LorentzIndex(float(n), math.inf))
    rhs = sphere_area(n) ** (-1.0 / n) * omega.weak_norm
    return lhs, rhs
