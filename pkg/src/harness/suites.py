"""
Seeded test suites: bumps, Omega functions, measures, weights and balls.

Every generator takes an explicit seed and draws from its own stream
(np.random.default_rng([seed, stream])), so the bump suite does not change
when the Omega suite is resized, and a report is reproducible from
(seed, grid, theta) alone.

Bump parameters are drawn relative to a reference half-width, not the
grid they are realized on: a domain sweep that grows R at fixed h sees
the same functions at every R.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.analysis.field import GridSpec, ScalarField, constant_field, make_bump
from src.analysis.geometry import Ball, SphereQuadrature
from src.analysis.lorentz import conjugate_exponent
from src.analysis.potential import DiscreteMeasure
from src.analysis.singular import SphereFunction
from src.utils.grid_io import read_grid_file

logger = logging.getLogger(__name__)

# Independent random streams per suite
BUMP_STREAM = 1
OMEGA_STREAM = 2
BALL_STREAM = 3
WEIGHT_STREAM = 4


@dataclass(frozen=True)
class ExponentSet:
    """
    Exponents of a Sobolev-type experiment.

    p' = p/(p-1), n' = n/(n-1) (inf for n = 1), p* = np/(n-p) for p < n.
    """

    dimension: int
    p: float
    q: Optional[float] = None
    alpha: float = 1.0

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if not self.p >= 1:
            raise ValueError(f"exponent p must be >= 1, got {self.p}")
        if not 0 < self.alpha < self.dimension:
            raise ValueError(f"alpha must satisfy 0 < alpha < n, got {self.alpha}")

    @property
    def p_prime(self) -> float:
        return conjugate_exponent(self.p) if self.p > 1 else math.inf

    @property
    def n_prime(self) -> float:
        return conjugate_exponent(self.dimension) if self.dimension > 1 else math.inf

    @property
    def p_star(self) -> float:
        if self.p >= self.dimension:
            raise ValueError(f"Sobolev exponent p* needs p < n, got p={self.p}, n={self.dimension}")
        return self.dimension * self.p / (self.dimension - self.p)


@dataclass(frozen=True)
class BumpSpec:
    field_id: str
    center: Tuple[float, ...]
    radius: float
    amplitude: float

    def realize(self, grid: GridSpec) -> ScalarField:
        return make_bump(grid, self.center, self.radius, self.amplitude)


def bump_suite(dimension: int, count: int, seed: int, half_width: float) -> List[BumpSpec]:
    """
    `count` bumps inside the box of half-width `half_width`.

    The first bump is centered at the origin with radius R/4; the others
    have radius in [R/8, R/4], centers with |c_j| <= R/4 and amplitude in
    [0.5, 2].
    """
    if count < 1:
        raise ValueError(f"bump suite needs at least one bump, got {count}")
    rng = np.random.default_rng([seed, BUMP_STREAM])
    specs = [BumpSpec("bump-0", (0.0,) * dimension, half_width / 4.0, 1.0)]
    for i in range(1, count):
        center = tuple(float(c) for c in rng.uniform(-half_width / 4.0, half_width / 4.0, dimension))
        radius = float(rng.uniform(half_width / 8.0, half_width / 4.0))
        amplitude = float(rng.uniform(0.5, 2.0))
        specs.append(BumpSpec(f"bump-{i}", center, radius, amplitude))
    return specs


def _harmonic_terms(nodes: np.ndarray, degree: int, rng: np.random.Generator) -> np.ndarray:
    dimension = nodes.shape[1]
    values = np.zeros(len(nodes))
    if dimension == 1:
        return rng.normal() * nodes[:, 0]
    if dimension == 2:
        theta = np.arctan2(nodes[:, 1], nodes[:, 0])
        for k in range(1, degree + 1):
            a, b = rng.normal(size=2) / k
            values += a * np.cos(k * theta) + b * np.sin(k * theta)
        return values
    # n = 3: random polynomial in the coordinates, degrees 1..degree
    for total in range(1, degree + 1):
        for i in range(total + 1):
            for j in range(total + 1 - i):
                k = total - i - j
                coefficient = rng.normal() / total
                values += coefficient * nodes[:, 0] ** i * nodes[:, 1] ** j * nodes[:, 2] ** k
    return values


def omega_suite(
    quadrature: SphereQuadrature,
    count: int,
    degree: int,
    seed: int,
    mean: float = 1.0,
    project: bool = True,
) -> List[SphereFunction]:
    """
    Random Omega = mean + random harmonics up to `degree`.

    With project=True the sigma-mean is removed, leaving mean-zero kernels;
    with project=False the constant part survives.
    """
    if count < 1:
        raise ValueError(f"Omega suite needs at least one function, got {count}")
    if degree < 1:
        raise ValueError(f"harmonic degree must be >= 1, got {degree}")
    rng = np.random.default_rng([seed, OMEGA_STREAM])
    suite = []
    for i in range(count):
        values = mean + _harmonic_terms(quadrature.nodes, degree, rng)
        omega = SphereFunction(quadrature, values, f"omega-{i}")
        suite.append(omega.projected() if project else omega)
    return suite


def _corner(x: float, spacing: float) -> float:
    """Nearest cell corner: corners sit at integer multiples of h."""
    return round(x / spacing) * spacing


def lemma_measure(grid: GridSpec) -> DiscreteMeasure:
    """
    delta_0 plus two off-center atoms, all on cell corners.

    Corners are never cell centers, so I_alpha mu is finite at every cell;
    corners of a grid stay corners under refinement and under enlargement
    at fixed spacing.
    """
    h = grid.spacing
    n = grid.dimension
    second = np.zeros(n)
    second[0] = _corner(0.5, h)
    third = np.full(n, _corner(-0.25, h))
    if np.allclose(second, 0.0) or np.allclose(third, 0.0):
        raise ValueError(f"grid spacing h={h} is too coarse to separate the lemma atoms")
    points = np.stack([np.zeros(n), second, third])
    return DiscreteMeasure(points, np.array([1.0, 0.5, 0.5]))


def sphere_measure(quadrature: SphereQuadrature, radius: float = 1.0) -> DiscreteMeasure:
    """Surface measure of the sphere of a given radius, one atom per node."""
    return DiscreteMeasure(radius * quadrature.nodes, quadrature.weights * radius ** (quadrature.dimension - 1))


def random_balls(
    grid: GridSpec, count: int, seed: int, reach: Optional[float] = None, min_radius: Optional[float] = None
) -> List[Ball]:
    """
    Balls inside the box whose centers lie within `reach` of the origin.

    Radii range from min_radius (default max(R/16, 2h)) up to what the box
    allows. With the default, refining the grid at fixed R keeps the balls.
    """
    rng = np.random.default_rng([seed, BALL_STREAM])
    reach = grid.half_width / 2.0 if reach is None else reach
    smallest = max(grid.half_width / 16.0, 2.0 * grid.spacing) if min_radius is None else min_radius
    balls = []
    attempts = 0
    while len(balls) < count:
        attempts += 1
        if attempts > 100 * count:
            raise ValueError(f"could not place {count} balls of radius >= {smallest} inside the box")
        center = rng.uniform(-reach, reach, grid.dimension)
        room = grid.half_width - float(np.max(np.abs(center)))
        if room <= smallest:
            continue
        radius = float(rng.uniform(smallest, min(room, grid.half_width / 2.0)))
        balls.append(Ball(tuple(center), radius))
    return balls


def _power_weight(grid: GridSpec, a: float) -> ScalarField:
    return ScalarField(grid, grid.distance_from() ** (-a))


def _log_smooth_weight(grid: GridSpec, scale: float, seed: int) -> ScalarField:
    rng = np.random.default_rng([seed, WEIGHT_STREAM])
    exponent = np.zeros(grid.shape)
    for _ in range(4):
        center = rng.uniform(-grid.half_width / 2.0, grid.half_width / 2.0, grid.dimension)
        width = rng.uniform(grid.half_width / 4.0, grid.half_width / 2.0)
        exponent += rng.normal() * np.exp(-((grid.distance_from(center) / width) ** 2))
    return ScalarField(grid, np.exp(scale * exponent))


def _spike_weight(grid: GridSpec, mass: float, floor: float) -> ScalarField:
    """floor + mass / h^n on the cell at the origin's upper corner: a near-atom of mass `mass`."""
    values = np.full(grid.shape, float(floor))
    values[(grid.cells // 2,) * grid.dimension] += mass / grid.cell_volume
    return ScalarField(grid, values)


def weight_label(spec: Dict[str, Any]) -> str:
    if "id" in spec:
        return str(spec["id"])
    params = ",".join(f"{k}={spec[k]}" for k in sorted(spec) if k not in ("kind", "id"))
    return f"{spec['kind']}({params})" if params else spec["kind"]


def weight_from_spec(spec: Dict[str, Any], grid: GridSpec, seed: int = 0) -> Tuple[str, ScalarField]:
    """
    Build a weight from a config entry.

    Kinds:
        {"kind": "power", "a": a}                       |x|^(-a)
        {"kind": "bump", "center": c, "radius": r, "height": h}   1 + h * bump
        {"kind": "log_smooth", "scale": s}              exp(s * random smooth)
        {"kind": "spike", "mass": m, "floor": e}        e + near-atom of mass m
        {"kind": "file", "path": p}                     grid text file

    Returns:
        (weight_id, weight field)
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError(f"weight spec must be an object with a 'kind', got {spec!r}")
    kind = spec["kind"]
    label = weight_label(spec)
    if kind == "power":
        weight = _power_weight(grid, float(spec.get("a", 0.0)))
    elif kind == "bump":
        center = spec.get("center", [0.0] * grid.dimension)
        radius = float(spec.get("radius", grid.half_width / 4.0))
        height = float(spec.get("height", 1.0))
        if height <= -1.0:
            raise ValueError(f"bump weight height must exceed -1 to stay positive, got {height}")
        bump = make_bump(grid, center, radius, height)
        weight = ScalarField(grid, 1.0 + bump.values)
    elif kind == "log_smooth":
        weight = _log_smooth_weight(grid, float(spec.get("scale", 1.0)), int(spec.get("seed", seed)))
    elif kind == "spike":
        mass = float(spec.get("mass", 1.0))
        floor = float(spec.get("floor", 1e-3))
        if mass <= 0 or floor <= 0:
            raise ValueError(f"spike weight needs positive mass and floor, got mass={mass}, floor={floor}")
        weight = _spike_weight(grid, mass, floor)
    elif kind == "file":
        if "path" not in spec:
            raise ValueError("file weight needs a 'path'")
        weight = read_grid_file(Path(spec["path"]))
        if weight.grid != grid:
            raise ValueError(
                f"weight file {spec['path']} has grid n={weight.grid.dimension}, N={weight.grid.cells}, "
                f"R={weight.grid.half_width}; the run uses n={grid.dimension}, N={grid.cells}, R={grid.half_width}"
            )
    elif kind == "constant":
        weight = constant_field(grid, float(spec.get("value", 1.0)))
    else:
        raise ValueError(f"unknown weight kind '{kind}'")
    if np.any(weight.values <= 0):
        raise ValueError(f"weight {label} is not strictly positive")
    return label, weight


def weight_suite(specs: Sequence[Dict[str, Any]], grid: GridSpec, seed: int = 0) -> List[Tuple[str, ScalarField]]:
    return [weight_from_spec(spec, grid, seed) for spec in specs]
