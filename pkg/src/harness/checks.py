"""
Checks that are not a single pointwise ratio: Poincare inequalities over
families of balls, weak-type norms, identity residuals with convergence
orders, and the weighted Sobolev trend suite.

Identity residuals are measured at N and 2N; the order is
log2(residual(N) / residual(2N)). Radial quadratures get twice the nodes
per octave on the refined grid so that the radial error shrinks with h.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.signal import fftconvolve

from src.analysis.field import GridSpec, ScalarField, gradient, lp_norm, make_bump
from src.analysis.geometry import CubeFamily, SphereQuadrature, sphere_quadrature, unit_ball_volume
from src.analysis.lorentz import LorentzIndex, conjugate_exponent, lorentz_avg, lorentz_norm
from src.analysis.maximal import hardy_littlewood, iterated_maximal
from src.analysis.potential import riesz_potential
from src.analysis.singular import (
    NODES_PER_OCTAVE,
    ball_weak_norm_identity,
    beurling,
    box_reach,
    cauchy_transform,
    complex_derivative,
    maximal_rough,
    riesz_transform,
    spherical_mean_identity,
)
from src.analysis.weights import apq_constant
from src.harness.empirical import fit_growth_exponent
from src.harness.suites import omega_suite

logger = logging.getLogger(__name__)

POINCARE_VARIANTS = ("(1,1)", "classical", "lorentz")
SOBOLEV_OPERATORS = ("identity", "M", "M2", "Tstar")


@dataclass
class PoincareResult:
    """Largest Poincare ratio over a family of regions."""

    variant: str
    ratio: float
    region: Optional[object]
    ratios: List[float] = field(default_factory=list)

    @property
    def evaluated(self) -> int:
        return len(self.ratios)


def _region_radius(region) -> float:
    return region.radius if hasattr(region, "radius") else region.side / 2.0


def poincare_check(
    f: ScalarField,
    regions: Sequence,
    variant: str = "(1,1)",
    p: float = 1.0,
    q: Optional[float] = None,
) -> PoincareResult:
    """
    Max over regions B of lhs / rhs for one Poincare inequality.

    (1,1):      avg_B |f - f_B|                  vs  r(B) avg_B |grad f|
    classical:  (avg_B |f - f_B|^q)^(1/q)        vs  r(B) (avg_B |grad f|^p)^(1/p),  q <= p*
    lorentz:    ||f - f_B||_{L^{n',1}(B)}        vs  r(B) avg_B |grad f|

    r(B) is the radius of a ball, half the side of a cube.
    """
    if variant not in POINCARE_VARIANTS:
        raise ValueError(f"unknown Poincare variant '{variant}', expected one of {POINCARE_VARIANTS}")
    grid = f.grid
    n = grid.dimension
    if variant == "classical":
        if p < 1:
            raise ValueError(f"classical Poincare needs p >= 1, got {p}")
        critical = n * p / (n - p) if p < n else math.inf
        q = critical if q is None else q
        if q > critical or math.isinf(q):
            raise ValueError(f"classical Poincare needs q <= p* = {critical:.6g}, got q={q}")
    if variant == "lorentz" and n < 2:
        raise ValueError("the Lorentz Poincare inequality needs n >= 2")

    slope = gradient(f).magnitude().values
    ratios = []
    best, best_region = 0.0, None
    for region in regions:
        if not region.inside_box(grid):
            raise ValueError(f"{region} leaves the box [-{grid.half_width}, {grid.half_width}]^{n}")
        inside = region.mask(grid)
        if not inside.any():
            raise ValueError(f"{region} contains no cell center of the grid")
        oscillation = f.values - float(np.mean(f.values[inside]))
        if variant == "(1,1)":
            lhs = float(np.mean(np.abs(oscillation[inside])))
            rhs = _region_radius(region) * float(np.mean(slope[inside]))
        elif variant == "classical":
            lhs = float(np.mean(np.abs(oscillation[inside]) ** q) ** (1.0 / q))
            rhs = _region_radius(region) * float(np.mean(slope[inside] ** p) ** (1.0 / p))
        else:
            index = LorentzIndex(conjugate_exponent(n), 1.0)
            lhs = lorentz_avg(ScalarField(grid, oscillation), region, index)
            rhs = _region_radius(region) * float(np.mean(slope[inside]))
        if rhs > 0:
            ratio = lhs / rhs
        elif lhs > 0:
            ratio = math.inf
        else:
            ratio = 0.0
        ratios.append(ratio)
        if ratio > best or best_region is None:
            best, best_region = ratio, region
    return PoincareResult(variant, best, best_region, ratios)


def weak_type_norm(g: ScalarField, q: float, density: Optional[ScalarField] = None) -> float:
    """||g||_{L^{q,inf}(density dx)}."""
    if not q > 0:
        raise ValueError(f"weak-type exponent must be positive, got {q}")
    return lorentz_norm(g, LorentzIndex(q, math.inf), density)


def _relative_l2(difference: np.ndarray, reference: np.ndarray) -> float:
    scale = float(np.sqrt(np.sum(reference ** 2)))
    if scale == 0:
        raise ValueError("reference field vanishes; relative residual undefined")
    return float(np.sqrt(np.sum(difference ** 2)) / scale)


def _identity_bump(grid: GridSpec) -> Tuple[ScalarField, float]:
    radius = grid.half_width / 2.0
    return make_bump(grid, (0.0,) * grid.dimension, radius), radius


def _spherical_mean_residual(grid: GridSpec, quadrature: SphereQuadrature, nodes_per_octave: int) -> float:
    f, radius = _identity_bump(grid)
    lhs, rhs = spherical_mean_identity(f, quadrature, radius / 2.0, nodes_per_octave)
    inside = grid.distance_from() < radius
    scale = float(np.max(np.abs(lhs.values[inside])))
    return float(np.max(np.abs(lhs.values - rhs.values)[inside]) / scale)


def _riesz_residual(grid: GridSpec, quadrature: SphereQuadrature, nodes_per_octave: int) -> float:
    f, _ = _identity_bump(grid)
    n = grid.dimension
    transform = riesz_transform(f, 0, "pv", quadrature, nodes_per_octave)
    derivative = gradient(riesz_potential(f, 1.0)).components[0].values / (1.0 - n)
    return _relative_l2(transform.values - derivative, derivative)


def _beurling_residual(grid: GridSpec, quadrature: SphereQuadrature, nodes_per_octave: int) -> float:
    f, _ = _identity_bump(grid)
    s_re, s_im = beurling(f, None, "pv", quadrature, nodes_per_octave)
    c_re, c_im = cauchy_transform(f)
    d_re, d_im = complex_derivative(c_re, c_im)
    difference = np.hypot(s_re.values - d_re.values, s_im.values - d_im.values)
    reference = np.hypot(d_re.values, d_im.values)
    return _relative_l2(difference, reference)


def absorption_sum(g: ScalarField) -> ScalarField:
    """
    sum over k in Z of 2^k avg_{B(x, 2^k)} g at every cell.

    Balls of radius 2^k >= h are disc convolutions. Radii below h add
    2^k_min g(x) (the averages there are g(x)); radii beyond the box
    diameter see all of g and sum as a geometric tail.
    """
    grid = g.grid
    n, h = grid.dimension, grid.spacing
    volume = unit_ball_volume(n)
    k_min = math.ceil(math.log2(h))
    k_max = math.ceil(math.log2(box_reach(grid)))
    total = (2.0 ** k_min) * g.values.copy()
    for k in range(k_min, k_max + 1):
        radius = 2.0 ** k
        reach = min(int(math.ceil(radius / h)), grid.cells - 1)
        axis = np.arange(-reach, reach + 1) * h
        mesh = np.meshgrid(*([axis] * n), indexing="ij")
        disc = (np.sqrt(sum(c ** 2 for c in mesh)) <= radius).astype(float)
        kernel = disc * grid.cell_volume / (volume * radius ** n)
        total += radius * fftconvolve(g.values, kernel, mode="same")
    mass = float(np.sum(g.values) * grid.cell_volume)
    ratio = 2.0 ** (1 - n)
    total += mass / volume * 2.0 ** ((k_max + 1) * (1 - n)) / (1.0 - ratio)
    return ScalarField(grid, total)


def absorption_ratio(f: ScalarField, theta: float = 1e-6) -> float:
    """
    max_x absorption_sum(|grad f|)(x) / (c * I_1(|grad f|)(x)),
    c = (omega_n (1 - 2^(1-n)))^(-1). The geometric-sum argument gives <= 1.
    """
    n = f.grid.dimension
    if n < 2:
        raise ValueError("the absorption bound needs n >= 2")
    slope = gradient(f).magnitude()
    potential = riesz_potential(slope, 1.0).values
    bound = 1.0 / (unit_ball_volume(n) * (1.0 - 2.0 ** (1 - n)))
    summed = absorption_sum(slope).values
    mask = potential >= theta * potential.max()
    return float(np.max(summed[mask] / (bound * potential[mask])))


def _order(coarse: float, fine: float) -> float:
    if coarse <= 0 or fine <= 0:
        return math.nan
    return math.log2(coarse / fine)


def identity_suite(
    grid: GridSpec,
    quadrature: Optional[SphereQuadrature] = None,
    nodes_per_octave: Optional[int] = None,
    seed: int = 0,
) -> pd.DataFrame:
    """
    Residuals of the exact identities at N and 2N.

    Returns:
        DataFrame with columns identity, cells, residual, refined_residual, order
        (order is NaN for identities that are not discretization limits)
    """
    n = grid.dimension
    fine = grid.refined()
    base = nodes_per_octave or NODES_PER_OCTAVE * max(1, grid.cells // 32)
    quadrature = quadrature or sphere_quadrature(n)
    rows = []

    def add(identity, coarse_value, fine_value, with_order=True):
        rows.append(
            {
                "identity": identity,
                "cells": grid.cells,
                "residual": coarse_value,
                "refined_residual": fine_value,
                "order": _order(coarse_value, fine_value) if with_order else math.nan,
            }
        )
        logger.info(f"identity {identity}: residual {coarse_value:.3e} -> {fine_value:.3e}")

    add(
        "spherical-mean",
        _spherical_mean_residual(grid, quadrature, base),
        _spherical_mean_residual(fine, quadrature, 2 * base),
    )
    if n >= 2:
        add("riesz", _riesz_residual(grid, quadrature, base), _riesz_residual(fine, quadrature, 2 * base))
        omega = omega_suite(quadrature, 1, 4, seed)[0]
        lhs0, rhs0 = ball_weak_norm_identity(omega, k=0)
        lhs1, rhs1 = ball_weak_norm_identity(omega, k=1)
        add("ball-weak-norm", abs(lhs0 / rhs0 - 1.0), abs(lhs1 / rhs1 - 1.0), with_order=False)
        f, _ = _identity_bump(grid)
        f_fine, _ = _identity_bump(fine)
        add("absorption-ratio", absorption_ratio(f), absorption_ratio(f_fine), with_order=False)
    if n == 2:
        add("beurling", _beurling_residual(grid, quadrature, base), _beurling_residual(fine, quadrature, 2 * base))
    return pd.DataFrame(rows)


def _apply_operator(name: str, f: ScalarField, family: CubeFamily, omega) -> ScalarField:
    if name == "identity":
        return f.abs()
    if name == "M":
        return hardy_littlewood(f, family)
    if name == "M2":
        return iterated_maximal(f, 2, family)
    if name == "Tstar":
        if omega is None:
            raise ValueError("operator Tstar needs an Omega")
        return maximal_rough(f, omega)
    raise ValueError(f"unknown operator '{name}', expected one of {SOBOLEV_OPERATORS}")


def sobolev_suite(
    fields: Sequence[ScalarField],
    weights: Sequence[Tuple[str, ScalarField]],
    p: float,
    operators: Sequence[str] = ("identity", "M"),
    omega=None,
    family: Optional[CubeFamily] = None,
) -> pd.DataFrame:
    """
    ||w T f||_{p*} / ([w]_{A_(p,p*)}^(1/n') ||w grad f||_p), maximized over the fields.

    Returns:
        DataFrame with columns weight_id, operator, apq, raw_ratio,
        normalized_ratio, trend_exponent (slope of log normalized vs
        log apq per operator; NaN with fewer than two distinct weights)
    """
    if not fields:
        raise ValueError("Sobolev suite needs at least one field")
    grid = fields[0].grid
    n = grid.dimension
    if n < 2 or not 1 <= p < n:
        raise ValueError(f"weighted Sobolev needs n >= 2 and 1 <= p < n, got n={n}, p={p}")
    p_star = n * p / (n - p)
    n_prime = conjugate_exponent(n)
    family = family or CubeFamily.dyadic(grid)
    rows = []
    for weight_id, w in weights:
        # A_(p,p*) needs p > 1; at p = 1 the A_1 side of the constant is used
        apq = apq_constant(w, p, p_star).value if p > 1 else math.nan
        normalizer = apq ** (1.0 / n_prime) if math.isfinite(apq) else 1.0
        for name in operators:
            raw = 0.0
            for f in fields:
                slope = gradient(f).magnitude()
                rhs = lp_norm(w * slope, p)
                if rhs <= 0:
                    continue
                raw = max(raw, lp_norm(w * _apply_operator(name, f, family, omega), p_star) / rhs)
            rows.append(
                {
                    "weight_id": weight_id,
                    "operator": name,
                    "apq": apq,
                    "raw_ratio": raw,
                    "normalized_ratio": raw / normalizer,
                }
            )
    frame = pd.DataFrame(rows)
    frame["trend_exponent"] = math.nan
    for name, group in frame.groupby("operator"):
        usable = group[np.isfinite(group["apq"]) & (group["normalized_ratio"] > 0)]
        if usable["apq"].round(12).nunique() >= 2:
            frame.loc[group.index, "trend_exponent"] = fit_growth_exponent(usable["apq"], usable["normalized_ratio"])
    return frame
