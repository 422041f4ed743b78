"""
Muckenhoupt-type weight constants as suprema over cube families.

Every constant is a supremum over cubes inside the box, so the families
used here are inside-only. A report records the value, the cube that
attains it, how many cubes were visited, and whether the value looks
divergent: non-finite, or moving by more than GROWTH_TOLERANCE when the
largest or the smallest scale is dropped from the family. Divergence
under grid refinement is a cross-grid property; refinement_series
measures it.

Constants:
- A_1:        sup_x M w(x) / w(x)
- A_p:        sup_Q (avg_Q w)(avg_Q w^(1-p'))^(p-1)
- A_(p,q):    sup_Q (avg_Q w^q)(avg_Q w^(-p'))^(q/p')
- A_inf:      sup_Q w(Q)^(-1) int_Q M(1_Q w)   (Fujii-Wilson)
- bump:       joint / separated Orlicz bump quantities
- testing:    Sawyer testing conditions for I_1
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import ndimage
from scipy.signal import fftconvolve

from src.analysis.field import GridSpec, ScalarField
from src.analysis.geometry import Cube, CubeFamily, containing_supremum, iter_blocks, scale_averages
from src.analysis.lorentz import YoungFunction, associate, bp_classify, conjugate_exponent, luxemburg_rows
from src.analysis.potential import riesz_kernel

logger = logging.getLogger(__name__)

GROWTH_TOLERANCE = 1.1
TESTING_CHUNK_ELEMENTS = 1 << 18


@dataclass
class WeightConstantReport:
    name: str
    value: float
    witness: Optional[Cube]
    scales: tuple
    cube_count: int
    divergent: bool
    per_scale: List[float] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "constant": self.name,
            "value": self.value,
            "witness_center": list(self.witness.center) if self.witness else None,
            "witness_side": self.witness.side if self.witness else None,
            "j_min": self.scales[0],
            "j_max": self.scales[1],
            "cube_count": self.cube_count,
            "divergent": self.divergent,
        }


def _check_weight(w: ScalarField, label: str = "weight"):
    if np.any(w.values <= 0):
        raise ValueError(f"{label} must be strictly positive on the box")


def _weight_family(w: ScalarField, family: Optional[CubeFamily]) -> CubeFamily:
    if family is None:
        return CubeFamily.dyadic(w.grid, inside_only=True)
    if not family.inside_only:
        raise ValueError("weight constants need a cube family that stays inside the box")
    if family.grid != w.grid:
        raise ValueError("cube family and weight live on different grids")
    return family


def _divergence(per_scale: List[float]) -> bool:
    values = np.asarray(per_scale, dtype=float)
    if not np.all(np.isfinite(values)):
        return True
    if len(values) < 2:
        return False
    full = values.max()
    without_top = values[:-1].max()
    without_bottom = values[1:].max()
    return bool(full > GROWTH_TOLERANCE * without_top or full > GROWTH_TOLERANCE * without_bottom)


def _report(name: str, family: CubeFamily, per_scale: List[float], witnesses: List[Optional[Cube]]) -> WeightConstantReport:
    values = np.asarray(per_scale, dtype=float)
    finite = np.where(np.isnan(values), -np.inf, values)
    best = int(np.argmax(finite))
    report = WeightConstantReport(
        name=name,
        value=float(values[best]),
        witness=witnesses[best],
        scales=(family.j_min, family.j_max),
        cube_count=family.cube_count(),
        divergent=_divergence(per_scale),
        per_scale=[float(v) for v in per_scale],
    )
    if report.divergent:
        logger.warning(f"{name}: value {report.value:.6g} looks divergent (per-scale {np.round(values, 4).tolist()})")
    return report


def _box_means(values: np.ndarray, family: CubeFamily, j: int) -> np.ndarray:
    """Unmasked scale-j cube means; callers mask the lattice after combining."""
    return np.maximum(ndimage.uniform_filter(values, size=family.cells_per_side(j), mode="constant", cval=0.0), 0.0)


def _sup_of_cube_quantity(
    name: str, family: CubeFamily, per_center: Callable[[int], np.ndarray]
) -> WeightConstantReport:
    """Supremum of a per-cube quantity given on center grids (-inf off the lattice)."""
    per_scale, witnesses = [], []
    for j in family.scales:
        values = per_center(j)
        values = np.where(np.isnan(values), np.inf, values)
        index = np.unravel_index(int(np.argmax(values)), values.shape)
        per_scale.append(float(values[index]))
        witnesses.append(family.cube_at(index, j))
    return _report(name, family, per_scale, witnesses)


def a1_constant(w: ScalarField, family: Optional[CubeFamily] = None) -> WeightConstantReport:
    """[w]_{A_1} = sup_x M w(x) / w(x)."""
    _check_weight(w)
    family = _weight_family(w, family)
    per_scale, witnesses = [], []
    for j in family.scales:
        means = scale_averages(w.values, family, j)
        ratio = containing_supremum(means, family, j) / w.values
        index = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
        per_scale.append(float(ratio[index]))
        witnesses.append(family.cube_at(_covering_argmax(means, index, family.cells_per_side(j)), j))
    return _report("A_1", family, per_scale, witnesses)


def _covering_argmax(means: np.ndarray, index: tuple, s: int) -> tuple:
    """Center of the largest-mean cube among the scale-s centers covering cell `index`."""
    # the cube at c covers cells c - s/2 .. c + s/2 - 1
    low = [max(0, i - s // 2 + 1) if s > 1 else i for i in index]
    window = tuple(slice(lo, i + s // 2 + 1) for lo, i in zip(low, index))
    local = means[window]
    offset = np.unravel_index(int(np.argmax(local)), local.shape)
    return tuple(lo + k for lo, k in zip(low, offset))


def a1n_constant(w: ScalarField, family: Optional[CubeFamily] = None) -> WeightConstantReport:
    """[w^{n'}]_{A_1}, the constant of the weighted Sobolev endpoint."""
    n = w.grid.dimension
    if n < 2:
        raise ValueError("n' = n/(n-1) is infinite in dimension 1")
    _check_weight(w)
    report = a1_constant(w.power(n / (n - 1.0)), family)
    report.name = "A_1(w^n')"
    return report


def ap_constant(w: ScalarField, p: float, family: Optional[CubeFamily] = None) -> WeightConstantReport:
    """[w]_{A_p} = sup_Q (avg_Q w)(avg_Q w^(1-p'))^(p-1)."""
    if not 1 < p < math.inf:
        raise ValueError(f"A_p needs 1 < p < inf, got p={p}")
    _check_weight(w)
    family = _weight_family(w, family)
    dual = w.values ** (1.0 - conjugate_exponent(p))

    def per_center(j):
        with np.errstate(over="ignore", invalid="ignore"):
            product = _box_means(w.values, family, j) * _box_means(dual, family, j) ** (p - 1.0)
        return np.where(family.lattice_mask(j), product, -np.inf)

    return _sup_of_cube_quantity(f"A_{p:g}", family, per_center)


def apq_constant(w: ScalarField, p: float, q: float, family: Optional[CubeFamily] = None) -> WeightConstantReport:
    """[w]_{A_(p,q)} = sup_Q (avg_Q w^q)(avg_Q w^(-p'))^(q/p')."""
    if not 1 < p < math.inf or q < p:
        raise ValueError(f"A_(p,q) needs 1 < p <= q, got p={p}, q={q}")
    _check_weight(w)
    family = _weight_family(w, family)
    p_prime = conjugate_exponent(p)
    with np.errstate(over="ignore"):
        upper = w.values ** q
        lower = w.values ** (-p_prime)

    def per_center(j):
        with np.errstate(over="ignore", invalid="ignore"):
            product = _box_means(upper, family, j) * _box_means(lower, family, j) ** (q / p_prime)
        return np.where(family.lattice_mask(j), product, -np.inf)

    return _sup_of_cube_quantity(f"A_({p:g},{q:g})", family, per_center)


def apq_dual_relation(w: ScalarField, p: float, q: float, family: Optional[CubeFamily] = None) -> tuple:
    """
    Both sides of [w]_{A_(p,q)}^(1/q) = [w^(-1)]_{A_(q',p')}^(1/p').

    The two suprema run over the same cubes of the same product, so they
    agree to rounding.
    """
    direct = apq_constant(w, p, q, family).value
    dual = apq_constant(w.power(-1.0), conjugate_exponent(q), conjugate_exponent(p), family).value
    return direct ** (1.0 / q), dual ** (1.0 / conjugate_exponent(p))


def _local_maximal(blocks: np.ndarray, j: int) -> np.ndarray:
    """
    Maximal function of each block over its own dyadic subcubes.

    blocks has shape (k, s, ..., s) with s = 2^j; subcubes of side 2^i
    (i <= j) are centered on every cell and must stay inside the block.
    """
    count, s = blocks.shape[0], blocks.shape[1]
    dimension = blocks.ndim - 1
    best = np.full(blocks.shape, -np.inf)
    cells = np.arange(s)
    for i in range(j + 1):
        side = 1 << i
        size = (1,) + (side,) * dimension
        means = ndimage.uniform_filter(blocks, size=size, mode="constant", cval=0.0)
        low = cells - side // 2
        axis_ok = (low >= 0) & (low + side <= s)
        valid = axis_ok
        for _ in range(dimension - 1):
            valid = np.multiply.outer(valid, axis_ok)
        means = np.where(valid[None, ...], means, -np.inf)
        origin = (0,) + ((-1 if side > 1 else 0),) * dimension
        covering = ndimage.maximum_filter(means, size=size, mode="constant", cval=-np.inf, origin=origin)
        best = np.maximum(best, covering)
    return best


def ainf_constant(w: ScalarField, family: Optional[CubeFamily] = None) -> WeightConstantReport:
    """
    Fujii-Wilson [w]_{A_inf} = sup_Q w(Q)^(-1) int_Q M(1_Q w).

    The local maximal function runs over the dyadic subcubes of Q.
    Outer cubes of scale j sit on a lattice of stride 2^(j-1).
    """
    _check_weight(w)
    family = _weight_family(w, family)
    outer = CubeFamily(w.grid, family.j_min, family.j_max, inside_only=True, stride_shift=1)
    n = w.grid.dimension
    per_scale, witnesses = [], []
    for j in outer.scales:
        s = outer.cells_per_side(j)
        best, best_center = -np.inf, None
        for centers, rows in iter_blocks(w.values, outer, j):
            blocks = rows.reshape((len(rows),) + (s,) * n)
            local = _local_maximal(blocks, j).reshape(len(rows), -1)
            ratios = local.sum(axis=1) / rows.sum(axis=1)
            k = int(np.argmax(ratios))
            if ratios[k] > best:
                best, best_center = float(ratios[k]), centers[k]
        per_scale.append(best)
        witnesses.append(outer.cube_at(best_center, j) if best_center is not None else None)
    return _report("A_inf", outer, per_scale, witnesses)


def refinement_series(
    constant: Callable[[GridSpec], float], grids: Sequence[GridSpec]
) -> tuple:
    """
    Evaluate a constant on successively refined grids.

    Returns:
        (values, divergent): divergent when the last doubling grows the
        constant by more than GROWTH_TOLERANCE or any value is non-finite.
    """
    values = [float(constant(grid)) for grid in grids]
    if len(values) < 2:
        raise ValueError("a refinement series needs at least two grids")
    divergent = not all(math.isfinite(v) for v in values) or values[-1] > GROWTH_TOLERANCE * values[-2]
    return values, divergent


def _verify_bump_classes(mode: str, phi: YoungFunction, psi: YoungFunction, p: float, q: float):
    p_prime, q_prime = conjugate_exponent(p), conjugate_exponent(q)
    if mode == "joint":
        checks = [
            ("associate of Phi in B_q'", bp_classify(associate(phi), q_prime)),
            ("associate of Psi in B_p", bp_classify(associate(psi), p)),
        ]
    else:
        checks = [
            ("associate of Phi in B_(q',p')", bp_classify(associate(phi), q_prime, p_prime)),
            ("associate of Psi in B_(p,q)", bp_classify(associate(psi), p, q)),
        ]
    for label, verdict in checks:
        if not verdict.member:
            raise ValueError(
                f"bump condition not applicable: {label} is {verdict.verdict} "
                f"(slope {verdict.slope:.3f}, log exponent {verdict.log_exponent:.3f})"
            )


def log_bump_functions(mode: str, p: float, q: float, delta: float) -> tuple:
    """
    Default log bumps (Phi, Psi) for the bump conditions.

    joint:                 Phi = t^q log^(q/q' + delta),  Psi = t^p' log^(p'/p + delta)
    separated, log_bump:   Phi = t^q log^(q/p' + delta),  Psi = t^p' log^(p'/q + delta)
    diagonal_log:          Phi = t^p log^(2p - 1 + delta), Psi = t^p' log^(2p' - 1 + delta)
    """
    if delta <= 0:
        raise ValueError(f"log bump excess delta must be positive, got {delta}")
    p_prime, q_prime = conjugate_exponent(p), conjugate_exponent(q)
    if mode == "joint":
        return (
            YoungFunction.power_log(q, q / q_prime + delta),
            YoungFunction.power_log(p_prime, p_prime / p + delta),
        )
    if mode in ("separated", "log_bump"):
        return (
            YoungFunction.power_log(q, q / p_prime + delta),
            YoungFunction.power_log(p_prime, p_prime / q + delta),
        )
    if mode == "diagonal_log":
        return (
            YoungFunction.power_log(p, 2.0 * p - 1.0 + delta),
            YoungFunction.power_log(p_prime, 2.0 * p_prime - 1.0 + delta),
        )
    raise ValueError(f"no default log bumps for mode '{mode}'")


def bump_check(
    u: ScalarField,
    v: ScalarField,
    p: float,
    q: float,
    alpha: float,
    mode: str = "joint",
    phi: Optional[YoungFunction] = None,
    psi: Optional[YoungFunction] = None,
    delta: float = 0.5,
    family: Optional[CubeFamily] = None,
) -> WeightConstantReport:
    """
    Supremum of a two-weight bump quantity for I_alpha: L^p(v) -> L^q(u).

    joint (p <= q):
        |Q|^(alpha/n + 1/q - 1/p) ||u^(1/q)||_{Phi,Q} ||v^(-1/p)||_{Psi,Q}
    separated (p < q):
        |Q|^(alpha/n + 1/q - 1/p) [ ||u^(1/q)||_{Phi,Q} (avg_Q v^(-p'/p))^(1/p')
                                   + (avg_Q u)^(1/q) ||v^(-1/p)||_{Psi,Q} ]
    log_bump (p < q): the separated form with the fixed log bumps of
        log_bump_functions("log_bump", ...); phi and psi may not be given.
    diagonal_log (p = q): the separated form with the log bumps of
        log_bump_functions("diagonal_log", ...).

    Missing Phi or Psi fall back to log_bump_functions(mode, ...). Except
    for diagonal_log the associates must pass the B-class test first; an
    inconclusive or failing verdict raises.
    """
    n = u.grid.dimension
    if u.grid != v.grid:
        raise ValueError("weights live on different grids")
    _check_weight(u, "u")
    _check_weight(v, "v")
    if not 0 < alpha < n:
        raise ValueError(f"alpha must satisfy 0 < alpha < n, got {alpha}")
    if not 1 < p < math.inf:
        raise ValueError(f"bump conditions need 1 < p < inf, got p={p}")
    if mode == "joint" and q < p:
        raise ValueError(f"joint bump needs p <= q, got p={p}, q={q}")
    if mode in ("separated", "log_bump") and q <= p:
        raise ValueError(f"{mode} bump needs p < q, got p={p}, q={q}")
    if mode == "diagonal_log" and q != p:
        raise ValueError(f"diagonal log bump needs p = q, got p={p}, q={q}")
    if mode not in ("joint", "separated", "log_bump", "diagonal_log"):
        raise ValueError(f"unknown bump mode '{mode}'")
    if mode == "log_bump" and (phi is not None or psi is not None):
        raise ValueError("log_bump uses fixed log bumps; pass mode='separated' for custom Young functions")

    if phi is None or psi is None:
        default_phi, default_psi = log_bump_functions(mode, p, q, delta)
        phi = phi or default_phi
        psi = psi or default_psi
    if mode != "diagonal_log":
        _verify_bump_classes(mode, phi, psi, p, q)

    family = _weight_family(u, family)
    p_prime = conjugate_exponent(p)
    exponent = alpha / n + 1.0 / q - 1.0 / p
    u_root = u.values ** (1.0 / q)
    v_root = v.values ** (-1.0 / p)
    v_dual = v.values ** (-p_prime / p)

    def per_center(j):
        volume = family.side(j) ** n
        u_bump = np.full(u.grid.shape, -np.inf)
        v_bump = np.full(u.grid.shape, -np.inf)
        for centers, rows in iter_blocks(u_root, family, j):
            u_bump[tuple(centers.T)] = luxemburg_rows(rows, phi)
        for centers, rows in iter_blocks(v_root, family, j):
            v_bump[tuple(centers.T)] = luxemburg_rows(rows, psi)
        if mode == "joint":
            core = u_bump * v_bump
        else:
            plain_v = _box_means(v_dual, family, j) ** (1.0 / p_prime)
            plain_u = _box_means(u.values, family, j) ** (1.0 / q)
            core = u_bump * plain_v + plain_u * v_bump
        return np.where(np.isfinite(u_bump), volume ** exponent * core, -np.inf)

    return _sup_of_cube_quantity(f"bump-{mode}", family, per_center)


@dataclass
class TestingReport:
    """Sawyer testing constants for I_alpha: L^p(v) -> L^q(u)."""

    forward: WeightConstantReport
    dual: WeightConstantReport
    skipped_cubes: int

    @property
    def value(self) -> float:
        return max(self.forward.value, self.dual.value)


def testing_check(
    u: ScalarField,
    v: ScalarField,
    p: float,
    q: float,
    alpha: float = 1.0,
    family: Optional[CubeFamily] = None,
) -> TestingReport:
    """
    Sawyer testing conditions, with sigma = v^(1 - p'):

    forward: (int_Q I_alpha(1_Q sigma)^q u)^(1/q) / sigma(Q)^(1/p)
    dual:    (int_Q I_alpha(1_Q u)^p' sigma)^(1/p') / u(Q)^(1/q')

    I_alpha(1_Q g) is evaluated on the cells of Q by a local FFT
    convolution. Cubes with a vanishing denominator are skipped.
    """
    if u.grid != v.grid:
        raise ValueError("weights live on different grids")
    _check_weight(u, "u")
    _check_weight(v, "v")
    if not 1 < p <= q < math.inf:
        raise ValueError(f"testing conditions need 1 < p <= q < inf, got p={p}, q={q}")
    grid = u.grid
    family = _weight_family(u, family)
    outer = CubeFamily(grid, family.j_min, family.j_max, inside_only=True, stride_shift=1)
    p_prime, q_prime = conjugate_exponent(p), conjugate_exponent(q)
    sigma = v.values ** (1.0 - p_prime)
    h, n = grid.spacing, grid.dimension
    cell = grid.cell_volume
    skipped = 0

    forward_scale, dual_scale = [], []
    forward_witness, dual_witness = [], []
    for j in outer.scales:
        s = outer.cells_per_side(j)
        shape = (s,) * n
        kernel = riesz_kernel(alpha, n, h, s - 1)[None, ...]
        axes = tuple(range(1, n + 1))
        best_f, best_d, center_f, center_d = -np.inf, -np.inf, None, None
        blocks_u = iter_blocks(u.values, outer, j, TESTING_CHUNK_ELEMENTS)
        blocks_s = iter_blocks(sigma, outer, j, TESTING_CHUNK_ELEMENTS)
        for (centers, rows_u), (_, rows_s) in zip(blocks_u, blocks_s):
            sigma_q, u_q = rows_s.sum(axis=1) * cell, rows_u.sum(axis=1) * cell
            live = (sigma_q > 0) & (u_q > 0)
            skipped += int(np.count_nonzero(~live))
            if not live.any():
                continue
            centers, rows_u, rows_s = centers[live], rows_u[live], rows_s[live]
            sigma_q, u_q = sigma_q[live], u_q[live]
            block_u = rows_u.reshape((len(rows_u),) + shape)
            block_s = rows_s.reshape((len(rows_s),) + shape)
            potential_s = fftconvolve(block_s, kernel, mode="same", axes=axes).reshape(len(rows_s), -1)
            potential_u = fftconvolve(block_u, kernel, mode="same", axes=axes).reshape(len(rows_u), -1)
            forward = (np.sum(np.abs(potential_s) ** q * rows_u, axis=1) * cell) ** (1.0 / q) / sigma_q ** (1.0 / p)
            dual = (np.sum(np.abs(potential_u) ** p_prime * rows_s, axis=1) * cell) ** (1.0 / p_prime) / u_q ** (1.0 / q_prime)
            kf, kd = int(np.argmax(forward)), int(np.argmax(dual))
            if forward[kf] > best_f:
                best_f, center_f = float(forward[kf]), centers[kf]
            if dual[kd] > best_d:
                best_d, center_d = float(dual[kd]), centers[kd]
        forward_scale.append(best_f)
        dual_scale.append(best_d)
        forward_witness.append(outer.cube_at(center_f, j) if center_f is not None else None)
        dual_witness.append(outer.cube_at(center_d, j) if center_d is not None else None)

    if skipped:
        logger.info(f"testing check skipped {skipped} cubes with zero weight mass")
    return TestingReport(
        forward=_report("testing-forward", outer, forward_scale, forward_witness),
        dual=_report("testing-dual", outer, dual_scale, dual_witness),
        skipped_cubes=skipped,
    )
