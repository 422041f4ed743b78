"""
Empirical constants: the measured stand-in for every "<= C" of an inequality.

c_emp = max over masked points of lhs / rhs, with the mask
rhs >= theta * max(rhs). Outside the mask both sides are numerically
negligible and their ratio is noise.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.analysis.field import ScalarField

logger = logging.getLogger(__name__)

DEFAULT_THETA = 1e-6


class EmptyMaskError(ValueError):
    """The right-hand side vanishes on the whole grid."""


@dataclass
class EmpiricalConstantReport:
    """
    Attributes:
        c_emp: max of lhs/rhs over the mask
        argmax: cell center where it is attained (None for norm ratios)
        masked_points: number of points that entered the maximum
        refinement_series: (h, c_emp) pairs
        domain_series: (R, c_emp) pairs
        growth_exponent: fitted slope, when a series was fitted
    """

    c_emp: float
    argmax: Optional[Tuple[float, ...]] = None
    masked_points: int = 1
    refinement_series: List[Tuple[float, float]] = field(default_factory=list)
    domain_series: List[Tuple[float, float]] = field(default_factory=list)
    growth_exponent: Optional[float] = None

    def __post_init__(self):
        if self.c_emp < 0 or math.isnan(self.c_emp):
            raise ValueError(f"empirical constant must be >= 0, got {self.c_emp}")

    def argmax_columns(self) -> dict:
        coords = list(self.argmax) if self.argmax is not None else []
        coords += [None] * (3 - len(coords))
        return {f"argmax_x{i + 1}": coords[i] for i in range(3)}


def empirical_constant(lhs: ScalarField, rhs: ScalarField, theta: float = DEFAULT_THETA) -> EmpiricalConstantReport:
    """
    max over {rhs >= theta * max rhs, rhs > 0} of lhs / rhs.

    Raises:
        ValueError: grids differ, or the mask is empty (rhs vanishes)
    """
    if lhs.grid != rhs.grid:
        raise ValueError("lhs and rhs live on different grids")
    if not 0 <= theta < 1:
        raise ValueError(f"mask threshold theta must lie in [0, 1), got {theta}")
    right = rhs.values
    peak = float(right.max())
    mask = (right > 0) & (right >= theta * peak)
    count = int(np.count_nonzero(mask))
    if count == 0:
        raise EmptyMaskError("empty mask: the right-hand side vanishes everywhere")
    ratio = np.full(right.shape, -np.inf)
    ratio[mask] = np.abs(lhs.values[mask]) / right[mask]
    index = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    point = tuple(float(lhs.grid.axis_centers()[i]) for i in index)
    return EmpiricalConstantReport(c_emp=float(ratio[index]), argmax=point, masked_points=count)


def norm_ratio(lhs: float, rhs: float) -> EmpiricalConstantReport:
    """Report for a norm inequality ||.|| <= C ||.||: a single ratio."""
    if rhs <= 0:
        raise ValueError(f"norm ratio needs a positive right-hand side, got {rhs}")
    return EmpiricalConstantReport(c_emp=float(lhs / rhs), argmax=None, masked_points=1)


def fit_growth_exponent(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 2 or len(xs) != len(ys):
        raise ValueError(f"a growth fit needs at least two matching points, got {len(xs)} and {len(ys)}")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("growth fits need positive abscissae and constants")
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)


def relative_drift(values: Sequence[float]) -> float:
    """|c_last / c_previous - 1| for a refinement series."""
    if len(values) < 2:
        raise ValueError("drift needs at least two values")
    previous, last = values[-2], values[-1]
    if previous == 0:
        return 0.0 if last == 0 else math.inf
    return abs(last / previous - 1.0)
