"""
Rearrangement-invariant norms: Lorentz L^{p,q}, Orlicz (Luxemburg) averages,
Young functions and the B_p / B_{p,q} growth classes.

LORENTZ NORM
For a step distribution with levels a_1 > a_2 > ... > a_m > 0 and
cumulative measures D_k = mu{|f| >= a_k}, the integral
    ||f||_{p,q}^q = p * int_0^inf (lambda * d(lambda)^(1/p))^q dlambda/lambda
is piecewise a power of lambda and sums in closed form:
    ||f||_{p,q}^q = (p/q) * sum_k D_k^(q/p) * (a_k^q - a_{k+1}^q),  a_{m+1} = 0.
For q = inf the norm is max_k a_k * D_k^(1/p). At q = p this reduces to
the layer-cake formula, so ||f||_{p,p} = ||f||_p up to rounding.

ORLICZ AVERAGE
||f||_{Phi,Q} = inf{lambda > 0 : avg_Q Phi(|f|/lambda) <= 1}, found by a
vectorized bisection on log(lambda) so whole families of cubes are
solved at once.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.analysis.field import ScalarField

logger = logging.getLogger(__name__)

BISECTION_STEPS = 64
BRACKET_STEPS = 400

# Fitting window for the tail classification, in powers of ten
TAIL_WINDOW = (6.0, 8.0)
TAIL_SAMPLES = 201
TAIL_MARGIN = 0.05


@dataclass(frozen=True)
class LorentzIndex:
    p: float
    q: float

    def __post_init__(self):
        if not self.p > 0 or not self.q > 0:
            raise ValueError(f"Lorentz indices must be positive, got p={self.p}, q={self.q}")
        if math.isinf(self.p):
            raise ValueError("Lorentz index p must be finite")

    def conjugate(self) -> "LorentzIndex":
        """(p', q') for 1 < p < inf and 1 <= q <= inf."""
        if not 1 < self.p:
            raise ValueError(f"conjugate index needs p > 1, got p={self.p}")
        if self.q < 1:
            raise ValueError(f"conjugate index needs q >= 1, got q={self.q}")
        return LorentzIndex(conjugate_exponent(self.p), conjugate_exponent(self.q))


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True, eq=False)
class StepDistribution:
    """
    Right-continuous step function lambda -> mu{|f| > lambda}.

    thresholds are strictly decreasing positive levels a_k; measures are
    the nondecreasing D_k = mu{|f| >= a_k}. The function equals D_k on
    [a_{k+1}, a_k) and 0 from a_1 on.
    """

    thresholds: np.ndarray
    measures: np.ndarray

    def __call__(self, level: float) -> float:
        above = self.thresholds > level
        count = int(np.count_nonzero(above))
        return float(self.measures[count - 1]) if count else 0.0


def distribution_from_samples(samples: np.ndarray, cell_measures) -> StepDistribution:
    magnitude = np.abs(np.asarray(samples, dtype=float)).ravel()
    measures = np.broadcast_to(np.asarray(cell_measures, dtype=float), magnitude.shape).ravel()
    keep = magnitude > 0
    levels, inverse = np.unique(magnitude[keep], return_inverse=True)
    mass = np.bincount(inverse, weights=measures[keep], minlength=len(levels))
    return StepDistribution(levels[::-1].copy(), np.cumsum(mass[::-1]))


def distribution(f: ScalarField, density: Optional[ScalarField] = None) -> StepDistribution:
    """Distribution of |f| under h^n * density (Lebesgue if density is None)."""
    measures = f.grid.cell_volume
    if density is not None:
        if np.any(density.values < 0):
            raise ValueError("density must be nonnegative")
        measures = density.values * f.grid.cell_volume
    return distribution_from_samples(f.values, measures)


def _norm_from_steps(levels: np.ndarray, cumulative: np.ndarray, index: LorentzIndex) -> float:
    if len(levels) == 0:
        return 0.0
    p, q = index.p, index.q
    if math.isinf(q):
        return float(np.max(levels * cumulative ** (1.0 / p)))
    following = np.append(levels[1:], 0.0)
    total = (p / q) * np.sum(cumulative ** (q / p) * (levels ** q - following ** q))
    return float(total ** (1.0 / q))


def lorentz_norm_from_samples(samples: np.ndarray, cell_measures, index: LorentzIndex) -> float:
    steps = distribution_from_samples(samples, cell_measures)
    return _norm_from_steps(steps.thresholds, steps.measures, index)


def lorentz_norm(f: ScalarField, index: LorentzIndex, density: Optional[ScalarField] = None) -> float:
    """||f||_{L^{p,q}} with respect to h^n * density."""
    steps = distribution(f, density)
    return _norm_from_steps(steps.thresholds, steps.measures, index)


def lorentz_norm_rows(rows: np.ndarray, index: LorentzIndex) -> np.ndarray:
    """
    Normalized Lorentz norm of each row under the uniform probability measure.

    Used for cube averages ||f||_{L^{p,q}(Q, dx/|Q|)}: every cell of a row
    carries mass 1/width. Ties between equal values need no merging: the
    closed form telescopes over repeated levels.
    """
    rows = np.abs(np.asarray(rows, dtype=float))
    count, width = rows.shape
    if width == 0:
        raise ValueError("cannot take a Lorentz norm over an empty cube")
    ordered = -np.sort(-rows, axis=1)
    cumulative = np.arange(1, width + 1) / width
    p, q = index.p, index.q
    if math.isinf(q):
        return np.max(ordered * cumulative ** (1.0 / p), axis=1)
    following = np.concatenate([ordered[:, 1:], np.zeros((count, 1))], axis=1)
    total = (p / q) * np.sum(cumulative ** (q / p) * (ordered ** q - following ** q), axis=1)
    return np.maximum(total, 0.0) ** (1.0 / q)


def lorentz_avg(f: ScalarField, region, index: LorentzIndex) -> float:
    """||f||_{L^{p,q}(Q, dx/|Q|)} over the cells of a cube or ball."""
    inside = region.mask(f.grid)
    if not inside.any():
        raise ValueError(f"{region} contains no cell center of the grid")
    return float(lorentz_norm_rows(f.values[inside][None, :], index)[0])


def holder_lorentz(
    f: ScalarField, g: ScalarField, index: LorentzIndex, density: Optional[ScalarField] = None
) -> tuple:
    """
    Both sides of int |f g| <= ||f||_{p,q} ||g||_{p',q'}.

    Returns:
        (lhs, rhs)
    """
    if not 1 < index.p < math.inf:
        raise ValueError(f"Holder pairing needs 1 < p < inf, got p={index.p}")
    if not 1 <= index.q:
        raise ValueError(f"Holder pairing needs q >= 1, got q={index.q}")
    weights = f.grid.cell_volume if density is None else density.values * f.grid.cell_volume
    lhs = float(np.sum(np.abs(f.values * g.values) * weights))
    rhs = lorentz_norm(f, index, density) * lorentz_norm(g, index.conjugate(), density)
    return lhs, rhs


@dataclass(frozen=True)
class YoungFunction:
    """
    Young functions of the bump conditions.

    family "power":      Phi(t) = t^p
    family "power_log":  Phi(t) = t^p * log(e + t)^a

    Convex on [0, inf) for p >= 1 and a >= 0; the a < 0 members appear
    only as associates and are convex for large t, which is all the
    B-class tests look at.
    """

    family: str
    p: float
    a: float = 0.0

    def __post_init__(self):
        if self.family not in ("power", "power_log"):
            raise ValueError(f"unknown Young function family '{self.family}'")
        if not self.p >= 1:
            raise ValueError(f"Young function exponent must be >= 1 (convexity), got p={self.p}")
        if self.family == "power" and self.a != 0.0:
            raise ValueError("power family takes no log exponent")

    @classmethod
    def power(cls, p: float) -> "YoungFunction":
        return cls("power", float(p))

    @classmethod
    def power_log(cls, p: float, a: float) -> "YoungFunction":
        return cls("power_log", float(p), float(a))

    @property
    def label(self) -> str:
        if self.family == "power":
            return f"t^{self.p:g}"
        return f"t^{self.p:g}*log(e+t)^{self.a:g}"

    def log_value(self, t) -> np.ndarray:
        """log Phi(t) for t > 0, computed without overflow."""
        t = np.asarray(t, dtype=float)
        logs = self.p * np.log(t)
        if self.family == "power_log":
            logs = logs + self.a * np.log(np.log(np.e + t))
        return logs

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        positive = t > 0
        with np.errstate(over="ignore"):
            out[positive] = np.exp(self.log_value(t[positive]))
        return out

    def inverse(self, s) -> np.ndarray:
        """Phi^{-1}(s) for s >= 0, by bisection in log t for the log family."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.zeros_like(s)
        positive = s > 0
        if self.family == "power":
            out[positive] = s[positive] ** (1.0 / self.p)
            return out
        target = np.log(s[positive])
        low = np.full(target.shape, -60.0)
        high = np.full(target.shape, 60.0)
        for _ in range(BISECTION_STEPS * 2):
            mid = 0.5 * (low + high)
            too_big = self.log_value(np.exp(mid)) > target
            high = np.where(too_big, mid, high)
            low = np.where(too_big, low, mid)
        out[positive] = np.exp(0.5 * (low + high))
        return out


def associate(phi: YoungFunction) -> YoungFunction:
    """
    Complementary Young function, up to equivalence for large t.

    t^p -> t^{p'};  t^s log^a -> t^{s'} log^{-a s'/s}.
    """
    if phi.p <= 1:
        raise ValueError(f"associate of {phi.label} is L^inf-type and not representable")
    conjugate = phi.p / (phi.p - 1.0)
    if phi.family == "power":
        return YoungFunction.power(conjugate)
    return YoungFunction.power_log(conjugate, -phi.a * conjugate / phi.p)


def luxemburg_rows(rows: np.ndarray, phi: YoungFunction, rtol: float = 1e-12) -> np.ndarray:
    """
    Luxemburg average inf{lambda : mean(Phi(|row|/lambda)) <= 1} per row.

    Rows that vanish identically get 0.
    """
    rows = np.abs(np.asarray(rows, dtype=float))
    peaks = rows.max(axis=1)
    result = np.zeros(len(rows))
    live = peaks > 0
    if not live.any():
        return result
    data = rows[live]

    def excess(log_lambda: np.ndarray) -> np.ndarray:
        # log of mean Phi(|f|/lambda); <= 0 means lambda is feasible
        scaled = data / np.exp(log_lambda)[:, None]
        logs = np.full(scaled.shape, -np.inf)
        nonzero = scaled > 0
        logs[nonzero] = phi.log_value(scaled[nonzero])
        top = logs.max(axis=1)
        return top + np.log(np.mean(np.exp(logs - top[:, None]), axis=1))

    # convexity gives mean Phi(|f|/lambda) <= 1 at lambda = max|f| * max(1, Phi(1))
    high = np.log(peaks[live] * max(1.0, float(phi(np.array([1.0]))[0])))
    while True:
        over = excess(high) > 0
        if not over.any():
            break
        high = np.where(over, high + math.log(2.0), high)
    low = high - math.log(2.0)
    for _ in range(BRACKET_STEPS):
        under = excess(low) <= 0
        if not under.any():
            break
        high = np.where(under, low, high)
        low = np.where(under, low - math.log(2.0), low)
    else:
        raise RuntimeError("Luxemburg bracketing did not terminate")
    steps = max(1, int(math.ceil(math.log2(math.log(2.0) / max(rtol, 1e-16)))))
    for _ in range(steps):
        mid = 0.5 * (low + high)
        feasible = excess(mid) <= 0
        high = np.where(feasible, mid, high)
        low = np.where(feasible, low, mid)
    result[live] = np.exp(high)
    return result


def orlicz_avg(f: ScalarField, region, phi: YoungFunction, rtol: float = 1e-12) -> float:
    """Luxemburg norm of f on a cube or ball with respect to dx/|Q|."""
    inside = region.mask(f.grid)
    if not inside.any():
        raise ValueError(f"{region} contains no cell center of the grid")
    return float(luxemburg_rows(f.values[inside][None, :], phi, rtol)[0])


@dataclass(frozen=True)
class TailVerdict:
    """Outcome of a B_p / B_{p,q} growth test."""

    verdict: str
    slope: float
    log_exponent: float

    @property
    def member(self) -> bool:
        return self.verdict == "member"


def bp_classify(phi: YoungFunction, p: float, q: Optional[float] = None) -> TailVerdict:
    """
    Decide Phi in B_p (q None) or Phi in B_{p,q} from the tail of the integrand.

    B_p:      int^inf Phi(t) / t^p  dt/t          < inf
    B_{p,q}:  int^inf (Phi(t)/t^p)^(q/p) dt/t     < inf

    log g(t) is fitted on t in [1e6, 1e8] by A + s*log t + b*log log(e+t).
    The integral of t^s log^b converges iff s < -1, or s = -1 and b < -1,
    so the verdict reads the pair (s, b) with a 0.05 margin.
    """
    if not p > 0:
        raise ValueError(f"B-class exponent must be positive, got p={p}")
    t = np.logspace(TAIL_WINDOW[0], TAIL_WINDOW[1], TAIL_SAMPLES)
    if q is None:
        log_g = phi.log_value(t) - (p + 1.0) * np.log(t)
    else:
        if not q > 0:
            raise ValueError(f"B_(p,q) exponent q must be positive, got q={q}")
        log_g = (q / p) * (phi.log_value(t) - p * np.log(t)) - np.log(t)
    design = np.stack([np.ones_like(t), np.log(t), np.log(np.log(np.e + t))], axis=1)
    coefficients, *_ = np.linalg.lstsq(design, log_g, rcond=None)
    slope, log_exponent = float(coefficients[1]), float(coefficients[2])

    if slope < -1.0 - TAIL_MARGIN:
        verdict = "member"
    elif slope > -1.0 + TAIL_MARGIN:
        verdict = "nonmember"
    elif log_exponent < -1.0 - TAIL_MARGIN:
        verdict = "member"
    elif log_exponent > -1.0 + TAIL_MARGIN:
        verdict = "nonmember"
    else:
        verdict = "inconclusive"
    logger.debug(f"B-class test {phi.label}, p={p}, q={q}: slope={slope:.4f}, log exponent={log_exponent:.4f} -> {verdict}")
    return TailVerdict(verdict, slope, log_exponent)
