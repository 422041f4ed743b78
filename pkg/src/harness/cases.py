"""
Named inequality cases, the runner, and the sweeps built on it.

A case turns a CaseContext (grid, families, seeded suites) into one row
per suite member: an EmpiricalConstantReport for lhs <= C rhs. Pointwise
cases compare two fields; norm cases compare two numbers.

Why a context object?
- Several cases share I_1(|grad f|), M f and M_{L^{n',1}} f for the same
  bump; FieldData computes each once per grid
- Sweeps build a fresh context per grid, so nothing leaks between
  resolutions or radii

Every case declares what a verify run expects of it: "bounded" (stable
under refinement or domain doubling, within any spread or anchor cap the
case declares), "growth" (positive fitted exponent along its probe axis)
or "none" (reported only).
"""

from __future__ import annotations

import logging
import math
import threading
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from src.analysis.field import GridSpec, ScalarField, gradient, lp_norm
from src.analysis.geometry import CubeFamily, SphereQuadrature, sphere_area, sphere_quadrature
from src.analysis.lorentz import YoungFunction, conjugate_exponent
from src.analysis.maximal import (
    MaximalGauge,
    cube_maximal,
    fractional_maximal,
    hardy_littlewood,
    iterated_maximal,
    measure_maximal,
    orlicz_maximal,
    rough_maximal,
    sharp_maximal,
    sphere_maximal,
)
from src.analysis.potential import a1_power_weight, riesz_potential
from src.analysis.singular import SphereFunction, beurling, maximal_rough, riesz_transform
from src.analysis.weights import a1_constant
from src.harness.checks import poincare_check, sobolev_suite, weak_type_norm
from src.harness.empirical import (
    EmpiricalConstantReport,
    EmptyMaskError,
    empirical_constant,
    fit_growth_exponent,
    norm_ratio,
    relative_drift,
)
from src.harness.suites import (
    BumpSpec,
    bump_suite,
    lemma_measure,
    omega_suite,
    random_balls,
    sphere_measure,
    weight_suite,
)
from src.utils.config import ExperimentConfig

logger = logging.getLogger(__name__)

POINCARE_BALLS = 50
GROWTH_THRESHOLD = 0.1
SUITE_SPREAD_CAP = 3.0
REPRESENTATION_SLACK = 1.1
MIN_PROBE_POINTS = 4

ALIASES = {"neg": "neg-Mn'+ε"}


class CaseContext:
    """Grid, cube families and seeded suites for one run of the cases."""

    def __init__(self, config: ExperimentConfig, grid: Optional[GridSpec] = None):
        self.config = config
        self.grid = grid or GridSpec(config.dimension, config.half_width, config.cells)
        self.theta = config.theta
        self.family = CubeFamily.dyadic(self.grid)
        self.thinned_family = CubeFamily.dyadic(self.grid, stride_shift=config.stride_shift)
        self.weight_family = CubeFamily.dyadic(self.grid, inside_only=True)
        self.thinned_weight_family = CubeFamily.dyadic(self.grid, inside_only=True, stride_shift=config.stride_shift)
        # bumps are drawn against the configured R, not this grid's R
        self.bumps = bump_suite(self.grid.dimension, config.bump_count, config.seed, config.half_width)
        self._fields: Dict[str, "FieldData"] = {}
        self._lock = threading.Lock()

    @cached_property
    def quadrature(self) -> SphereQuadrature:
        return sphere_quadrature(self.grid.dimension, self.config.sphere_nodes)

    @cached_property
    def omegas(self) -> List[SphereFunction]:
        return omega_suite(
            self.quadrature,
            self.config.omega_count,
            self.config.omega_degree,
            self.config.seed,
            mean=self.config.omega_mean,
            project=self.config.project_mean_zero,
        )

    @cached_property
    def weights(self) -> List[Tuple[str, ScalarField]]:
        return weight_suite(self.config.weights, self.grid, self.config.seed)

    @property
    def n_prime(self) -> float:
        return conjugate_exponent(self.grid.dimension)

    def field_data(self, spec: BumpSpec) -> "FieldData":
        with self._lock:
            if spec.field_id not in self._fields:
                self._fields[spec.field_id] = FieldData(self, spec)
            return self._fields[spec.field_id]

    def fields(self) -> List["FieldData"]:
        return [self.field_data(spec) for spec in self.bumps]


class FieldData:
    """One bump and the derived fields several cases share."""

    def __init__(self, ctx: CaseContext, spec: BumpSpec):
        self.ctx = ctx
        self.spec = spec
        self.field_id = spec.field_id
        self.f = spec.realize(ctx.grid)
        self._tstar: Dict[str, ScalarField] = {}
        self._lock = threading.Lock()

    @cached_property
    def grad_norm(self) -> ScalarField:
        return gradient(self.f).magnitude()

    @cached_property
    def potential(self) -> ScalarField:
        return riesz_potential(self.grad_norm, 1.0)

    @cached_property
    def hl(self) -> ScalarField:
        return hardy_littlewood(self.f, self.ctx.family)

    @cached_property
    def m1_grad(self) -> ScalarField:
        return fractional_maximal(self.grad_norm, 1.0, self.ctx.family)

    @cached_property
    def lorentz_max(self) -> ScalarField:
        gauge = MaximalGauge.lorentz_gauge(self.ctx.n_prime, 1.0)
        return cube_maximal(self.f, gauge, self.ctx.thinned_family)

    def tstar(self, omega: SphereFunction) -> ScalarField:
        with self._lock:
            cached = self._tstar.get(omega.label)
        if cached is None:
            cached = maximal_rough(self.f, omega, self.ctx.config.nodes_per_octave)
            with self._lock:
                self._tstar[omega.label] = cached
        return cached


@dataclass
class CaseRow:
    case_id: str
    field_id: str
    omega_id: Optional[str]
    report: EmpiricalConstantReport
    runtime_ms: float

    def to_record(self, grid: GridSpec, theta: float) -> dict:
        record = {
            "case_id": self.case_id,
            "field_id": self.field_id,
            "omega_id": self.omega_id,
            "n": grid.dimension,
            "N": grid.cells,
            "R": grid.half_width,
            "theta": theta,
            "c_emp": self.report.c_emp,
        }
        record.update(self.report.argmax_columns())
        record["masked_points"] = self.report.masked_points
        record["runtime_ms"] = self.runtime_ms
        return record


@dataclass
class CaseResult:
    case_id: str
    grid: GridSpec
    theta: float
    rows: List[CaseRow] = field(default_factory=list)

    @property
    def aggregate(self) -> CaseRow:
        return max(self.rows, key=lambda row: row.report.c_emp)

    @property
    def c_emp(self) -> float:
        return self.aggregate.report.c_emp

    @property
    def spread(self) -> float:
        """max / min c_emp over the suite (inf if some member gives 0)."""
        values = [row.report.c_emp for row in self.rows]
        smallest = min(values)
        return max(values) / smallest if smallest > 0 else math.inf

    def grouped_spread(self, by: str = "field") -> float:
        """Spread of the per-group maxima, grouping rows by field_id or omega_id."""
        if by not in ("field", "omega"):
            raise ValueError(f"spread groups by 'field' or 'omega', got '{by}'")
        groups: Dict[Optional[str], float] = {}
        for row in self.rows:
            key = row.field_id if by == "field" else row.omega_id
            groups[key] = max(groups.get(key, 0.0), row.report.c_emp)
        smallest = min(groups.values())
        return max(groups.values()) / smallest if smallest > 0 else math.inf

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.to_record(self.grid, self.theta) for row in self.rows])


@dataclass(frozen=True)
class InequalityCase:
    """
    Attributes:
        case_id: Registry key, e.g. "thm-1.1"
        description: lhs <= C rhs in words
        evaluate: CaseContext -> rows
        expectation: config -> "bounded" | "growth" | "none"
        probe_axis: Axis a growth case diverges along
        bounded_axis: "resolution" (refinement) or "radius" (domain doubling)
        spread_cap: Largest allowed grouped spread of a bounded run
        spread_by: Rows grouped by "field" or "omega" for the spread
        anchor: n -> upper bound on the aggregate c_emp
    """

    case_id: str
    description: str
    evaluate: Callable[[CaseContext], List[CaseRow]]
    min_dimension: int = 2
    max_dimension: int = 3
    expectation: Callable[[ExperimentConfig], str] = lambda config: "bounded"
    probe_axis: Optional[str] = None
    bounded_axis: str = "resolution"
    spread_cap: Optional[float] = None
    spread_by: str = "field"
    anchor: Optional[Callable[[int], float]] = None


CASES: Dict[str, InequalityCase] = {}


def register(case_id: str, description: str, **options):
    def wrap(evaluate):
        CASES[case_id] = InequalityCase(case_id, description, evaluate, **options)
        return evaluate

    return wrap


def resolve_case(case_id: str) -> InequalityCase:
    key = ALIASES.get(case_id, case_id)
    if key not in CASES:
        raise ValueError(f"unknown case id '{case_id}'; known cases: {', '.join(sorted(CASES))}")
    return CASES[key]


Item = Tuple[str, Optional[str], Callable[[], EmpiricalConstantReport]]


def _collect(ctx: CaseContext, case_id: str, items: Iterable[Item]) -> List[CaseRow]:
    rows = []
    for field_id, omega_id, measure in items:
        started = time.perf_counter()
        try:
            report = measure()
        except EmptyMaskError:
            logger.warning(f"{case_id}: right-hand side vanishes for {field_id}/{omega_id}; row skipped")
            continue
        runtime_ms = (time.perf_counter() - started) * 1000.0
        rows.append(CaseRow(case_id, field_id, omega_id, report, runtime_ms))
    return rows


def _pointwise(ctx: CaseContext, case_id: str, lhs: Callable, rhs: Callable) -> List[CaseRow]:
    """One row per bump: empirical_constant(lhs(data), rhs(data))."""
    items = [
        (data.field_id, None, lambda data=data: empirical_constant(lhs(data), rhs(data), ctx.theta))
        for data in ctx.fields()
    ]
    return _collect(ctx, case_id, items)


def _per_omega(ctx: CaseContext, case_id: str, lhs: Callable, rhs: Callable) -> List[CaseRow]:
    """One row per (bump, Omega)."""
    items = [
        (
            data.field_id,
            omega.label,
            lambda data=data, omega=omega: empirical_constant(lhs(data, omega), rhs(data, omega), ctx.theta),
        )
        for data in ctx.fields()
        for omega in ctx.omegas
    ]
    return _collect(ctx, case_id, items)


def _per_weight(ctx: CaseContext, case_id: str, measure: Callable) -> List[CaseRow]:
    """One row per (bump, weight); the weight id goes in the omega_id column."""
    items = [
        (data.field_id, weight_id, lambda data=data, w=w: measure(data, w))
        for data in ctx.fields()
        for weight_id, w in ctx.weights
    ]
    return _collect(ctx, case_id, items)


@register(
    "repr-2",
    "|f| <= C I_1(|grad f|)",
    min_dimension=1,
    anchor=lambda n: REPRESENTATION_SLACK / sphere_area(n),
)
def _repr(ctx):
    return _pointwise(ctx, "repr-2", lambda d: d.f.abs(), lambda d: d.potential)


@register("pointmax-8", "M f <= C I_1(|grad f|)", min_dimension=1)
def _pointmax(ctx):
    return _pointwise(ctx, "pointmax-8", lambda d: d.hl, lambda d: d.potential)


@register("iter-9", "M^k f <= C I_1(|grad f|)", min_dimension=1)
def _iterated(ctx):
    k = ctx.config.iter_k
    return _pointwise(ctx, "iter-9", lambda d: iterated_maximal(d.f, k, ctx.family), lambda d: d.potential)


@register("sharp-12", "M# f <= C M_1(|grad f|)", min_dimension=1)
def _sharp(ctx):
    return _pointwise(ctx, "sharp-12", lambda d: sharp_maximal(d.f, ctx.thinned_family), lambda d: d.m1_grad)


@register("Mn'-22", "M_{L^n'} f <= C I_1(|grad f|)")
def _power_nprime(ctx):
    gauge = MaximalGauge.power(ctx.n_prime)
    return _pointwise(ctx, "Mn'-22", lambda d: cube_maximal(d.f, gauge, ctx.thinned_family), lambda d: d.potential)


@register("thm-1.1", "M_{L^(n',1)} f <= C (M_1(|grad f|) + M f)", spread_cap=SUITE_SPREAD_CAP)
def _lorentz_maximal(ctx):
    return _pointwise(ctx, "thm-1.1", lambda d: d.lorentz_max, lambda d: d.m1_grad + d.hl)


@register("cor-1.2", "M_Omega f <= C ||Omega||_{L^(n,inf)} M_{L^(n',1)} f")
def _rough_maximal(ctx):
    return _per_omega(
        ctx,
        "cor-1.2",
        lambda d, omega: rough_maximal(d.f, omega),
        lambda d, omega: d.lorentz_max.scaled(omega.weak_norm),
    )


@register(
    "main-1.4",
    "T*_Omega f <= C ||Omega||_{L^(n,inf)} I_1(|grad f|)",
    expectation=lambda config: "bounded" if config.project_mean_zero else "growth",
    probe_axis="resolution",
    spread_cap=SUITE_SPREAD_CAP,
    spread_by="omega",
)
def _main(ctx):
    return _per_omega(
        ctx,
        "main-1.4",
        lambda d, omega: d.tstar(omega),
        lambda d, omega: d.potential.scaled(omega.weak_norm),
    )


def _self_improving_operator(ctx: CaseContext) -> List[Tuple[Optional[SphereFunction], Callable]]:
    name = ctx.config.selfimp_operator
    if name == "identity":
        return [(None, lambda d: d.f.abs())]
    if name == "M":
        return [(None, lambda d: d.hl)]
    return [(omega, lambda d, omega=omega: d.tstar(omega)) for omega in ctx.omegas]


@register("selfimp-1.6", "M_{L^r}(T f) <= C I_1(|grad f|), r < n'")
def _self_improving(ctx):
    r = ctx.config.r
    if not r < ctx.n_prime:
        raise ValueError(f"selfimp-1.6 needs r < n' = {ctx.n_prime:.6g}, got r={r}")
    gauge = MaximalGauge.power(r)
    items = []
    for omega, operator in _self_improving_operator(ctx):
        scale = omega.weak_norm if omega is not None else 1.0
        label = omega.label if omega is not None else ctx.config.selfimp_operator
        for data in ctx.fields():
            items.append(
                (
                    data.field_id,
                    label,
                    lambda data=data, operator=operator, scale=scale: empirical_constant(
                        cube_maximal(operator(data), gauge, ctx.thinned_family),
                        data.potential.scaled(scale),
                        ctx.theta,
                    ),
                )
            )
    return _collect(ctx, "selfimp-1.6", items)


@register("sphere-max", "spherical maximal f <= C I_1(|grad f|)")
def _sphere_max(ctx):
    return _pointwise(ctx, "sphere-max", lambda d: sphere_maximal(d.f, ctx.quadrature), lambda d: d.potential)


@register("measure-max", "M_mu f <= C (I_1(|grad f|) + M f), mu on the unit sphere")
def _measure_max(ctx):
    mu = sphere_measure(ctx.quadrature)
    return _pointwise(ctx, "measure-max", lambda d: measure_maximal(d.f, mu), lambda d: d.potential + d.hl)


@register("riesz-max-27", "R*_1 f <= C M^2(R_1 f)")
def _riesz_max(ctx):
    npo = ctx.config.nodes_per_octave

    def lhs(d):
        return riesz_transform(d.f, 0, "maximal", ctx.quadrature, npo)

    def rhs(d):
        return iterated_maximal(riesz_transform(d.f, 0, "pv", ctx.quadrature, npo), 2, ctx.family)

    return _pointwise(ctx, "riesz-max-27", lhs, rhs)


def _beurling_modulus(ctx: CaseContext, data: FieldData) -> ScalarField:
    s_re, s_im = beurling(data.f, None, "pv", ctx.quadrature, ctx.config.nodes_per_octave)
    return ScalarField(ctx.grid, (s_re.values ** 2 + s_im.values ** 2) ** 0.5)


@register("beurling-25", "|S f| <= C I_1(|grad f|)", max_dimension=2)
def _beurling(ctx):
    return _pointwise(ctx, "beurling-25", lambda d: _beurling_modulus(ctx, d), lambda d: d.potential)


@register("beurling-max-26", "S* f <= C M(S f)", max_dimension=2)
def _beurling_max(ctx):
    def lhs(d):
        modulus, _ = beurling(d.f, None, "maximal", ctx.quadrature, ctx.config.nodes_per_octave)
        return modulus

    return _pointwise(ctx, "beurling-max-26", lhs, lambda d: hardy_littlewood(_beurling_modulus(ctx, d), ctx.family))


@register(
    "neg-Mn'+ε",
    "M_{L^(n'+eps)} f <= C I_1(|grad f|) fails: c_emp grows with R",
    expectation=lambda config: "growth",
    probe_axis="radius",
)
def _negative(ctx):
    gauge = MaximalGauge.power(ctx.n_prime + ctx.config.neg_epsilon)
    return _pointwise(ctx, "neg-Mn'+ε", lambda d: cube_maximal(d.f, gauge, ctx.thinned_family), lambda d: d.potential)


def _lemma_expectation(config: ExperimentConfig) -> str:
    n, alpha = config.dimension, config.alpha
    return "growth" if config.lemma_r >= n / (n - alpha) else "bounded"


@register(
    "lemma-1.5",
    "[(I_alpha mu)^r]_{A_1} bounded for r < n/(n-alpha)",
    min_dimension=1,
    expectation=_lemma_expectation,
    probe_axis="radius",
    bounded_axis="radius",
)
def _lemma(ctx):
    def measure():
        weight = a1_power_weight(lemma_measure(ctx.grid), ctx.config.alpha, ctx.config.lemma_r, ctx.grid)
        report = a1_constant(weight, ctx.weight_family)
        witness = tuple(report.witness.center) if report.witness is not None else None
        return EmpiricalConstantReport(c_emp=report.value, argmax=witness, masked_points=ctx.grid.total_cells)

    return _collect(ctx, "lemma-1.5", [("lemma-measure", None, measure)])


@register("weak-n'", "||M_{L^(n',1)} f||_{L^(n',inf)} <= C ||grad f||_1")
def _weak_nprime(ctx):
    items = [
        (
            d.field_id,
            None,
            lambda d=d: norm_ratio(weak_type_norm(d.lorentz_max, ctx.n_prime), lp_norm(d.grad_norm, 1.0)),
        )
        for d in ctx.fields()
    ]
    return _collect(ctx, "weak-n'", items)


@register("weak-sphere", "||spherical maximal f||_{L^(n',inf)} <= C ||grad f||_1")
def _weak_sphere(ctx):
    items = [
        (
            d.field_id,
            None,
            lambda d=d: norm_ratio(
                weak_type_norm(sphere_maximal(d.f, ctx.quadrature), ctx.n_prime), lp_norm(d.grad_norm, 1.0)
            ),
        )
        for d in ctx.fields()
    ]
    return _collect(ctx, "weak-sphere", items)


@register("weak-mu-44", "||M f||_{L^(n',inf)(w^n')} <= C int |grad f| M(w^n')^(1/n')")
def _weak_measure(ctx):
    n_prime = ctx.n_prime

    def measure(d, w):
        density = w.power(n_prime)
        lhs = weak_type_norm(d.hl, n_prime, density)
        rhs = (d.grad_norm * hardy_littlewood(density, ctx.weight_family).power(1.0 / n_prime)).integral()
        return norm_ratio(lhs, rhs)

    return _per_weight(ctx, "weak-mu-44", measure)


@register("endpoint-43", "||T*_Omega f||_{L^(1,inf)(w)} <= C ||Omega|| int |grad f| M_1(M_{L log L^eps} w)")
def _endpoint(ctx):
    omega = ctx.omegas[0]
    young = YoungFunction.power_log(1.0, ctx.config.epsilon)

    def measure(d, w):
        lhs = weak_type_norm(d.tstar(omega), 1.0, w)
        bumped = orlicz_maximal(w, young, ctx.thinned_weight_family)
        rhs = omega.weak_norm * (d.grad_norm * fractional_maximal(bumped, 1.0, ctx.family)).integral()
        return norm_ratio(lhs, rhs)

    return _per_weight(ctx, "endpoint-43", measure)


@register("CZ-grad-14", "||M f||_{L^p(w)} <= C ||M_1(|grad f|)||_{L^p(w)}")
def _cz_gradient(ctx):
    p = ctx.config.p
    return _per_weight(
        ctx, "CZ-grad-14", lambda d, w: norm_ratio(lp_norm(d.hl, p, w), lp_norm(d.m1_grad, p, w))
    )


@register("coif-fef-cor3.2", "||T*_Omega f||_{L^p(w)} <= C ||Omega|| ||M_1(|grad f|)||_{L^p(w)}")
def _coifman_fefferman(ctx):
    p = ctx.config.p
    omega = ctx.omegas[0]
    return _per_weight(
        ctx,
        "coif-fef-cor3.2",
        lambda d, w: norm_ratio(lp_norm(d.tstar(omega), p, w), omega.weak_norm * lp_norm(d.m1_grad, p, w)),
    )


@register("twoweight-cor1.3", "||M f||_{L^q(w^q)} <= C ||grad f||_{L^p(w^p)}")
def _two_weight(ctx):
    p, q = ctx.config.p, ctx.config.q
    return _per_weight(
        ctx,
        "twoweight-cor1.3",
        lambda d, w: norm_ratio(lp_norm(d.hl, q, w.power(q)), lp_norm(d.grad_norm, p, w.power(p))),
    )


def explore_gauge(spec: dict) -> MaximalGauge:
    """Gauge from a config object: power(r), lorentz(p, q), orlicz(p, a) or mean(alpha)."""
    variant = spec.get("variant")
    if variant == "power":
        return MaximalGauge.power(float(spec["r"]))
    if variant == "lorentz":
        return MaximalGauge.lorentz_gauge(float(spec["p"]), float(spec["q"]))
    if variant == "orlicz":
        return MaximalGauge.orlicz(YoungFunction.power_log(float(spec["p"]), float(spec.get("a", 0.0))))
    if variant == "mean":
        return MaximalGauge.mean(float(spec.get("alpha", 0.0)))
    raise ValueError(f"unknown explore gauge variant '{variant}', expected power, lorentz, orlicz or mean")


@register(
    "explore",
    "user gauge M_X f vs I_1(|grad f|), reported without a verdict",
    min_dimension=1,
    expectation=lambda config: "none",
)
def _explore(ctx):
    gauge = explore_gauge(ctx.config.explore_gauge)
    logger.info(f"explore: gauge {gauge.label}")
    return _pointwise(ctx, "explore", lambda d: cube_maximal(d.f, gauge, ctx.thinned_family), lambda d: d.potential)


def _poincare(ctx: CaseContext, case_id: str, variant: str) -> List[CaseRow]:
    balls = random_balls(ctx.grid, POINCARE_BALLS, ctx.config.seed)

    def measure(d):
        result = poincare_check(d.f, balls, variant, p=1.0)
        center = tuple(result.region.center) if result.region is not None else None
        return EmpiricalConstantReport(c_emp=result.ratio, argmax=center, masked_points=result.evaluated)

    return _collect(ctx, case_id, [(d.field_id, None, lambda d=d: measure(d)) for d in ctx.fields()])


@register("poincare-(1,1)", "avg_B |f - f_B| <= C r(B) avg_B |grad f|", min_dimension=1)
def _poincare_11(ctx):
    return _poincare(ctx, "poincare-(1,1)", "(1,1)")


@register("poincare-classical", "(avg_B |f - f_B|^n')^(1/n') <= C r(B) avg_B |grad f|")
def _poincare_classical(ctx):
    return _poincare(ctx, "poincare-classical", "classical")


@register("poincare-lorentz-16", "||f - f_B||_{L^(n',1)(B, dx/|B|)} <= C r(B) avg_B |grad f|")
def _poincare_lorentz(ctx):
    return _poincare(ctx, "poincare-lorentz-16", "lorentz")


@register(
    "sobolev-31",
    "||w T f||_{p*} <= C [w]_{A_(p,p*)}^(1/n') ||w grad f||_p, trend over weights",
    expectation=lambda config: "none",
)
def _sobolev(ctx):
    started = time.perf_counter()
    fields = [d.f for d in ctx.fields()]
    frame = sobolev_suite(
        fields,
        ctx.weights,
        ctx.config.p,
        operators=("identity", "M", "M2", "Tstar"),
        omega=ctx.omegas[0],
        family=ctx.family,
    )
    runtime_ms = (time.perf_counter() - started) * 1000.0 / max(1, len(frame))
    rows = []
    for record in frame.to_dict("records"):
        report = EmpiricalConstantReport(c_emp=record["normalized_ratio"], masked_points=len(fields))
        rows.append(CaseRow("sobolev-31", record["operator"], record["weight_id"], report, runtime_ms))
    return rows


def run_case(case_id: str, ctx: CaseContext) -> CaseResult:
    """
    Evaluate one case over its suite on the context's grid.

    Raises:
        ValueError: unknown case, dimension out of range, or no usable rows
    """
    case = resolve_case(case_id)
    n = ctx.grid.dimension
    if not case.min_dimension <= n <= case.max_dimension:
        raise ValueError(
            f"case {case.case_id} needs {case.min_dimension} <= n <= {case.max_dimension}, got n={n}"
        )
    logger.info(f"Running {case.case_id} on n={n}, N={ctx.grid.cells}, R={ctx.grid.half_width}")
    started = time.perf_counter()
    rows = case.evaluate(ctx)
    if not rows:
        raise ValueError(f"case {case.case_id} produced no rows: every right-hand side vanished")
    result = CaseResult(case.case_id, ctx.grid, ctx.theta, rows)
    elapsed = time.perf_counter() - started
    logger.info(f"{case.case_id}: c_emp={result.c_emp:.6g} over {len(rows)} rows ({elapsed:.1f}s)")
    return result


@dataclass
class SeriesResult:
    """c_emp along one axis, with the fitted exponent and stability flag."""

    case_id: str
    axis: str
    values: List[float]
    constants: List[float]
    exponent: Optional[float] = None
    drift: Optional[float] = None
    stable: Optional[bool] = None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "case_id": self.case_id,
                "axis": self.axis,
                "value": self.values,
                "c_emp": self.constants,
                "exponent": self.exponent,
                "drift": self.drift,
                "stable": self.stable,
            }
        )


def _probe_grid(config: ExperimentConfig, axis: str, value: float) -> GridSpec:
    if axis == "radius":
        cells = 2 * int(round(value / config.probe_h))
        return GridSpec(config.dimension, float(value), cells)
    return GridSpec(config.dimension, config.half_width, int(value))


def _default_probe_values(config: ExperimentConfig, axis: str) -> List[float]:
    if axis == "radius":
        return list(config.radii)
    if len(config.resolutions) >= MIN_PROBE_POINTS:
        return list(config.resolutions)
    top = config.cells
    return [top // 8, top // 4, top // 2, top]


def divergence_probe(
    case_id: str,
    config: ExperimentConfig,
    axis: Optional[str] = None,
    values: Optional[Sequence[float]] = None,
) -> SeriesResult:
    """
    Fitted growth exponent of the aggregate c_emp along one axis.

    radius: h = probe_h fixed, R grows; slope of log c_emp vs log R.
    resolution: R fixed, N grows; slope of log c_emp vs log(1/h).

    Raises:
        ValueError: fewer than four points, or an unknown axis
    """
    case = resolve_case(case_id)
    axis = axis or case.probe_axis or config.probe_axis or "radius"
    if axis not in ("radius", "resolution"):
        raise ValueError(f"probe axis must be 'radius' or 'resolution', got '{axis}'")
    values = list(values) if values is not None else _default_probe_values(config, axis)
    if len(values) < MIN_PROBE_POINTS:
        raise ValueError(f"a divergence probe needs at least {MIN_PROBE_POINTS} {axis} values, got {len(values)}")
    constants, abscissae = [], []
    for value in values:
        grid = _probe_grid(config, axis, value)
        result = run_case(case.case_id, CaseContext(config, grid))
        constants.append(result.c_emp)
        abscissae.append(grid.half_width if axis == "radius" else 1.0 / grid.spacing)
    exponent = fit_growth_exponent(abscissae, constants)
    logger.info(f"{case.case_id}: growth exponent {exponent:.4f} along {axis} over {values}")
    return SeriesResult(case.case_id, axis, [float(v) for v in values], constants, exponent=exponent)


def refinement_study(
    case_id: str,
    config: ExperimentConfig,
    resolutions: Optional[Sequence[int]] = None,
    known: Optional[Dict[int, float]] = None,
) -> SeriesResult:
    """
    c_emp over resolutions at fixed R, flagged stable when the last step
    drifts by at most config.stability_tolerance.

    Args:
        known: c_emp already measured at some resolutions (skips those runs)
    """
    case = resolve_case(case_id)
    resolutions = list(resolutions or config.resolutions)
    if len(resolutions) < 2:
        raise ValueError(f"a refinement study needs at least two resolutions, got {resolutions}")
    known = known or {}
    constants = []
    for cells in resolutions:
        if cells in known:
            constants.append(known[cells])
            continue
        grid = GridSpec(config.dimension, config.half_width, int(cells))
        constants.append(run_case(case.case_id, CaseContext(config, grid)).c_emp)
    drift = relative_drift(constants)
    stable = drift <= config.stability_tolerance
    exponent = None
    if len(resolutions) >= MIN_PROBE_POINTS and all(c > 0 for c in constants):
        spacings = [1.0 / GridSpec(config.dimension, config.half_width, int(c)).spacing for c in resolutions]
        exponent = fit_growth_exponent(spacings, constants)
    if not stable:
        logger.warning(f"{case.case_id}: c_emp drifts by {drift:.1%} across {resolutions}")
    return SeriesResult(
        case.case_id, "resolution", [float(c) for c in resolutions], constants, exponent=exponent, drift=drift, stable=stable
    )


def doubling_study(
    case_id: str,
    config: ExperimentConfig,
    doublings: int = 1,
    known: Optional[Dict[float, float]] = None,
) -> SeriesResult:
    """
    c_emp at R, 2R, ... with the spacing of the configured grid held fixed,
    flagged stable when the last doubling drifts by at most
    config.stability_tolerance.

    Args:
        known: c_emp already measured at some radii (skips those runs)
    """
    case = resolve_case(case_id)
    if doublings < 1:
        raise ValueError(f"a doubling study needs at least one doubling, got {doublings}")
    known = known or {}
    radii = [config.half_width * 2 ** k for k in range(doublings + 1)]
    constants = []
    for k, radius in enumerate(radii):
        if radius in known:
            constants.append(known[radius])
            continue
        grid = GridSpec(config.dimension, radius, config.cells * 2 ** k)
        constants.append(run_case(case.case_id, CaseContext(config, grid)).c_emp)
    drift = relative_drift(constants)
    stable = drift <= config.stability_tolerance
    if not stable:
        logger.warning(f"{case.case_id}: c_emp drifts by {drift:.1%} across radii {radii}")
    return SeriesResult(case.case_id, "radius", radii, constants, drift=drift, stable=stable)


@dataclass
class Assessment:
    case_id: str
    expectation: str
    passed: bool
    detail: str
    series: Optional[SeriesResult] = None


def _bounded_series(case: InequalityCase, config: ExperimentConfig, result: Optional[CaseResult]) -> SeriesResult:
    on_config_grid = (
        result is not None and result.grid.half_width == config.half_width and result.grid.cells == config.cells
    )
    if case.bounded_axis == "radius":
        known = {config.half_width: result.c_emp} if on_config_grid else {}
        return doubling_study(case.case_id, config, known=known)
    known = {result.grid.cells: result.c_emp} if result is not None and result.grid.half_width == config.half_width else {}
    return refinement_study(case.case_id, config, known=known)


def assess_case(
    case_id: str,
    config: ExperimentConfig,
    result: Optional[CaseResult] = None,
    series: Optional[SeriesResult] = None,
) -> Assessment:
    """
    Check a case against its expectation.

    bounded: drift along the case's bounded axis <= stability_tolerance,
             grouped spread <= spread_cap and aggregate c_emp <= anchor(n)
             where the case declares them
    growth:  divergence_probe exponent > 0.1
    none:    always passes

    A series measured elsewhere may be passed in; otherwise it is run here.
    """
    case = resolve_case(case_id)
    expectation = case.expectation(config)
    if expectation == "none":
        return Assessment(case.case_id, expectation, True, "reported only")
    if expectation == "growth":
        series = series or divergence_probe(case.case_id, config, axis=config.probe_axis or case.probe_axis)
        detail = f"exponent {series.exponent:.4f} along {series.axis} (needs > {GROWTH_THRESHOLD})"
        return Assessment(case.case_id, expectation, series.exponent > GROWTH_THRESHOLD, detail, series)

    series = series or _bounded_series(case, config, result)
    passed = bool(series.stable)
    details = [f"drift {series.drift:.1%} along {series.axis} (tolerance {config.stability_tolerance:.0%})"]
    if case.spread_cap is not None or case.anchor is not None:
        result = result or run_case(case.case_id, CaseContext(config))
    if case.spread_cap is not None:
        spread = result.grouped_spread(case.spread_by)
        passed = passed and spread <= case.spread_cap
        details.append(f"spread over {case.spread_by} {spread:.3g} (cap {case.spread_cap:g})")
    if case.anchor is not None:
        bound = case.anchor(result.grid.dimension)
        passed = passed and result.c_emp <= bound
        details.append(f"c_emp {result.c_emp:.4g} (anchor {bound:.4g})")
    if not passed:
        logger.warning(f"{case.case_id}: {'; '.join(details)}")
    return Assessment(case.case_id, expectation, passed, "; ".join(details), series)
