"""
Test the case registry, the runner and the sweep validation.
Run: python tests/test_cases.py
"""

import math
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).parent.parent))

from src.analysis.field import GridSpec
from src.harness.cases import (
    CASES,
    CaseContext,
    CaseResult,
    CaseRow,
    SeriesResult,
    assess_case,
    divergence_probe,
    doubling_study,
    explore_gauge,
    refinement_study,
    resolve_case,
    run_case,
)
from src.harness.empirical import EmpiricalConstantReport
from src.utils.config import ExperimentConfig


def _small_config(**overrides):
    data = {
        "dimension": 2,
        "half_width": 2.0,
        "cells": 32,
        "bump_count": 2,
        "omega_count": 1,
        "sphere_nodes": 16,
        "resolutions": [16, 32],
        "cases": ["repr-2"],
    }
    data.update(overrides)
    return ExperimentConfig.from_dict(data)


def test_registry():
    """Test case lookup, aliases and declared expectations."""

    print("Testing case registry...")

    assert resolve_case("neg").case_id == "neg-Mn'+ε"
    assert resolve_case("repr-2").min_dimension == 1
    assert resolve_case("beurling-25").max_dimension == 2
    try:
        resolve_case("thm-9.9")
        raise AssertionError("unknown case should raise")
    except ValueError as e:
        print(f"  ✓ {e}")
    print(f"  ✓ {len(CASES)} cases registered")

    config = _small_config()
    assert resolve_case("lemma-1.5").expectation(config) == "bounded"
    assert resolve_case("lemma-1.5").expectation(_small_config(lemma_r=2.5)) == "growth"
    assert resolve_case("main-1.4").expectation(config) == "bounded"
    assert resolve_case("main-1.4").expectation(_small_config(project_mean_zero=False)) == "growth"
    assert resolve_case("neg").expectation(config) == "growth"
    print("  ✓ Expectations follow lemma_r and project_mean_zero")


def test_run_case():
    """Test one pointwise case and the lemma weight case on a small grid."""

    print("\nTesting run_case...")

    ctx = CaseContext(_small_config())
    result = run_case("repr-2", ctx)
    assert len(result.rows) == 2
    assert math.isfinite(result.c_emp) and result.c_emp > 0
    assert result.spread >= 1.0
    frame = result.to_frame()
    assert list(frame["field_id"]) == ["bump-0", "bump-1"]
    assert {"case_id", "c_emp", "argmax_x1", "argmax_x2", "argmax_x3", "masked_points", "runtime_ms"} <= set(frame.columns)
    assert frame["argmax_x3"].isna().all()
    print(f"  ✓ repr-2: c_emp = {result.c_emp:.4f} over {len(result.rows)} bumps")

    lemma = run_case("lemma-1.5", ctx)
    assert lemma.rows[0].field_id == "lemma-measure" and lemma.c_emp >= 1.0
    print(f"  ✓ lemma-1.5: [(I_1 mu)^r]_A1 = {lemma.c_emp:.4f}")


def test_dimension_ranges():
    """Test that cases refuse dimensions outside their range."""

    print("\nTesting dimension ranges...")

    space = CaseContext(_small_config(dimension=3, cells=8, sphere_nodes=32, resolutions=[8]))
    line = CaseContext(_small_config(dimension=1, resolutions=[32]))
    for case_id, ctx in (("beurling-25", space), ("Mn'-22", line), ("thm-1.1", line)):
        try:
            run_case(case_id, ctx)
            raise AssertionError(f"{case_id} on n={ctx.grid.dimension} should be rejected")
        except ValueError as e:
            print(f"  ✓ {e}")


def test_sweeps():
    """Test probe and refinement validation without running the cases."""

    print("\nTesting sweeps...")

    config = _small_config()
    try:
        divergence_probe("neg", config, axis="radius", values=[2.0, 4.0, 8.0])
        raise AssertionError("three probe values should be rejected")
    except ValueError:
        pass
    try:
        divergence_probe("neg", config, axis="time")
        raise AssertionError("unknown axis should be rejected")
    except ValueError:
        pass
    try:
        refinement_study("repr-2", config, resolutions=[32])
        raise AssertionError("one resolution should be rejected")
    except ValueError:
        pass
    print("  ✓ Short probes, unknown axes and single resolutions rejected")

    series = refinement_study("repr-2", config, known={16: 1.0, 32: 1.05})
    assert series.constants == [1.0, 1.05] and series.stable
    assert math.isclose(series.drift, 0.05)
    assert series.exponent is None
    drifting = refinement_study("repr-2", config, known={16: 1.0, 32: 2.0})
    assert not drifting.stable
    print("  ✓ 5% drift is stable, 100% is not")

    assessment = assess_case("explore", config)
    assert assessment.passed and assessment.expectation == "none"
    print("  ✓ Report-only cases always pass")


def _synthetic_result(case_id, grid, entries):
    rows = [
        CaseRow(case_id, field_id, omega_id, EmpiricalConstantReport(c_emp=value), 0.0)
        for field_id, omega_id, value in entries
    ]
    return CaseResult(case_id, grid, 1e-6, rows)


def _steady_series(case_id):
    return SeriesResult(case_id, "resolution", [16.0, 32.0], [1.0, 1.05], drift=0.05, stable=True)


def test_assessment_criteria():
    """Test that bounded cases also answer to their spread and anchor caps."""

    print("\nTesting assessment criteria...")

    config = _small_config()
    grid = GridSpec(2, 2.0, 32)

    wide = _synthetic_result("thm-1.1", grid, [("bump-0", None, 1.0), ("bump-1", None, 10.0)])
    narrow = _synthetic_result("thm-1.1", grid, [("bump-0", None, 1.0), ("bump-1", None, 2.0)])
    failed = assess_case("thm-1.1", config, wide, _steady_series("thm-1.1"))
    assert not failed.passed and "spread" in failed.detail
    assert assess_case("thm-1.1", config, narrow, _steady_series("thm-1.1")).passed
    print(f"  ✓ thm-1.1 with a steady series fails on spread alone: {failed.detail}")

    bound = 1.1 / (2.0 * math.pi)
    above = _synthetic_result("repr-2", grid, [("bump-0", None, 1.2 * bound)])
    below = _synthetic_result("repr-2", grid, [("bump-0", None, 0.9 * bound)])
    failed = assess_case("repr-2", config, above, _steady_series("repr-2"))
    assert not failed.passed and "anchor" in failed.detail
    assert assess_case("repr-2", config, below, _steady_series("repr-2")).passed
    print(f"  ✓ repr-2 above 1.1/(2 pi) = {bound:.4f} fails")

    mixed = _synthetic_result(
        "main-1.4",
        grid,
        [
            ("bump-0", "omega-0", 1.0),
            ("bump-1", "omega-0", 2.0),
            ("bump-0", "omega-1", 0.5),
            ("bump-1", "omega-1", 0.6),
        ],
    )
    assert math.isclose(mixed.grouped_spread("field"), 2.0)
    assert math.isclose(mixed.grouped_spread("omega"), 2.0 / 0.6)
    assert not assess_case("main-1.4", config, mixed, _steady_series("main-1.4")).passed
    try:
        mixed.grouped_spread("weight")
        raise AssertionError("unknown grouping should be rejected")
    except ValueError:
        pass
    print("  ✓ main-1.4 spread is taken across Omega")

    drifting = SeriesResult("thm-1.1", "resolution", [16.0, 32.0], [1.0, 2.0], drift=1.0, stable=False)
    assert not assess_case("thm-1.1", config, narrow, drifting).passed
    print("  ✓ Drift still fails on its own")


def test_domain_doubling():
    """Test the domain-doubling series used by lemma-1.5."""

    print("\nTesting domain doubling...")

    config = _small_config()
    assert resolve_case("lemma-1.5").bounded_axis == "radius"
    assert resolve_case("thm-1.1").bounded_axis == "resolution"

    steady = doubling_study("lemma-1.5", config, known={2.0: 1.0, 4.0: 1.1})
    assert steady.axis == "radius" and steady.values == [2.0, 4.0]
    assert steady.stable and math.isclose(steady.drift, 0.1)
    growing = doubling_study("lemma-1.5", config, known={2.0: 1.0, 4.0: 2.0})
    assert not growing.stable
    try:
        doubling_study("lemma-1.5", config, doublings=0)
        raise AssertionError("zero doublings should be rejected")
    except ValueError:
        pass
    print("  ✓ 10% per doubling is stable, a factor 2 is not")

def test_explore_gauge():
    """Test gauges built from config objects."""

    print("\nTesting explore gauges...")

    assert explore_gauge({"variant": "power", "r": 1.5}).label == "M_L^1.5"
    assert explore_gauge({"variant": "mean"}).label == "M"
    explore_gauge({"variant": "lorentz", "p": 2.0, "q": 1.0})
    explore_gauge({"variant": "orlicz", "p": 2.0, "a": 1.0})
    try:
        explore_gauge({"variant": "median"})
        raise AssertionError("unknown variant should be rejected")
    except ValueError:
        pass
    print("  ✓ power, mean, lorentz and orlicz gauges; unknown variant rejected")


def run_all_case_tests():
    """Run all case tests."""

    print("\n" + "=" * 60)
    print(" RUNNING CASE TESTS")
    print("=" * 60 + "\n")

    results = []
    for name, test in (
        ("registry", test_registry),
        ("run_case", test_run_case),
        ("dimension_ranges", test_dimension_ranges),
        ("sweeps", test_sweeps),
        ("assessment_criteria", test_assessment_criteria),
        ("domain_doubling", test_domain_doubling),
        ("explore_gauge", test_explore_gauge),
    ):
        try:
            test()
            results.append((name, True))
        except Exception as e:
            print(f"❌ {name} FAILED: {e}")
            results.append((name, False))

    print("\n" + "=" * 60)
    print(" TEST SUMMARY")
    print("=" * 60)

    for name, passed in results:
        status = "✅ PASS" if passed else "❌ FAIL"
        print(f"  {status}: {name}")

    total = len(results)
    passed = sum(1 for _, p in results if p)

    print(f"\nTotal: {passed}/{total} tests passed")

    if passed == total:
        print("\n🎉 ALL CASE TESTS PASSED!")
    else:
        print(f"\n⚠️  {total - passed} test(s) failed")

    return passed == total


if __name__ == "__main__":
    success = run_all_case_tests()
    sys.exit(0 if success else 1)
