"""
Test Poincare checks, weak-type norms, identity residuals and the Sobolev suite.
Run: python tests/test_checks.py
"""

import math
import sys
from pathlib import Path

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from src.analysis.field import GridSpec, constant_field, make_bump
from src.analysis.geometry import Ball, Cube
from src.harness.checks import (
    absorption_ratio,
    identity_suite,
    poincare_check,
    sobolev_suite,
    weak_type_norm,
)

GRID = GridSpec(2, 2.0, 16)


def test_poincare():
    """Test the three Poincare variants and their validation."""

    print("Testing Poincare checks...")

    f = make_bump(GRID, (0.25, 0.0), 1.0)
    regions = [Ball((0.0, 0.0), 0.5), Ball((0.5, 0.5), 1.0), Cube((0.0, 0.0), 1.0)]
    for variant in ("(1,1)", "classical", "lorentz"):
        result = poincare_check(f, regions, variant, p=1.5)
        assert result.evaluated == 3
        assert math.isfinite(result.ratio) and result.ratio > 0
        assert result.ratio == max(result.ratios) and result.region in regions
        print(f"  ✓ {variant}: max ratio {result.ratio:.4f}")

    flat = poincare_check(constant_field(GRID, 2.0), regions)
    assert flat.ratio == 0.0
    print("  ✓ A constant has ratio 0")

    rejected = [
        (f, regions, "sobolev", {}),
        (f, [Ball((1.8, 0.0), 0.5)], "(1,1)", {}),
        (f, regions, "classical", {"p": 1.5, "q": 8.0}),
        (f, regions, "classical", {"p": 2.0}),
        (make_bump(GridSpec(1, 2.0, 16), (0.0,), 1.0), [Ball((0.0,), 0.5)], "lorentz", {}),
    ]
    for field, family, variant, kwargs in rejected:
        try:
            poincare_check(field, family, variant, **kwargs)
            raise AssertionError(f"{variant} {kwargs} should be rejected")
        except ValueError as e:
            print(f"  ✓ rejected: {e}")


def test_weak_type_norm():
    """Test homogeneity and validation of the weak-type norm."""

    print("\nTesting weak-type norms...")

    g = make_bump(GRID, (0.0, 0.0), 1.0)
    single = weak_type_norm(g, 2.0)
    assert single > 0
    assert math.isclose(weak_type_norm(g.scaled(3.0), 2.0), 3.0 * single, rel_tol=1e-12)
    print(f"  ✓ ||3g||_(2,inf) = 3 ||g||_(2,inf) = {3.0 * single:.6f}")

    try:
        weak_type_norm(g, 0.0)
        raise AssertionError("q = 0 should be rejected")
    except ValueError:
        pass
    print("  ✓ q = 0 rejected")


def test_absorption():
    """Test that the dyadic absorption ratio is finite in the plane only."""

    print("\nTesting absorption ratio...")

    ratio = absorption_ratio(make_bump(GRID, (0.0, 0.0), 1.0))
    assert math.isfinite(ratio) and ratio > 0
    print(f"  ✓ ratio = {ratio:.4f}")

    try:
        absorption_ratio(make_bump(GridSpec(1, 2.0, 16), (0.0,), 1.0))
        raise AssertionError("n = 1 should be rejected")
    except ValueError:
        pass
    print("  ✓ n = 1 rejected")


def test_identity_suite():
    """Test the identity table in the plane."""

    print("\nTesting identity suite...")

    table = identity_suite(GRID)
    print(table.to_string(index=False))
    assert set(table["identity"]) == {"spherical-mean", "riesz", "ball-weak-norm", "absorption-ratio", "beurling"}
    assert list(table.columns) == ["identity", "cells", "residual", "refined_residual", "order"]
    assert (table["cells"] == 16).all()

    rows = table.set_index("identity")
    assert rows.loc["ball-weak-norm", "residual"] < 1e-9
    assert rows.loc["ball-weak-norm", "refined_residual"] < 1e-9
    assert math.isnan(rows.loc["ball-weak-norm", "order"])
    assert math.isnan(rows.loc["absorption-ratio", "order"])
    assert np.isfinite(table["residual"]).all() and np.isfinite(table["refined_residual"]).all()
    print("  ✓ Five identities; the ball weak-norm identity is exact")

    line = identity_suite(GridSpec(1, 2.0, 16))
    assert list(line["identity"]) == ["spherical-mean"]
    print("  ✓ n = 1 reports the spherical mean only")


def test_sobolev_suite():
    """Test that constant weights cancel in the Sobolev ratio."""

    print("\nTesting Sobolev suite...")

    fields = [make_bump(GRID, (0.0, 0.0), 1.0), make_bump(GRID, (0.25, -0.25), 0.75)]
    weights = [("one", constant_field(GRID, 1.0)), ("two", constant_field(GRID, 2.0))]
    frame = sobolev_suite(fields, weights, 1.5)
    assert len(frame) == 4
    assert np.allclose(frame["apq"], 1.0)
    by_key = frame.set_index(["weight_id", "operator"])["raw_ratio"]
    for operator in ("identity", "M"):
        assert math.isclose(by_key[("one", operator)], by_key[("two", operator)], rel_tol=1e-9)
        assert by_key[("one", operator)] > 0
    assert by_key[("one", "M")] >= by_key[("one", "identity")] - 1e-12
    print("  ✓ Ratios independent of the constant; M dominates the identity")

    for args in ((fields, weights, 2.0), ([], weights, 1.5)):
        try:
            sobolev_suite(*args)
            raise AssertionError("invalid Sobolev setup should be rejected")
        except ValueError:
            continue
    try:
        sobolev_suite(fields, weights, 1.5, operators=("Tstar",))
        raise AssertionError("Tstar without an Omega should be rejected")
    except ValueError:
        pass
    print("  ✓ p = n, empty fields and Tstar without Omega rejected")


def run_all_check_tests():
    """Run all check tests."""

    print("\n" + "=" * 60)
    print(" RUNNING CHECK TESTS")
    print("=" * 60 + "\n")

    results = []
    for name, test in (
        ("poincare", test_poincare),
        ("weak_type_norm", test_weak_type_norm),
        ("absorption", test_absorption),
        ("identity_suite", test_identity_suite),
        ("sobolev_suite", test_sobolev_suite),
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
        print("\n🎉 ALL CHECK TESTS PASSED!")
    else:
        print(f"\n⚠️  {total - passed} test(s) failed")

    return passed == total


if __name__ == "__main__":
    success = run_all_check_tests()
    sys.exit(0 if success else 1)
