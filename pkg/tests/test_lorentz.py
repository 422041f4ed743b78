"""
Test Lorentz norms, Luxemburg averages and the B_p tail classifier.
Run: python tests/test_lorentz.py
"""

import math
import sys
from pathlib import Path

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from src.analysis.field import GridSpec, ScalarField, constant_field, lp_norm
from src.analysis.geometry import Cube
from src.analysis.lorentz import (
    LorentzIndex,
    YoungFunction,
    associate,
    bp_classify,
    conjugate_exponent,
    distribution,
    holder_lorentz,
    lorentz_avg,
    lorentz_norm,
    orlicz_avg,
)


def _random_field(grid, seed):
    return ScalarField(grid, np.random.default_rng(seed).standard_normal(grid.shape))


def test_layer_cake():
    """Test ||f||_(p,p) = ||f||_p, with and without a density."""

    print("Testing layer-cake identity...")

    grid = GridSpec(2, 1.0, 16)
    f = _random_field(grid, 1)
    density = ScalarField(grid, 0.5 + np.random.default_rng(2).random(grid.shape))
    for p in (1.0, 1.5, 2.0, 4.0):
        plain = lorentz_norm(f, LorentzIndex(p, p))
        weighted = lorentz_norm(f, LorentzIndex(p, p), density)
        assert math.isclose(plain, lp_norm(f, p), rel_tol=1e-10)
        assert math.isclose(weighted, lp_norm(f, p, weight=density), rel_tol=1e-10)
        print(f"  ✓ p={p}: {plain:.10f}")


def test_constant_on_box():
    """Test closed forms for a constant on a set of known measure."""

    print("\nTesting closed forms...")

    grid = GridSpec(2, 1.0, 8)
    f = constant_field(grid, 2.0)
    # measure 4: ||c 1_E||_(p,inf) = c m^(1/p), ||c 1_E||_(p,q) = (p/q)^(1/q) c m^(1/p)
    assert math.isclose(lorentz_norm(f, LorentzIndex(2.0, math.inf)), 4.0)
    assert math.isclose(lorentz_norm(f, LorentzIndex(2.0, 1.0)), 8.0)
    steps = distribution(f)
    assert steps(1.0) == 4.0 and steps(2.0) == 0.0
    print("  ✓ Weak and (2,1) norms of a constant match")

    assert lorentz_norm(constant_field(grid, 0.0), LorentzIndex(2.0, 1.0)) == 0.0
    print("  ✓ Zero field has zero norm")


def test_holder_and_conjugates():
    """Test conjugate indices and the Lorentz Holder inequality."""

    print("\nTesting Holder pairing...")

    assert conjugate_exponent(1.0) == math.inf
    assert conjugate_exponent(math.inf) == 1.0
    assert LorentzIndex(2.0, 1.0).conjugate() == LorentzIndex(2.0, math.inf)

    grid = GridSpec(2, 1.0, 16)
    f = _random_field(grid, 3)
    g = _random_field(grid, 4)
    for index in (LorentzIndex(2.0, 1.0), LorentzIndex(3.0, 2.0), LorentzIndex(1.5, 4.0)):
        lhs, rhs = holder_lorentz(f, g, index)
        assert lhs <= rhs * (1 + 1e-12), f"Holder fails for {index}: {lhs} > {rhs}"
        print(f"  ✓ ({index.p:g},{index.q:g}): {lhs:.4f} <= {rhs:.4f}")

    try:
        LorentzIndex(math.inf, 2.0)
        raise AssertionError("infinite p should be rejected")
    except ValueError:
        pass
    print("  ✓ Infinite p rejected")


def test_cube_averages():
    """Test normalized Lorentz and Luxemburg averages on a cube."""

    print("\nTesting cube averages...")

    grid = GridSpec(2, 1.0, 16)
    f = _random_field(grid, 5)
    cube = Cube((0.0, 0.0), 1.0)
    inside = f.values[cube.mask(grid)]

    mean_square = math.sqrt(np.mean(inside ** 2))
    assert math.isclose(lorentz_avg(f, cube, LorentzIndex(2.0, 2.0)), mean_square, rel_tol=1e-10)
    assert math.isclose(orlicz_avg(f, cube, YoungFunction.power(2.0)), mean_square, rel_tol=1e-9)
    assert math.isclose(orlicz_avg(f, cube, YoungFunction.power(1.0)), np.mean(np.abs(inside)), rel_tol=1e-9)
    print("  ✓ L^(2,2), Luxemburg t^2 and t agree with plain averages")

    log_avg = orlicz_avg(f, cube, YoungFunction.power_log(2.0, 1.0))
    assert log_avg > 0
    print(f"  ✓ L^2 log L average: {log_avg:.6f}")


def test_young_functions():
    """Test associates, inverses and the B_p classifier."""

    print("\nTesting Young functions...")

    assert associate(YoungFunction.power(3.0)) == YoungFunction.power(1.5)
    assert associate(YoungFunction.power_log(2.0, 1.0)) == YoungFunction.power_log(2.0, -1.0)
    phi = YoungFunction.power_log(2.0, 1.0)
    values = np.array([0.5, 3.0, 40.0])
    assert np.allclose(phi(phi.inverse(values)), values, rtol=1e-9)
    print("  ✓ Associates and inverses")

    assert bp_classify(YoungFunction.power(2.0), 3.0).member
    assert bp_classify(YoungFunction.power(2.0), 2.0).verdict == "nonmember"
    assert bp_classify(YoungFunction.power_log(2.0, -2.0), 2.0).member
    assert bp_classify(YoungFunction.power(3.0), 2.0).verdict == "nonmember"
    print("  ✓ t^2 in B_3, t^2 not in B_2, t^2 log^-2 in B_2")

    try:
        YoungFunction.power(0.5)
        raise AssertionError("non-convex power should be rejected")
    except ValueError:
        pass
    print("  ✓ Exponent below 1 rejected")


def run_all_lorentz_tests():
    """Run all Lorentz and Orlicz tests."""

    print("\n" + "=" * 60)
    print(" RUNNING LORENTZ TESTS")
    print("=" * 60 + "\n")

    results = []
    for name, test in (
        ("layer_cake", test_layer_cake),
        ("constant_on_box", test_constant_on_box),
        ("holder_and_conjugates", test_holder_and_conjugates),
        ("cube_averages", test_cube_averages),
        ("young_functions", test_young_functions),
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
        print("\n🎉 ALL LORENTZ TESTS PASSED!")
    else:
        print(f"\n⚠️  {total - passed} test(s) failed")

    return passed == total


if __name__ == "__main__":
    success = run_all_lorentz_tests()
    sys.exit(0 if success else 1)
