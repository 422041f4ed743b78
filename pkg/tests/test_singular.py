"""
Test rough singular integrals, truncations and the Riesz/Beurling kernels.
Run: python tests/test_singular.py
"""

import math
import sys
from pathlib import Path

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from src.analysis.field import GridSpec, make_bump
from src.analysis.geometry import sphere_quadrature
from src.analysis.singular import (
    SphereFunction,
    annulus_contributions,
    ball_weak_norm_identity,
    beurling,
    half_octave_bands,
    maximal_rough,
    riesz_kernel_function,
    riesz_transform,
    sphere_weak_norm,
    truncated_rough,
    truncation_levels,
)

GRID = GridSpec(2, 2.0, 32)


def test_sphere_functions():
    """Test projection, norms and the ball/sphere weak-norm identity."""

    print("Testing sphere functions...")

    quadrature = sphere_quadrature(2, 64)
    theta = np.arctan2(quadrature.nodes[:, 1], quadrature.nodes[:, 0])
    omega = SphereFunction(quadrature, 1.0 + np.cos(3.0 * theta) + 0.5 * np.sin(theta), "omega-test")
    assert not omega.mean_zero
    projected = omega.projected()
    assert projected.mean_zero
    assert np.isclose(projected.integral, 0.0, atol=1e-12)
    print("  ✓ Projection removes the mean")

    ones = SphereFunction(quadrature, np.ones(64))
    assert np.isclose(ones.weak_norm, math.sqrt(2.0 * math.pi))
    assert np.isclose(sphere_weak_norm(ones, 1.0), 2.0 * math.pi)
    assert np.isclose(ones.lr_norm(2.0), math.sqrt(2.0 * math.pi))
    print("  ✓ ||1||_(2,inf) on the circle = sqrt(2 pi)")

    for k in (0, 2):
        lhs, rhs = ball_weak_norm_identity(omega, k=k)
        assert math.isclose(lhs, rhs, rel_tol=1e-10), f"k={k}: {lhs} vs {rhs}"
    print("  ✓ Ball and sphere weak norms agree at every radius")


def test_bands():
    """Test half-octave band edges."""

    print("\nTesting half-octave bands...")

    bands = half_octave_bands(1.0, 4.0)
    assert len(bands) == 4
    assert bands[0] == (1.0, math.sqrt(2.0))
    assert bands[-1][1] == 4.0
    for (_, high), (low, _) in zip(bands, bands[1:]):
        assert math.isclose(high, low)
    print("  ✓ Four contiguous bands from 1 to 4")


def test_truncations():
    """Test that truncation levels, annuli and T* are consistent."""

    print("\nTesting truncated operators...")

    quadrature = sphere_quadrature(2, 32)
    f = make_bump(GRID, (0.25, 0.0), 1.0)
    omega = riesz_kernel_function(quadrature, 0)
    h = GRID.spacing

    pv = truncated_rough(f, omega, h / 2.0)
    t_values, levels = truncation_levels(f, omega)
    assert np.isclose(t_values[0], h / 2.0)
    assert np.allclose(levels[0].values, pv.values, atol=1e-10)
    print(f"  ✓ {len(t_values)} truncation levels, the first is the principal value")

    t = 2.0 * h
    direct = truncated_rough(f, omega, t)
    summed = sum(part.values for part in annulus_contributions(f, omega, t))
    assert np.allclose(summed, direct.values, atol=1e-10)
    print("  ✓ Dyadic annuli sum to T^t f")

    star = maximal_rough(f, omega)
    assert np.all(star.values >= np.abs(pv.values) - 1e-10)
    assert np.all(riesz_transform(f, 0, "maximal", quadrature).values >= np.abs(pv.values) - 1e-10)
    print("  ✓ T* f >= |T f|")

    try:
        truncated_rough(f, omega, h / 4.0)
        raise AssertionError("t below h/2 should be rejected")
    except ValueError:
        pass
    try:
        riesz_kernel_function(quadrature, 2)
        raise AssertionError("component 2 does not exist in the plane")
    except ValueError:
        pass
    print("  ✓ Truncation below h/2 and bad components rejected")


def test_riesz_symmetry():
    """Test that R_1 of a radial bump is odd in x_1."""

    print("\nTesting Riesz transform symmetry...")

    f = make_bump(GRID, (0.0, 0.0), 1.0)
    r1 = riesz_transform(f, 0, "pv", sphere_quadrature(2, 32)).values
    assert np.allclose(r1, -r1[::-1, :], atol=1e-10 * np.abs(r1).max())
    assert np.allclose(r1, r1[:, ::-1], atol=1e-10 * np.abs(r1).max())
    print("  ✓ R_1 f(-x_1, x_2) = -R_1 f(x_1, x_2)")


def test_beurling_modes():
    """Test the Beurling transform and its maximal truncation."""

    print("\nTesting Beurling transform...")

    quadrature = sphere_quadrature(2, 32)
    f = make_bump(GRID, (0.0, 0.0), 1.0)
    s_re, s_im = beurling(f, None, "pv", quadrature)
    star, zeros = beurling(f, None, "maximal", quadrature)
    assert np.all(star.values >= np.hypot(s_re.values, s_im.values) - 1e-10)
    assert np.all(zeros.values == 0.0)
    print("  ✓ S* f >= |S f|")

    try:
        beurling(make_bump(GridSpec(1, 2.0, 32), (0.0,), 1.0))
        raise AssertionError("Beurling transform outside the plane should be rejected")
    except ValueError:
        pass
    print("  ✓ n != 2 rejected")


def run_all_singular_tests():
    """Run all singular integral tests."""

    print("\n" + "=" * 60)
    print(" RUNNING SINGULAR INTEGRAL TESTS")
    print("=" * 60 + "\n")

    results = []
    for name, test in (
        ("sphere_functions", test_sphere_functions),
        ("bands", test_bands),
        ("truncations", test_truncations),
        ("riesz_symmetry", test_riesz_symmetry),
        ("beurling_modes", test_beurling_modes),
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
        print("\n🎉 ALL SINGULAR INTEGRAL TESTS PASSED!")
    else:
        print(f"\n⚠️  {total - passed} test(s) failed")

    return passed == total


if __name__ == "__main__":
    success = run_all_singular_tests()
    sys.exit(0 if success else 1)
