"""
Test the seeded suites: bumps, Omegas, measures, balls and weights.
Run: python tests/test_suites.py
"""

import math
import sys
import tempfile
from pathlib import Path

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from src.analysis.field import GridSpec, ScalarField
from src.analysis.geometry import sphere_quadrature
from src.harness.suites import (
    ExponentSet,
    bump_suite,
    lemma_measure,
    omega_suite,
    random_balls,
    sphere_measure,
    weight_from_spec,
    weight_label,
    weight_suite,
)
from src.utils.grid_io import write_grid_file


def test_exponents():
    """Test derived exponents p', n' and p*."""

    print("Testing exponent sets...")

    exponents = ExponentSet(2, 1.5)
    assert math.isclose(exponents.p_prime, 3.0)
    assert math.isclose(exponents.n_prime, 2.0)
    assert math.isclose(exponents.p_star, 6.0)
    assert ExponentSet(1, 1.0, alpha=0.5).n_prime == math.inf
    try:
        ExponentSet(2, 2.0).p_star
        raise AssertionError("p* needs p < n")
    except ValueError:
        pass
    print("  ✓ p'=3, n'=2, p*=6 for n=2, p=1.5")


def test_bump_suite():
    """Test reproducibility and placement of the bump suite."""

    print("\nTesting bump suite...")

    first = bump_suite(2, 5, seed=7, half_width=4.0)
    again = bump_suite(2, 5, seed=7, half_width=4.0)
    other = bump_suite(2, 5, seed=8, half_width=4.0)
    assert first == again
    assert first != other
    assert first[0].center == (0.0, 0.0) and first[0].radius == 1.0
    assert [spec.field_id for spec in first] == [f"bump-{i}" for i in range(5)]
    print("  ✓ Same seed, same suite; bump-0 is centered with radius R/4")

    grid = GridSpec(2, 4.0, 32)
    for spec in first:
        assert spec.realize(grid).values.max() > 0
    print("  ✓ Every bump fits in the box")

    # one stream per suite: growing the count only appends
    assert bump_suite(2, 3, seed=7, half_width=4.0)[:3] == first[:3]
    print("  ✓ Resizing the suite keeps its prefix")


def test_omega_suite():
    """Test mean-zero projection and independence from other streams."""

    print("\nTesting Omega suite...")

    quadrature = sphere_quadrature(2, 64)
    projected = omega_suite(quadrature, 3, 4, seed=0)
    raw = omega_suite(quadrature, 3, 4, seed=0, mean=1.0, project=False)
    assert all(omega.mean_zero for omega in projected)
    assert not any(omega.mean_zero for omega in raw)
    assert [omega.label for omega in projected] == ["omega-0", "omega-1", "omega-2"]
    print("  ✓ Projected Omegas have mean zero, raw ones keep the constant")

    sphere3 = sphere_quadrature(3, 64)
    assert all(omega.mean_zero for omega in omega_suite(sphere3, 2, 3, seed=1))
    print("  ✓ n=3 polynomial Omegas")


def test_measures_and_balls():
    """Test corner-placed atoms, sphere measures and ball placement."""

    print("\nTesting measures and balls...")

    grid = GridSpec(2, 4.0, 32)
    mu = lemma_measure(grid)
    assert len(mu) == 3 and math.isclose(mu.total_mass, 2.0)
    h = grid.spacing
    assert np.allclose(np.round(mu.points / h), mu.points / h), "atoms sit on cell corners"
    print("  ✓ Lemma measure: three atoms on cell corners")

    quadrature = sphere_quadrature(2, 32)
    circle = sphere_measure(quadrature, radius=2.0)
    assert math.isclose(circle.total_mass, 4.0 * math.pi)
    print("  ✓ Sphere measure of radius 2 has mass 4 pi")

    fine = GridSpec(2, 4.0, 64)
    balls = random_balls(fine, 10, seed=3)
    assert len(balls) == 10
    assert all(ball.inside_box(fine) and ball.radius >= 0.25 for ball in balls)
    refined = random_balls(fine.refined(), 10, seed=3)
    assert refined == balls
    print("  ✓ Balls stay inside the box and survive refinement")


def test_weights():
    """Test weight kinds, labels and validation."""

    print("\nTesting weight suite...")

    grid = GridSpec(2, 1.0, 8)
    weights = weight_suite(
        [
            {"kind": "power", "a": 0.5},
            {"kind": "bump", "height": 2.0, "radius": 0.5},
            {"kind": "log_smooth", "scale": 0.5},
            {"kind": "spike", "mass": 1.0, "floor": 0.01},
            {"kind": "constant", "value": 2.0, "id": "two"},
        ],
        grid,
    )
    labels = [label for label, _ in weights]
    assert labels == ["power(a=0.5)", "bump(height=2.0,radius=0.5)", "log_smooth(scale=0.5)", "spike(floor=0.01,mass=1.0)", "two"]
    assert all(np.all(w.values > 0) for _, w in weights)
    print(f"  ✓ Labels: {labels}")

    spike = dict(weights)["spike(floor=0.01,mass=1.0)"]
    assert math.isclose((spike.values.sum() - 0.01 * (grid.total_cells - 1)) * grid.cell_volume, 1.0 + 0.01 * grid.cell_volume)
    print("  ✓ Spike carries its mass")

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "w.txt"
        write_grid_file(path, ScalarField(grid, np.full(grid.shape, 0.5)))
        _, loaded = weight_from_spec({"kind": "file", "path": str(path)}, grid)
        assert np.allclose(loaded.values, 0.5)
        try:
            weight_from_spec({"kind": "file", "path": str(path)}, GridSpec(2, 1.0, 16))
            raise AssertionError("file on another grid should be rejected")
        except ValueError:
            pass
    print("  ✓ File weights load and must match the run grid")

    for spec in ({"kind": "constant", "value": -1.0}, {"kind": "wavelet"}, {"a": 1.0}, {"kind": "spike", "mass": 0.0}):
        try:
            weight_from_spec(spec, grid)
            raise AssertionError(f"{spec} should be rejected")
        except ValueError:
            continue
    assert weight_label({"kind": "power"}) == "power"
    print("  ✓ Non-positive, unknown and malformed specs rejected")


def run_all_suite_tests():
    """Run all suite tests."""

    print("\n" + "=" * 60)
    print(" RUNNING SUITE TESTS")
    print("=" * 60 + "\n")

    results = []
    for name, test in (
        ("exponents", test_exponents),
        ("bump_suite", test_bump_suite),
        ("omega_suite", test_omega_suite),
        ("measures_and_balls", test_measures_and_balls),
        ("weights", test_weights),
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
        print("\n🎉 ALL SUITE TESTS PASSED!")
    else:
        print(f"\n⚠️  {total - passed} test(s) failed")

    return passed == total


if __name__ == "__main__":
    success = run_all_suite_tests()
    sys.exit(0 if success else 1)
