"""
Test grid text files.
Run: python tests/test_grid_io.py
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from src.analysis.field import GridSpec, ScalarField
from src.utils.grid_io import read_grid_file, write_grid_file


def test_exact_reload():
    """Test that a written field reads back bit for bit."""

    print("Testing grid file reload...")

    grid = GridSpec(2, 1.5, 6)
    values = np.random.default_rng(0).random(grid.shape) + 0.1
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "nested" / "w.txt"
        write_grid_file(path, ScalarField(grid, values))
        assert path.read_text(encoding="utf-8").splitlines()[0] == "2 6 1.5"
        loaded = read_grid_file(path)
    assert loaded.grid == grid
    assert np.array_equal(loaded.values, values)
    print("  ✓ Header 'n N R' and exact values")


def test_malformed_files():
    """Test missing files, bad headers and wrong value counts."""

    print("\nTesting malformed grid files...")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        try:
            read_grid_file(tmp / "missing.txt")
            raise AssertionError("missing file should raise")
        except FileNotFoundError:
            pass
        cases = {
            "empty.txt": "",
            "header.txt": "2 4\n1.0\n",
            "count.txt": "1 4 1.0\n1.0\n2.0\n3.0\n",
            "value.txt": "1 2 1.0\n1.0\nabc\n",
        }
        for name, text in cases.items():
            (tmp / name).write_text(text, encoding="utf-8")
            try:
                read_grid_file(tmp / name)
                raise AssertionError(f"{name} should be rejected")
            except ValueError as e:
                print(f"  ✓ {name}: {e}")


def run_all_grid_io_tests():
    """Run all grid file tests."""

    print("\n" + "=" * 60)
    print(" RUNNING GRID FILE TESTS")
    print("=" * 60 + "\n")

    results = []
    for name, test in (("exact_reload", test_exact_reload), ("malformed_files", test_malformed_files)):
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
        print("\n🎉 ALL GRID FILE TESTS PASSED!")
    else:
        print(f"\n⚠️  {total - passed} test(s) failed")

    return passed == total


if __name__ == "__main__":
    success = run_all_grid_io_tests()
    sys.exit(0 if success else 1)
