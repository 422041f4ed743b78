"""
Test experiment configuration loading and validation.
Run: python tests/test_config.py
"""

import json
import os
import sys
import tempfile
from pathlib import Path

sys.path.append(str(Path(__file__).parent.parent))

from src.utils.config import DEFAULTS, THREADS_ENV, ExperimentConfig, load_config, thread_count

PROJECT_ROOT = Path(__file__).parent.parent


def test_defaults():
    """Test that an empty document yields the documented defaults."""

    print("Testing defaults...")

    config = ExperimentConfig.from_dict({})
    assert config.to_dict() == DEFAULTS
    assert config.stride_shift == 3
    assert config.output_path == Path("reports")
    print(f"  ✓ {len(DEFAULTS)} defaults")


def test_rejections():
    """Test that unknown keys and invalid values are rejected."""

    print("\nTesting invalid configs...")

    bad = [
        {"resolution": 64},
        {"dimension": 4},
        {"p": 6.0, "q": 6.0},
        {"cells": 33},
        {"resolutions": [64, 127]},
        {"theta": 1.0},
        {"probe_axis": "time"},
        {"selfimp_operator": "H"},
        {"cases": []},
    ]
    for data in bad:
        try:
            ExperimentConfig.from_dict(data)
            raise AssertionError(f"{data} should be rejected")
        except ValueError as e:
            print(f"  ✓ {data}: {e}")


def test_load_config():
    """Test reading the shipped configs and missing or malformed files."""

    print("\nTesting config files...")

    smoke = load_config(PROJECT_ROOT / "configs" / "smoke.json")
    assert smoke.cells == 32 and smoke.resolutions == [16, 32]
    assert smoke.cases == ["repr-2", "pointmax-8"]
    assert load_config(PROJECT_ROOT / "configs" / "default.json").dimension in (1, 2, 3)
    print("  ✓ configs/smoke.json and configs/default.json load")

    with tempfile.TemporaryDirectory() as tmp:
        try:
            load_config(Path(tmp) / "missing.json")
            raise AssertionError("missing file should raise")
        except FileNotFoundError:
            pass
        listing = Path(tmp) / "list.json"
        listing.write_text(json.dumps([1, 2]), encoding="utf-8")
        try:
            load_config(listing)
            raise AssertionError("a JSON list is not a config")
        except ValueError:
            pass
    print("  ✓ Missing file and non-object JSON rejected")


def test_thread_count():
    """Test WORKBENCH_THREADS parsing."""

    print("\nTesting thread count...")

    previous = os.environ.get(THREADS_ENV)
    try:
        os.environ[THREADS_ENV] = "4"
        assert thread_count() == 4
        for raw in ("0", "many"):
            os.environ[THREADS_ENV] = raw
            try:
                thread_count()
                raise AssertionError(f"{THREADS_ENV}={raw} should be rejected")
            except ValueError:
                pass
    finally:
        if previous is None:
            os.environ.pop(THREADS_ENV, None)
        else:
            os.environ[THREADS_ENV] = previous
    print("  ✓ 4 accepted, 0 and 'many' rejected")


def run_all_config_tests():
    """Run all config tests."""

    print("\n" + "=" * 60)
    print(" RUNNING CONFIG TESTS")
    print("=" * 60 + "\n")

    results = []
    for name, test in (
        ("defaults", test_defaults),
        ("rejections", test_rejections),
        ("load_config", test_load_config),
        ("thread_count", test_thread_count),
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
        print("\n🎉 ALL CONFIG TESTS PASSED!")
    else:
        print(f"\n⚠️  {total - passed} test(s) failed")

    return passed == total


if __name__ == "__main__":
    success = run_all_config_tests()
    sys.exit(0 if success else 1)
