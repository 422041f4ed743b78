"""
Test database utilities.
Run: python tests/test_database.py
"""

import sys
import tempfile
from pathlib import Path

import pandas as pd

# Add src to path
sys.path.append(str(Path(__file__).parent.parent))

from src.utils.db_schema import CSV_TO_DB_COLUMNS, DB_TO_CSV_COLUMNS, REPORT_TABLES, create_schema
from src.utils.db_utils import (
    database_path,
    execute_query,
    get_connection,
    get_row_count,
    get_table_info,
    insert_frame,
    table_exists,
)


def test_database_connection():
    """Test that we can create and connect to DuckDB."""

    print("Testing database connection...")

    with tempfile.TemporaryDirectory() as tmp:
        db_path = database_path(Path(tmp) / "nested")
        assert db_path.name == "reports.duckdb"

        conn = get_connection(db_path, readonly=False)
        result = conn.execute("SELECT 42 as answer").fetchdf()
        conn.close()

        assert result["answer"].iloc[0] == 42, "Query returned wrong result"
        assert db_path.exists()
        print(f"  ✓ Database file: {db_path.name} (parent created)")


def test_schema_creation():
    """Test that the report tables exist and map n/N/R."""

    print("\nTesting schema creation...")

    with tempfile.TemporaryDirectory() as tmp:
        db_path = database_path(Path(tmp))
        create_schema(db_path)
        create_schema(db_path)
        print("  ✓ Schema created twice without error")

        for table in REPORT_TABLES:
            assert table_exists(table, db_path), f"Table '{table}' missing"
            print(f"  ✓ Table '{table}' exists")

        columns = set(get_table_info("case_reports", db_path)["column_name"])
        assert {"dimension", "cells", "half_width", "c_emp"} <= columns
        assert not table_exists("prices_day_ahead", db_path)
        assert DB_TO_CSV_COLUMNS[CSV_TO_DB_COLUMNS["N"]] == "N"
        print("  ✓ n/N/R stored as dimension/cells/half_width")


def test_insert_frame():
    """Test appending rows by column name."""

    print("\nTesting inserts...")

    with tempfile.TemporaryDirectory() as tmp:
        db_path = database_path(Path(tmp))
        create_schema(db_path)
        frame = pd.DataFrame(
            {
                "case_id": ["repr-2", "repr-2"],
                "axis": ["resolution", "resolution"],
                "value": [64.0, 128.0],
                "c_emp": [0.61, 0.62],
                "stable": [True, True],
            }
        )
        assert insert_frame("series_points", frame, db_path) == 2
        assert insert_frame("series_points", frame.iloc[:0], db_path) == 0
        assert get_row_count("series_points", db_path) == 2

        stored = execute_query("SELECT value, c_emp FROM series_points ORDER BY value", db_path)
        assert list(stored["value"]) == [64.0, 128.0]
        print("  ✓ Two rows appended, empty frame ignored")

        try:
            insert_frame("no_such_table", frame, db_path)
            raise AssertionError("unknown table should be rejected")
        except ValueError:
            pass
        print("  ✓ Unknown table rejected")


def run_all_database_tests():
    """Run all database tests."""

    print("\n" + "=" * 60)
    print(" RUNNING DATABASE TESTS")
    print("=" * 60 + "\n")

    results = []
    for name, test in (
        ("database_connection", test_database_connection),
        ("schema_creation", test_schema_creation),
        ("insert_frame", test_insert_frame),
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
        print("\n✅ Database tests passed!")
    else:
        print("\n❌ Database tests failed!")
        print("\nTroubleshooting:")
        print("  1. Check that src/utils/db_utils.py has no syntax errors")
        print("  2. Try running: python -c 'import duckdb; duckdb.connect(\":memory:\").execute(\"SELECT 1\")'")

    return passed == total


if __name__ == "__main__":
    success = run_all_database_tests()
    sys.exit(0 if success else 1)
