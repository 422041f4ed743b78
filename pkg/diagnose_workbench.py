"""
Workbench Diagnostic Tool
Run: python diagnose_workbench.py

Checks the project layout, installed packages, numerical building blocks
and the report database, and suggests what to fix.
"""

import sys
from pathlib import Path

import numpy as np

print("=" * 80)
print(" HARMONIC ANALYSIS WORKBENCH - DIAGNOSTICS")
print("=" * 80)

# Add project to path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))


def section(title):
    """Print a section header."""
    print(f"\n{'=' * 80}")
    print(f" {title}")
    print("=" * 80)


def check(description, condition, details=""):
    """Print a check result."""
    status = "✅ PASS" if condition else "❌ FAIL"
    print(f"{status}: {description}")
    if details:
        print(f"     {details}")
    return condition


# ============================================================================
# 1. PROJECT STRUCTURE
# ============================================================================
section("1. PROJECT STRUCTURE")

required_files = [
    "src/__init__.py",
    "src/cli.py",
    "src/analysis/field.py",
    "src/analysis/geometry.py",
    "src/analysis/lorentz.py",
    "src/analysis/maximal.py",
    "src/analysis/potential.py",
    "src/analysis/singular.py",
    "src/analysis/stencils.py",
    "src/analysis/weights.py",
    "src/harness/empirical.py",
    "src/harness/suites.py",
    "src/harness/cases.py",
    "src/harness/checks.py",
    "src/utils/config.py",
    "src/utils/db_utils.py",
    "src/utils/db_schema.py",
    "src/utils/grid_io.py",
]

structure_ok = True
for name in required_files:
    exists = (project_root / name).exists()
    check(f"File exists: {name}", exists)
    structure_ok = structure_ok and exists

# ============================================================================
# 2. PYTHON ENVIRONMENT
# ============================================================================
section("2. PYTHON ENVIRONMENT")

print(f"Python version: {sys.version}")
print(f"Python executable: {sys.executable}")

required_packages = {
    "numpy": "numpy",
    "scipy": "scipy",
    "pandas": "pandas",
    "duckdb": "duckdb",
    "python-dotenv": "dotenv",
    "tqdm": "tqdm",
}

env_ok = True
for display_name, import_name in required_packages.items():
    try:
        module = __import__(import_name)
        version = getattr(module, "__version__", "unknown")
        check(f"Package installed: {display_name}", True, f"version {version}")
    except ImportError:
        check(f"Package installed: {display_name}", False, "NOT INSTALLED")
        env_ok = False

# ============================================================================
# 3. NUMERICAL BUILDING BLOCKS
# ============================================================================
section("3. NUMERICAL BUILDING BLOCKS")

numerics_ok = True
try:
    from src.analysis.field import GridSpec, ScalarField, lp_norm
    from src.analysis.geometry import sphere_quadrature
    from src.analysis.lorentz import LorentzIndex, lorentz_norm
    from src.analysis.potential import certify_fast_potential
    from src.utils.config import thread_count

    for n, total in ((2, 2.0 * np.pi), (3, 4.0 * np.pi)):
        quadrature = sphere_quadrature(n, 64)
        error = abs(quadrature.total_measure - total)
        numerics_ok &= check(f"Sphere quadrature n={n} total measure", error < 1e-12, f"error {error:.2e}")

    grid = GridSpec(2, 1.0, 16)
    field = ScalarField(grid, np.random.default_rng(0).random(grid.shape))
    gap = abs(lorentz_norm(field, LorentzIndex(2.0, 2.0)) - lp_norm(field, 2.0))
    numerics_ok &= check("Layer-cake identity ||f||_(2,2) = ||f||_2", gap < 1e-10, f"gap {gap:.2e}")

    deviation = certify_fast_potential(field, 1.0)
    numerics_ok &= check("FFT Riesz potential matches direct quadrature", deviation < 1e-8, f"relative {deviation:.2e}")

    print(f"Worker threads (WORKBENCH_THREADS): {thread_count()}")

except Exception as e:
    check("Numerical building blocks", False, str(e))
    numerics_ok = False

# ============================================================================
# 4. CASE REGISTRY
# ============================================================================
section("4. CASE REGISTRY")

try:
    from src.harness.cases import CASES

    print(f"Registered cases: {len(CASES)}")
    for case_id, case in sorted(CASES.items()):
        print(f"  - {case_id:<22} n in [{case.min_dimension}, {case.max_dimension}]  {case.description}")
except Exception as e:
    check("Can import case registry", False, str(e))

# ============================================================================
# 5. REPORT DATABASE
# ============================================================================
section("5. REPORT DATABASE")

db_ok = True
try:
    from src.utils.db_schema import REPORT_TABLES
    from src.utils.db_utils import DEFAULT_DB_PATH, get_row_count, table_exists

    if DEFAULT_DB_PATH.exists():
        size_mb = DEFAULT_DB_PATH.stat().st_size / (1024 * 1024)
        check("Report database exists", True, f"{DEFAULT_DB_PATH} ({size_mb:.2f} MB)")
        for table in REPORT_TABLES:
            exists = table_exists(table)
            db_ok &= check(f"Table exists: {table}", exists)
            if exists:
                print(f"     {get_row_count(table):,} rows")
    else:
        check("Report database exists", False, "Will be created by the first verify/constants/sweep run")
except Exception as e:
    print(f"❌ Error checking report database: {e}")
    db_ok = False

# ============================================================================
# 6. SUMMARY
# ============================================================================
section("6. SUMMARY")

issues = []
if not structure_ok:
    issues.append("❌ Project structure incomplete - missing source files")
if not env_ok:
    issues.append("❌ Python packages missing - run: pip install -r requirements.txt")
if not numerics_ok:
    issues.append("❌ A numerical self-check failed")
if not db_ok:
    issues.append("❌ Report database incomplete")

if len(issues) == 0:
    print("✅ No critical issues found! Workbench appears healthy.")
else:
    for issue in issues:
        print(issue)

    print("\n" + "=" * 80)
    print("RECOMMENDED ACTIONS:")
    print("=" * 80)

    if not env_ok:
        print("\n1. Install packages:")
        print("   pip install -r requirements.txt")
    if not db_ok:
        print("\n2. Recreate the report schema:")
        print("   python -m src.utils.db_schema")
    if not numerics_ok:
        print("\n3. Run the unit tests:")
        print("   pytest tests/")

print("\n" + "=" * 80)
print(" DIAGNOSTIC COMPLETE")
print("=" * 80)
