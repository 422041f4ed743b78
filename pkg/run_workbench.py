"""
Workbench entry point.
Run: python run_workbench.py verify --config configs/default.json

Commands: verify, constants, sweep, report (see src/cli.py).
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
