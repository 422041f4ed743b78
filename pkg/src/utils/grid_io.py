"""
Grid text files for user-supplied weights and fields.

Format: a header line "n N R" followed by the N^n values in row-major
order (last axis fastest), one per line, written with repr() so a file
round-trips bit for bit.
"""

import logging
from pathlib import Path

import numpy as np

from src.analysis.field import GridSpec, ScalarField

logger = logging.getLogger(__name__)


def write_grid_file(path: Path, field: ScalarField):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = field.grid
    lines = [f"{grid.dimension} {grid.cells} {grid.half_width!r}"]
    lines.extend(repr(float(v)) for v in field.values.ravel())
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Wrote {grid.total_cells} values to {path}")


def read_grid_file(path: Path) -> ScalarField:
    """
    Read a grid file.

    Raises:
        FileNotFoundError: missing file
        ValueError: malformed header or wrong number of values
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"grid file not found: {path}")
    lines = [line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines:
        raise ValueError(f"grid file {path} is empty")
    header = lines[0].split()
    if len(header) != 3:
        raise ValueError(f"grid file {path}: header must be 'n N R', got '{lines[0]}'")
    try:
        grid = GridSpec(int(header[0]), float(header[2]), int(header[1]))
        values = np.array([float(v) for v in lines[1:]])
    except ValueError as e:
        raise ValueError(f"grid file {path}: {e}")
    if values.size != grid.total_cells:
        raise ValueError(f"grid file {path}: expected {grid.total_cells} values, found {values.size}")
    return ScalarField(grid, values.reshape(grid.shape))
