"""
Database utilities for the DuckDB report store.

Why a separate module? Every command (verify, constants, sweep, report)
writes to or reads from the same report file, so connections are
opened in one place and never held open between commands.
"""

import logging
from pathlib import Path
from typing import Optional

import duckdb
import pandas as pd

logger = logging.getLogger(__name__)

# Report database file name inside an output directory
DB_FILENAME = "reports.duckdb"

# Default location when no output directory is given
DEFAULT_DB_PATH = Path(__file__).parent.parent.parent / "reports" / DB_FILENAME


def database_path(out_dir: Optional[Path] = None) -> Path:
    """Report database inside out_dir, or the project default."""
    if out_dir is None:
        return DEFAULT_DB_PATH
    return Path(out_dir) / DB_FILENAME


def get_connection(db_path: Optional[Path] = None, readonly: bool = False) -> duckdb.DuckDBPyConnection:
    """
    Get a connection to the report database.

    Args:
        db_path: Database file (defaults to reports/reports.duckdb)
        readonly: If True, open in read-only mode (prevents accidental modifications)

    Returns:
        DuckDB connection object

    Example:
        conn = get_connection(Path("reports/reports.duckdb"))
        conn.execute("SELECT * FROM case_reports LIMIT 10").fetchdf()
    """
    path = Path(db_path) if db_path is not None else DEFAULT_DB_PATH
    path.parent.mkdir(parents=True, exist_ok=True)
    return duckdb.connect(str(path), read_only=readonly)


def execute_query(query: str, db_path: Optional[Path] = None, readonly: bool = True) -> pd.DataFrame:
    """
    Execute a query and return results as pandas DataFrame.

    Why this function? It handles connection management so you don't have
    to remember to close connections.
    """
    with get_connection(db_path, readonly=readonly) as conn:
        return conn.execute(query).fetchdf()


def insert_frame(table_name: str, frame: pd.DataFrame, db_path: Optional[Path] = None) -> int:
    """
    Append a DataFrame to a table, matching columns by name.

    Returns:
        Number of rows inserted
    """
    if frame.empty:
        return 0
    if not table_exists(table_name, db_path):
        raise ValueError(f"Table '{table_name}' does not exist")
    columns = ", ".join(frame.columns)
    with get_connection(db_path) as conn:
        conn.register("incoming_frame", frame)
        conn.execute(f"INSERT INTO {table_name} ({columns}) SELECT {columns} FROM incoming_frame")
        conn.unregister("incoming_frame")
    logger.info(f"Stored {len(frame)} rows in {table_name}")
    return len(frame)


def table_exists(table_name: str, db_path: Optional[Path] = None) -> bool:
    """Check if a table exists in the database."""
    query = f"""
        SELECT COUNT(*) as count
        FROM information_schema.tables
        WHERE table_name = '{table_name}'
    """
    result = execute_query(query, db_path, readonly=False)
    return result["count"].iloc[0] > 0


def get_table_info(table_name: str, db_path: Optional[Path] = None) -> pd.DataFrame:
    """
    Get information about a table's structure.

    Returns:
        DataFrame with columns: column_name, column_type, ...
    """
    if not table_exists(table_name, db_path):
        raise ValueError(f"Table '{table_name}' does not exist")
    return execute_query(f"DESCRIBE {table_name}", db_path, readonly=False)


def get_row_count(table_name: str, db_path: Optional[Path] = None) -> int:
    """Get number of rows in a table."""
    result = execute_query(f"SELECT COUNT(*) as count FROM {table_name}", db_path, readonly=False)
    return int(result["count"].iloc[0])
