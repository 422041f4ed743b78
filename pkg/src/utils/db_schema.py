"""
Report database schema for DuckDB.

Why separate schema file?
- Documents the report tables in one place
- Makes it easy to recreate the report database from scratch
- Serves as data dictionary for the CSV/JSON outputs

DuckDB identifiers are case-insensitive, so the CSV columns n / N / R are
stored as dimension / cells / half_width.
"""

import logging
from pathlib import Path
from typing import Optional

from src.utils.db_utils import get_connection

logger = logging.getLogger(__name__)

# CSV column -> database column
CSV_TO_DB_COLUMNS = {"n": "dimension", "N": "cells", "R": "half_width"}
DB_TO_CSV_COLUMNS = {v: k for k, v in CSV_TO_DB_COLUMNS.items()}


SCHEMA_SQL = """
-- One row per (case, test field, Omega) evaluation
CREATE TABLE IF NOT EXISTS case_reports (
    case_id VARCHAR NOT NULL,
    field_id VARCHAR NOT NULL,
    omega_id VARCHAR,
    dimension INTEGER NOT NULL,
    cells INTEGER NOT NULL,
    half_width DOUBLE NOT NULL,
    theta DOUBLE NOT NULL,
    c_emp DOUBLE NOT NULL,
    argmax_x1 DOUBLE,
    argmax_x2 DOUBLE,
    argmax_x3 DOUBLE,
    masked_points BIGINT NOT NULL,
    runtime_ms DOUBLE,
    generated_at VARCHAR
);

-- Refinement and domain sweeps
CREATE TABLE IF NOT EXISTS series_points (
    case_id VARCHAR NOT NULL,
    axis VARCHAR NOT NULL,
    value DOUBLE NOT NULL,
    c_emp DOUBLE NOT NULL,
    exponent DOUBLE,
    drift DOUBLE,
    stable BOOLEAN,
    generated_at VARCHAR
);

-- Weight constants per weight spec
CREATE TABLE IF NOT EXISTS weight_constants (
    weight_id VARCHAR NOT NULL,
    kind VARCHAR NOT NULL,
    constant VARCHAR NOT NULL,
    value DOUBLE,
    witness_side DOUBLE,
    j_min INTEGER,
    j_max INTEGER,
    cube_count BIGINT,
    divergent BOOLEAN,
    dimension INTEGER,
    cells INTEGER,
    half_width DOUBLE,
    generated_at VARCHAR
);

CREATE INDEX IF NOT EXISTS idx_case_reports_case ON case_reports(case_id);
CREATE INDEX IF NOT EXISTS idx_series_case ON series_points(case_id);
CREATE INDEX IF NOT EXISTS idx_weights_id ON weight_constants(weight_id);
"""

REPORT_TABLES = ("case_reports", "series_points", "weight_constants")


def create_schema(db_path: Optional[Path] = None):
    """
    Create all report tables and indexes.

    Safe to run repeatedly: every statement is IF NOT EXISTS.
    """
    logger.info("Creating report schema...")

    try:
        conn = get_connection(db_path, readonly=False)

        # Execute schema SQL (split by semicolon for multiple statements)
        for statement in SCHEMA_SQL.split(";"):
            statement = statement.strip()
            if statement:
                conn.execute(statement)

        conn.commit()
        conn.close()
        logger.info("Report schema ready")

    except Exception as e:
        logger.error(f"Error creating schema: {e}")
        raise
