"""
Command-line entry point.

    python run_workbench.py verify    --config run.json
    python run_workbench.py constants --config run.json
    python run_workbench.py sweep     --config run.json
    python run_workbench.py report    --in reports/ --out merged.csv

Exit codes: 0 pass, 1 a stability or divergence assertion failed,
2 usage error (bad config, unknown case, unreadable file).

Every command writes <out_dir>/<command>.csv and <command>.json and
appends its rows to <out_dir>/reports.duckdb. JSON rows carry no
wall-clock data; timings live in the "meta" block.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import duckdb
import pandas as pd
from tqdm import tqdm

from src.analysis.field import GridSpec
from src.analysis.geometry import CubeFamily
from src.analysis.weights import a1_constant, ainf_constant, ap_constant, apq_constant, bump_check, testing_check
from src.harness.cases import (
    Assessment,
    CaseContext,
    CaseResult,
    SeriesResult,
    assess_case,
    divergence_probe,
    refinement_study,
    resolve_case,
    run_case,
)
from src.harness.suites import weight_suite
from src.utils.config import ExperimentConfig, load_config, thread_count
from src.utils.db_schema import CSV_TO_DB_COLUMNS, DB_TO_CSV_COLUMNS, create_schema
from src.utils.db_utils import database_path, insert_frame

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "case_id",
    "field_id",
    "omega_id",
    "n",
    "N",
    "R",
    "theta",
    "c_emp",
    "argmax_x1",
    "argmax_x2",
    "argmax_x3",
    "masked_points",
    "runtime_ms",
]
SERIES_COLUMNS = ["case_id", "axis", "value", "c_emp", "exponent", "drift", "stable"]
WEIGHT_COLUMNS = [
    "weight_id",
    "kind",
    "constant",
    "value",
    "witness_side",
    "j_min",
    "j_max",
    "cube_count",
    "divergent",
    "n",
    "N",
    "R",
]
REPORT_ORDER = ["case_id", "weight_id", "constant", "axis", "field_id", "omega_id", "cells", "value"]


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _records(frame: pd.DataFrame) -> List[dict]:
    """DataFrame rows as JSON-safe dicts (NaN -> None)."""
    return frame.astype(object).where(pd.notna(frame), None).to_dict("records")


def _json_default(value):
    if hasattr(value, "item"):
        return value.item()
    return str(value)


def write_outputs(out_dir: Path, command: str, frame: pd.DataFrame, meta: dict, extra: Optional[dict] = None) -> Tuple[Path, Path]:
    """
    Write <command>.csv (all columns) and <command>.json (rows without
    runtime_ms, sorted keys).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{command}.csv"
    json_path = out_dir / f"{command}.json"
    frame.to_csv(csv_path, index=False)
    document = {"meta": meta, "rows": _records(frame.drop(columns=["runtime_ms"], errors="ignore"))}
    if extra:
        document.update(extra)
    json_path.write_text(json.dumps(document, sort_keys=True, indent=2, default=_json_default) + "\n", encoding="utf-8")
    logger.info(f"Wrote {len(frame)} rows to {csv_path} and {json_path}")
    return csv_path, json_path


def store_rows(out_dir: Path, table: str, frame: pd.DataFrame, generated_at: str) -> int:
    """Append rows to the report database, renaming n/N/R to their column names."""
    db_path = database_path(out_dir)
    create_schema(db_path)
    stored = frame.rename(columns=CSV_TO_DB_COLUMNS).copy()
    stored["generated_at"] = generated_at
    return insert_frame(table, stored, db_path)


def _resolve_cases(config: ExperimentConfig) -> List[str]:
    """Canonical case ids, checked against the configured dimension."""
    case_ids = []
    for case_id in config.cases:
        case = resolve_case(case_id)
        if not case.min_dimension <= config.dimension <= case.max_dimension:
            raise ValueError(
                f"case {case.case_id} needs {case.min_dimension} <= n <= {case.max_dimension}, "
                f"config has n={config.dimension}"
            )
        case_ids.append(case.case_id)
    return case_ids


def _parallel(case_ids: Sequence[str], work, label: str) -> Dict[str, object]:
    """Run work(case_id) on a thread pool; results keyed by case id."""
    results: Dict[str, object] = {}
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        futures = {pool.submit(work, case_id): case_id for case_id in case_ids}
        for future in tqdm(as_completed(futures), total=len(futures), desc=label):
            results[futures[future]] = future.result()
    return results


def cmd_verify(config: ExperimentConfig) -> int:
    case_ids = _resolve_cases(config)
    ctx = CaseContext(config)
    timing: Dict[str, float] = {}

    def work(case_id: str) -> Tuple[CaseResult, Assessment]:
        started = time.perf_counter()
        result = run_case(case_id, ctx)
        assessment = assess_case(case_id, config, result)
        timing[case_id] = round(time.perf_counter() - started, 3)
        return result, assessment

    outcomes = _parallel(case_ids, work, "verify")
    ordered = sorted(outcomes)
    frame = pd.concat([outcomes[c][0].to_frame() for c in ordered], ignore_index=True)[CSV_COLUMNS]
    assessments = [outcomes[c][1] for c in ordered]
    generated_at = _timestamp()
    meta = {
        "command": "verify",
        "config": config.to_dict(),
        "generated_at": generated_at,
        "timing": {c: timing.get(c) for c in ordered},
    }
    verdicts = [
        {"case_id": a.case_id, "expectation": a.expectation, "passed": a.passed, "detail": a.detail}
        for a in assessments
    ]
    write_outputs(config.output_path, "verify", frame, meta, {"assessments": verdicts})
    store_rows(config.output_path, "case_reports", frame, generated_at)

    print("\n" + "=" * 60)
    print("VERIFY SUMMARY")
    print("=" * 60)
    for a in assessments:
        mark = "✓" if a.passed else "✗"
        print(f"{mark} {a.case_id:<22} {a.expectation:<8} {a.detail}")
    failed = [a.case_id for a in assessments if not a.passed]
    if failed:
        print(f"\n✗ {len(failed)} case(s) failed: {', '.join(failed)}")
        return 1
    print(f"\n✓ all {len(assessments)} case(s) passed")
    return 0


def weight_constant_frame(config: ExperimentConfig) -> pd.DataFrame:
    """
    A_1, A_p, A_(p,q) and A_inf constants of every configured weight, plus
    the joint log bump and the Sawyer testing constants of the pair u = v = w
    for I_alpha: L^p -> L^q when alpha < n.
    """
    grid = GridSpec(config.dimension, config.half_width, config.cells)
    family = CubeFamily.dyadic(grid, inside_only=True)
    thinned = CubeFamily.dyadic(grid, inside_only=True, stride_shift=config.stride_shift)
    two_weight = 0 < config.alpha < grid.dimension
    rows = []
    for spec, (weight_id, w) in zip(config.weights, weight_suite(config.weights, grid, config.seed)):
        reports = [
            a1_constant(w, family),
            ap_constant(w, config.p, family),
            apq_constant(w, config.p, config.q, family),
            ainf_constant(w, family),
        ]
        if two_weight:
            reports.append(bump_check(w, w, config.p, config.q, config.alpha, "joint", delta=config.delta, family=thinned))
            testing = testing_check(w, w, config.p, config.q, config.alpha, family)
            reports.extend([testing.forward, testing.dual])
        for report in reports:
            record = report.to_record()
            record.pop("witness_center")
            record.update({"weight_id": weight_id, "kind": spec["kind"]})
            record.update({"n": grid.dimension, "N": grid.cells, "R": grid.half_width})
            rows.append(record)
        logger.info(f"{weight_id}: " + ", ".join(f"{r.name}={r.value:.4g}" for r in reports))
    return pd.DataFrame(rows)[WEIGHT_COLUMNS]


def cmd_constants(config: ExperimentConfig) -> int:
    frame = weight_constant_frame(config)
    generated_at = _timestamp()
    meta = {"command": "constants", "config": config.to_dict(), "generated_at": generated_at}
    write_outputs(config.output_path, "constants", frame, meta)
    store_rows(config.output_path, "weight_constants", frame, generated_at)
    print(frame.to_string(index=False))
    return 0


def sweep_case(case_id: str, config: ExperimentConfig) -> List[SeriesResult]:
    """Refinement series plus a divergence probe along the case's axis, where the config allows."""
    case = resolve_case(case_id)
    series = []
    if len(config.resolutions) >= 2:
        series.append(refinement_study(case_id, config))
    axis = config.probe_axis or case.probe_axis or "radius"
    if axis == "radius" and len(config.radii) >= 4:
        series.append(divergence_probe(case_id, config, "radius"))
    elif axis == "resolution" and (len(config.resolutions) >= 4 or config.cells >= 16):
        series.append(divergence_probe(case_id, config, "resolution"))
    if not series:
        raise ValueError(f"sweep of {case_id} needs >= 2 resolutions or >= 4 radii")
    return series


def cmd_sweep(config: ExperimentConfig) -> int:
    case_ids = _resolve_cases(config)
    outcomes = _parallel(case_ids, lambda case_id: sweep_case(case_id, config), "sweep")
    frames = [s.to_frame() for c in sorted(outcomes) for s in outcomes[c]]
    frame = pd.concat(frames, ignore_index=True)[SERIES_COLUMNS]
    generated_at = _timestamp()
    meta = {"command": "sweep", "config": config.to_dict(), "generated_at": generated_at}
    write_outputs(config.output_path, "sweep", frame, meta)
    store_rows(config.output_path, "series_points", frame, generated_at)
    print(frame.to_string(index=False))
    return 0


def cmd_report(in_dir: Path, out_file: Path) -> int:
    """Merge every JSON report under in_dir into one CSV, ordered through DuckDB."""
    in_dir = Path(in_dir)
    if not in_dir.is_dir():
        raise FileNotFoundError(f"report directory not found: {in_dir}")
    paths = sorted(in_dir.glob("*.json"))
    if not paths:
        raise FileNotFoundError(f"no JSON reports in {in_dir}")
    frames = []
    for path in paths:
        document = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(document, dict) or "rows" not in document:
            raise ValueError(f"{path} is not a workbench report (no 'rows')")
        rows = pd.DataFrame(document["rows"])
        rows.insert(0, "source", path.name)
        frames.append(rows)
    # n and N collide in DuckDB's case-insensitive namespace
    merged = pd.concat(frames, ignore_index=True).rename(columns=CSV_TO_DB_COLUMNS)
    order = ", ".join(f'"{c}"' for c in ["source", *REPORT_ORDER] if c in merged.columns)
    with duckdb.connect() as conn:
        conn.register("reports", merged)
        ordered = conn.execute(f"SELECT * FROM reports ORDER BY {order}").fetchdf()
    ordered = ordered.rename(columns=DB_TO_CSV_COLUMNS)
    out_file = Path(out_file)
    out_file.parent.mkdir(parents=True, exist_ok=True)
    ordered.to_csv(out_file, index=False)
    logger.info(f"Merged {len(paths)} reports ({len(ordered)} rows) into {out_file}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Numerical workbench for pointwise and weighted maximal inequalities.")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("verify", "run cases and check stability / divergence expectations"),
        ("constants", "weight constants for every configured weight"),
        ("sweep", "refinement series and divergence probes"),
    ):
        command = commands.add_parser(name, help=text)
        command.add_argument("--config", type=Path, required=True, help="JSON experiment config")
    report = commands.add_parser("report", help="merge JSON reports into one CSV")
    report.add_argument("--in", dest="in_dir", type=Path, required=True, help="directory of JSON reports")
    report.add_argument("--out", dest="out_file", type=Path, required=True, help="merged CSV path")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return 0 if exit_.code == 0 else 2
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            return cmd_report(args.in_dir, args.out_file)
        config = load_config(args.config)
        if args.command == "verify":
            return cmd_verify(config)
        if args.command == "constants":
            return cmd_constants(config)
        return cmd_sweep(config)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as e:
        logger.error(f"{args.command}: {e}")
        print(f"[error] {e}", file=sys.stderr)
        return 2
