"""CSV report tables and the append-only run log."""
from __future__ import annotations

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Sequence

from osnls.errors import MissingReportError
from osnls.integrator import DIAGNOSTICS_HEADER, RunTrace

RUN_LOG_NAME = "run_log.csv"
RUN_LOG_HEADER = ["run_ts", "command", "status", "rows_written", "error_message"]


def format_cell(value: Any) -> str:
    """Floats use repr so identical numbers always print identically; inf/nan as inf/nan."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_table(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> int:
    """Overwrite path with header + rows; returns the number of data rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    return len(rows)


def append_rows(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    """Append rows, writing the header first when the file is new or empty (non-idempotent helper)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    needs_header = not path.exists() or path.stat().st_size == 0
    with open(path, "a", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        if needs_header:
            writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])


def read_table(path: Path) -> List[Dict[str, str]]:
    """Read a CSV table: first row = header, each other row = dict of column -> value.

    Empty file or only header -> []. Short rows are padded with None for missing columns.
    """
    path = Path(path)
    if not path.exists():
        raise MissingReportError(f"Report not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as f:
        values = list(csv.reader(f))
    if not values:
        return []
    header = [v.strip() for v in values[0]]
    result: List[Dict[str, str]] = []
    for row in values[1:]:
        result.append({key: row[i] if i < len(row) else None for i, key in enumerate(header)})
    return result


def read_header(path: Path) -> List[str]:
    path = Path(path)
    if not path.exists():
        raise MissingReportError(f"Report not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as f:
        first = next(csv.reader(f), [])
    return [v.strip() for v in first]


def write_diagnostics_csv(path: Path, trace: RunTrace) -> int:
    return write_table(path, DIAGNOSTICS_HEADER, [d.as_row() for d in trace.diagnostics])


def write_json(path: Path, payload: Dict[str, Any]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def append_run_log(output_dir: Path, command: str, status: str, rows_written: int, error_message: str = "") -> None:
    """One row per CLI invocation, failed runs included."""
    run_ts = datetime.now(timezone.utc).isoformat(timespec="seconds")
    append_rows(
        Path(output_dir) / RUN_LOG_NAME,
        RUN_LOG_HEADER,
        [[run_ts, command, status, rows_written, error_message[:500]]],
    )
