"""
Report files: JSON (full payload) or CSV (tabular rows), both with the
effective run configuration echoed at the top.

Floats are written with 17 significant digits in CSV and with Python's
shortest round-trip repr in JSON; both parse back to the same double.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path

import numpy as np

from mediated_gates.models.schemas import RunConfig

logger = logging.getLogger(__name__)


def _native(v):
    # numpy scalars/arrays -> plain Python for serialization
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, complex):
        return [v.real, v.imag]
    raise TypeError(f"cannot serialize {type(v).__name__}")


def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (list, tuple)):
        return " ".join(format_cell(x) for x in v)
    return str(v)


def report_path(run: RunConfig, stem: str) -> Path:
    """``--output`` may name a file (kept as is) or a directory."""
    target = Path(run.output)
    if target.suffix in (".json", ".csv"):
        return target
    return target / f"{stem}.{run.format}"


def render_json(run: RunConfig, payload: dict) -> str:
    return json.dumps({"config": run.model_dump(), **payload}, indent=2, default=_native)


def render_csv(run: RunConfig, summary: dict, rows: list[dict]) -> str:
    buffer = io.StringIO()
    for key, value in run.model_dump().items():
        if isinstance(value, dict):
            for sub, sub_value in value.items():
                buffer.write(f"# config.{key}.{sub}={format_cell(sub_value)}\n")
        else:
            buffer.write(f"# config.{key}={format_cell(value)}\n")
    for key, value in summary.items():
        buffer.write(f"# {key}={format_cell(value)}\n")
    if rows:
        writer = csv.DictWriter(buffer, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: format_cell(v) for k, v in row.items()})
    return buffer.getvalue()


def write_report(run: RunConfig, stem: str, payload: dict, rows: list[dict] | None = None,
                 summary: dict | None = None) -> Path:
    """
    Write ``payload`` (JSON) or ``summary`` + ``rows`` (CSV) and return the path.

    CSV without explicit rows falls back to one row per scalar payload field.
    """
    path = report_path(run, stem)
    path.parent.mkdir(parents=True, exist_ok=True)
    if run.format == "json":
        text = render_json(run, payload)
    else:
        if rows is None:
            rows = [{"field": k, "value": v} for k, v in payload.items() if not isinstance(v, (dict, list))]
        text = render_csv(run, summary or {}, rows)
    path.write_text(text)
    logger.info("wrote %s", path)
    return path
