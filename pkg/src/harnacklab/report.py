"""Deterministic JSON and CSV serialization of reports."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def to_jsonable(obj):
    """Recursively convert numpy types, dataclasses and mappings to plain JSON values.

    Non-finite floats become ``None``; mapping keys become strings.
    """
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)})
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        val = float(obj)
        return val if math.isfinite(val) else None
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> Path:
    """Write ``obj`` with a ``schema_version`` field (added when missing)."""
    data = to_jsonable(obj)
    if isinstance(data, dict):
        data.setdefault("schema_version", SCHEMA_VERSION)
    path = Path(path)
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")
    return path


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v.item() if isinstance(v, np.generic) else v)


def format_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(row[h]) if isinstance(row, dict) else _cell(v)
                    for h, v in zip(header, row if not isinstance(row, dict) else header)])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    """CSV with a header row; ``rows`` are sequences or dicts keyed by the header."""
    path = Path(path)
    path.write_text(format_csv(header, rows))
    return path


__all__ = ["SCHEMA_VERSION", "to_jsonable", "dumps", "write_json", "format_csv", "write_csv"]
