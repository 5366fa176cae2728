"""Report document construction: canonical JSON and flat CSV tables.

Every rational is rendered as {"exact": "p/q", "approx": float} so reports
are diffable and lossless; keys are sorted so byte-identical reruns are a
meaningful check.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from fractions import Fraction

import numpy as np

from .exactmath import rat_json

REPORT_REQUIRED_FIELDS = ("command", "parameters", "seed", "tables")


def normalize(obj):
    """Recursively convert to JSON-serializable canonical structures."""
    if isinstance(obj, Fraction):
        return rat_json(obj)
    if isinstance(obj, (bool, int, float, str)) or obj is None:
        return obj
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [normalize(v) for v in obj.tolist()]
    if hasattr(obj, "to_json") and callable(obj.to_json):
        return normalize(obj.to_json())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: normalize(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            if isinstance(k, tuple):
                k = ",".join(str(x) for x in k)
            out[str(k)] = normalize(v)
        return out
    if isinstance(obj, (list, tuple, set, frozenset)):
        seq = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [normalize(v) for v in seq]
    return str(obj)


def canonical_json(obj) -> str:
    return json.dumps(normalize(obj), sort_keys=True, indent=1,
                      ensure_ascii=True) + "\n"


def validate_report(doc: dict):
    """Minimal schema check before writing."""
    for fld in REPORT_REQUIRED_FIELDS:
        if fld not in doc:
            raise ValueError(f"report missing required field {fld!r}")
    if not isinstance(doc["tables"], dict):
        raise ValueError("report 'tables' must be an object")


def make_report(command: str, parameters: dict, seed, tables: dict,
                timing: dict | None = None, warnings: list | None = None) -> dict:
    doc = {
        "command": command,
        "parameters": normalize(parameters),
        "seed": seed,
        "tables": normalize(tables),
        "warnings": list(warnings or []),
    }
    if timing is not None:
        doc["timing"] = timing
    validate_report(doc)
    return doc


def _flatten(prefix: str, value, row: dict):
    if isinstance(value, dict):
        if set(value.keys()) == {"exact", "approx"}:
            row[prefix] = value["exact"]
            row[prefix + ".approx"] = value["approx"]
            return
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, row)
    elif isinstance(value, list):
        row[prefix] = json.dumps(value)
    else:
        row[prefix] = value


def table_to_csv(rows: list) -> str:
    """Flatten a list of dict rows into CSV text."""
    flat_rows = []
    fields: list[str] = []
    for r in rows:
        flat: dict = {}
        _flatten("", normalize(r), flat)
        flat.pop("", None)
        flat_rows.append(flat)
        for k in flat:
            if k not in fields:
                fields.append(k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields)
    writer.writeheader()
    for r in flat_rows:
        writer.writerow(r)
    return buf.getvalue()
