"""Deterministic writers: identical inputs produce identical bytes.

Floats are rendered with repr (shortest round-trip form), JSON keys are
sorted, CSV is UTF-8 with a header row and no trailing whitespace.  Nothing
here records timestamps, hostnames or other run-dependent state.
"""

from __future__ import annotations

import json


def fmt(value):
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (int, str)):
        return str(value)
    if value is None:
        return ""
    try:
        return repr(float(value))
    except (TypeError, ValueError):
        return str(value)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def to_jsonable(obj):
    """Recursively coerce numpy scalars/arrays into plain Python values."""
    if hasattr(obj, "tolist"):
        return to_jsonable(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, float):
        return obj
    return float(obj)


def dump_json(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_json(obj))
