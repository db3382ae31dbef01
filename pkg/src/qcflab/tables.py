"""CSV and JSON emission with a fixed float format."""

from __future__ import annotations

import csv
import io
import json
import math

__all__ = ["format_value", "to_csv", "to_json"]


def format_value(v) -> str:
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def to_csv(rows, columns) -> str:
    """Render dict rows as RFC-4180 CSV with a mandatory header."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(_plain(row.get(c))) for c in columns])
    return buf.getvalue()


def _plain(v):
    if hasattr(v, "item") and not isinstance(v, (list, tuple)):
        try:
            return v.item()
        except (ValueError, AttributeError):
            return v
    return v


def _json_safe(v):
    v = _plain(v)
    if isinstance(v, float) and not math.isfinite(v):
        return format_value(v)
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def to_json(obj) -> str:
    return json.dumps(_json_safe(obj), indent=2, sort_keys=False) + "\n"
