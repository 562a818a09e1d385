"""Parsing and rendering of typed column values.

Wire conventions: dates are ISO-8601 (YYYY-MM-DD), times HH:MM, decimals use
a dot. Empty CSV cells are nulls.
"""

from __future__ import annotations

import datetime as dt

from .errors import Unparseable

NUMBER_WORDS = {
    word: n + 1
    for n, word in enumerate(
        "one two three four five six seven eight nine ten eleven twelve thirteen "
        "fourteen fifteen sixteen seventeen eighteen nineteen twenty".split()
    )
}


def parse_value(raw: str, semantic_type: str):
    """Parse a raw string into the Python value for a semantic type."""
    raw = raw.strip()
    if raw == "":
        return None
    try:
        if semantic_type == "integer":
            return int(raw)
        if semantic_type == "decimal":
            return float(raw)
        if semantic_type == "date":
            return dt.date.fromisoformat(raw)
        if semantic_type == "time":
            hh, mm = raw.split(":")
            return dt.time(int(hh), int(mm))
    except (ValueError, TypeError) as exc:
        raise Unparseable(raw, semantic_type) from exc
    if semantic_type in ("text", "identifier"):
        return raw
    raise Unparseable(raw, semantic_type)


def format_value(value) -> str:
    """Render a typed value in its surface form (inverse of parse_value)."""
    if value is None:
        return ""
    if isinstance(value, dt.time):
        return value.strftime("%H:%M")
    if isinstance(value, dt.date):
        return value.isoformat()
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


def value_sort_key(value):
    """Total order within one column's value space (types are homogeneous)."""
    return (value is None, str(type(value).__name__), value if value is not None else 0)
