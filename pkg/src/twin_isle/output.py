"""Text serialization shared by every artifact writer."""

from __future__ import annotations

import io
import json
import math
import os
from typing import Iterable, Sequence


def fmt(x) -> str:
    """Shortest round-trip decimal for a float, with integral values bare.

    ``repr`` already gives the shortest string that parses back to the same
    double (at most 17 significant digits); ``1.0`` is written ``1``.
    """
    if isinstance(x, str):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == 0.0:
        return "0"
    s = repr(x)
    if s.endswith(".0"):
        s = s[:-2]
    return s


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def records_json(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    return json_text([dict(zip(header, row)) for row in rows])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _jsonable(obj.item())
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_text(path: str | os.PathLike, text: str) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


def resolve_threads() -> int:
    """Worker count from ``TWIN_ISLE_THREADS`` (0 or unset means all cores)."""
    raw = os.environ.get("TWIN_ISLE_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("TWIN_ISLE_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)
