"""Flat-file writers.  Files only appear once fully written."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Sequence


def _plain(value: Any) -> Any:
    # numpy scalars -> Python scalars so reprs stay plain
    return value.item() if hasattr(value, "item") and not isinstance(value, (str, bytes)) else value


def _cell(value: Any) -> str:
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"refusing to emit non-finite value {value!r}")
        return repr(value)
    return str(value)


def render(rows: Sequence[dict[str, Any]], columns: Sequence[str], fmt: str) -> str:
    rows = [{k: _plain(v) for k, v in row.items()} for row in rows]
    for row in rows:
        for v in row.values():
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError(f"refusing to emit non-finite value {v!r}")
    if fmt == "json":
        ordered = [{c: row.get(c) for c in columns} for row in rows]
        return json.dumps(ordered, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
