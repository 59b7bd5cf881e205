"""Machine-readable outputs: CSV/JSON tables with a provenance header, and their parsing."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from topobound import __version__
from topobound.errors import TopoboundError
from topobound.lattice import METRIC


class ParseError(TopoboundError, ValueError):
    """A results file does not have the expected layout."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v == 0:
            return "0"
        return format(v, ".12g")
    return str(value)


def header_lines(config: dict, timestamp: bool) -> list[str]:
    lines = [
        f"# tool: topobound {__version__}",
        f"# config: {json.dumps(config, sort_keys=True)}",
        f"# metric: {METRIC}",
    ]
    if timestamp:
        lines.append(f"# timestamp: {datetime.now(timezone.utc).isoformat(timespec='seconds')}")
    return lines


def render_table(rows: Sequence[dict], columns: Sequence[str], config: dict, fmt: str = "csv",
                 timestamp: bool = True) -> str:
    """Serialize rows as CSV (with a ``#`` header block) or as one JSON document."""
    if fmt == "json":
        doc = {"tool": f"topobound {__version__}", "config": config, "metric": METRIC}
        if timestamp:
            doc["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        doc["columns"] = list(columns)
        doc["rows"] = [{c: _jsonable(r[c]) for c in columns} for r in rows]
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    for line in header_lines(config, timestamp):
        buf.write(line + "\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(format_value(r[c]) for c in columns) + "\n")
    return buf.getvalue()


def render_document(payload: dict, config: dict, timestamp: bool = True) -> str:
    """Single-record JSON output with the provenance fields."""
    doc = {"tool": f"topobound {__version__}", "config": config, "metric": METRIC}
    if timestamp:
        doc["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    doc.update({k: _jsonable(v) for k, v in payload.items()})
    return json.dumps(doc, indent=2) + "\n"


def _jsonable(value):
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def body(text: str) -> str:
    """Output with the timestamp line removed, for determinism comparisons."""
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("# timestamp"))


@dataclass
class Table:
    path: str
    meta: dict
    columns: list[str]
    rows: list[dict]


def _parse_value(text: str):
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_table(path: str) -> Table:
    """Parse a CSV written by :func:`render_table`.

    Raises:
        ParseError: with the 1-based line number of the first malformed line.
    """
    meta: dict = {}
    columns: list[str] | None = None
    rows: list[dict] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].partition(":")
                if not sep:
                    raise ParseError(path, lineno, "header line without 'key: value'")
                meta[key.strip()] = value.strip()
                continue
            cells = line.split(",")
            if columns is None:
                if any(not c or not c.replace("_", "").isalnum() for c in cells):
                    raise ParseError(path, lineno, f"invalid column header {line!r}")
                columns = cells
                continue
            if len(cells) != len(columns):
                raise ParseError(path, lineno, f"expected {len(columns)} fields, found {len(cells)}")
            rows.append({c: _parse_value(v) for c, v in zip(columns, cells)})
    return Table(path, meta, columns or [], rows)


def linear_fit(x, y) -> tuple[float, float, float]:
    """Least-squares ``y = a x + b``; returns ``(a, b, R^2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a, b = np.polyfit(x, y, 1)
    resid = y - (a * x + b)
    ss_tot = ((y - y.mean()) ** 2).sum()
    r2 = 1.0 - (resid ** 2).sum() / ss_tot if ss_tot > 0 else 1.0
    return float(a), float(b), float(r2)


def power_law_fit(x, y) -> tuple[float, float]:
    """Exponent and R^2 of a straight-line fit in log-log space."""
    a, _, r2 = linear_fit(np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float)))
    return a, r2


def is_close(a: float, b: float, tol: float = 1e-9) -> bool:
    return math.isclose(a, b, abs_tol=tol)
