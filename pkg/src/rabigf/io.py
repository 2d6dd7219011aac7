"""CSV / JSON writers with a config echo, plus the matching readers.

Floats are written with ``repr`` (shortest round-trip form), so parsing an
output file recovers every number bit for bit.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, is_dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Optional, TextIO

CONFIG_PREFIX = "# config: "
STATUS_PREFIX = "# status: "


def format_value(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def parse_value(s: str) -> Any:
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def _jsonable(obj: Any) -> Any:
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else repr(obj)
    if hasattr(obj, "value") and hasattr(obj, "name"):  # enums
        return obj.value
    return obj


def dumps_config(config: dict) -> str:
    return json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))


def render_csv(columns: list[str], rows: Iterable[dict], config: dict,
               status: Optional[dict] = None) -> str:
    buf = io.StringIO()
    buf.write(CONFIG_PREFIX + dumps_config(config) + "\n")
    if status is not None:
        buf.write(STATUS_PREFIX + dumps_config(status) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def render_json(columns: list[str], rows: Iterable[dict], config: dict,
                status: Optional[dict] = None) -> str:
    payload = {
        "config": _jsonable(config),
        "columns": columns,
        "rows": [{c: _jsonable(r.get(c)) for c in columns} for r in rows],
        "status": _jsonable(status or {}),
    }
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def render(fmt: str, columns, rows, config, status=None) -> str:
    rows = list(rows)
    if fmt == "csv":
        return render_csv(columns, rows, config, status)
    if fmt == "json":
        return render_json(columns, rows, config, status)
    raise ValueError(f"unknown format {fmt!r}")


def write_output(text: str, out: Optional[str], stdout: TextIO) -> None:
    if out in (None, "-"):
        stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def read_table(path_or_text: str) -> tuple[dict, list[dict], dict]:
    """Parse an output file (CSV or JSON) into (config, rows, status)."""
    if "\n" in path_or_text:
        text = path_or_text
    else:
        text = Path(path_or_text).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        payload = json.loads(text)
        return payload["config"], payload["rows"], payload.get("status", {})
    config, status = {}, {}
    body = []
    for line in text.splitlines():
        if line.startswith(CONFIG_PREFIX):
            config = json.loads(line[len(CONFIG_PREFIX):])
        elif line.startswith(STATUS_PREFIX):
            status = json.loads(line[len(STATUS_PREFIX):])
        elif line.startswith("#"):
            continue
        else:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    rows = [dict(zip(header, (parse_value(v) for v in rec))) for rec in reader]
    return config, rows, status
