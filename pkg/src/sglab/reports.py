"""Machine-readable run reports.

Two formats:

* json-lines: a config record, one record per shot / sweep point, and a
  summary record, in that order.
* csv: a ``# config=...`` comment line, one header row, data rows, and a
  trailing ``# summary=...`` comment line.

Serialization is deterministic: fields keep insertion order, floats are
printed with 17 significant digits, newlines are always "\\n".  Identical
seeds therefore produce byte-identical files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class RunReport:
    pipeline: str
    config: dict
    seed: int
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def format_value(value) -> str:
    """JSON text for one scalar or container, floats at 17 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if value is None:
        return "null"
    if isinstance(value, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {format_value(v)}" for k, v in value.items())
        return "{" + items + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(format_value(v) for v in value) + "]"
    if isinstance(value, complex):
        return format_value({"re": value.real, "im": value.imag})
    if hasattr(value, "item"):  # numpy scalar
        return format_value(value.item())
    raise TypeError(f"cannot serialize value of type {type(value).__name__}")


def _record(kind: str, payload: dict) -> str:
    body = {"record": kind}
    body.update(payload)
    return format_value(body)


def _csv_cell(value) -> str:
    if isinstance(value, str):
        if any(ch in value for ch in ",\"\n"):
            return '"' + value.replace('"', '""') + '"'
        return value
    return format_value(value)


def render_report(report: RunReport, fmt: str) -> str:
    if fmt == "json-lines":
        lines = [_record("config", report.config)]
        lines += [_record("row", row) for row in report.rows]
        lines.append(_record("summary", report.summary))
        return "\n".join(lines) + "\n"
    if fmt == "csv":
        lines = ["# config=" + format_value(report.config)]
        if report.rows:
            header = list(report.rows[0].keys())
            for row in report.rows:
                if list(row.keys()) != header:
                    raise ValueError("csv rows must share one column set")
            lines.append(",".join(header))
            lines += [",".join(_csv_cell(row[k]) for k in header) for row in report.rows]
        lines.append("# summary=" + format_value(report.summary))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def emit_report(report: RunReport, path, fmt: str) -> None:
    text = render_report(report, fmt)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def parse_config_echo(text: str) -> dict:
    """Recover the echoed config from either report format."""
    first = text.splitlines()[0]
    if first.startswith("# config="):
        return json.loads(first[len("# config="):])
    record = json.loads(first)
    if record.get("record") != "config":
        raise ValueError("report does not start with a config record")
    record.pop("record")
    return record
