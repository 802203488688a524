"""Schema-checked reading of spongebc CSV artifacts.

Every artifact starts with ``# spongebc-csv schema=<v> kind=<kind>`` followed
by a header row.  Numbers never get reinterpreted here; empty fields become
None and ``inf`` stays infinite.
"""

from __future__ import annotations

import csv
import io
import re

SCHEMA_VERSION = 1

COLUMNS = {
    "errors": [
        "preset", "method", "equation", "n", "omega_over_l",
        "requested_omega_over_l", "sigma", "status", "e_abc", "e_num", "runtime_s",
    ],
    "series": ["method", "equation", "n", "omega_over_l", "t", "error"],
    "reflection": [
        "method", "equation", "n", "omega_over_l", "sigma", "dx",
        "c_r_theory", "c_r_num",
    ],
    "entropy": ["label", "t", "entropy"],
    "snapshot": ["t", "x", "V", "u", "E", "p"],
}

STRING_COLUMNS = {"preset", "method", "equation", "status", "label"}

_TAG = re.compile(r"#\s*spongebc-csv\s+schema=(\d+)\s+kind=(\w+)")


class SchemaError(Exception):
    """The CSV does not carry the expected schema tag or columns."""


def _convert(column: str, value: str):
    if column in STRING_COLUMNS:
        return value
    if value == "":
        return None
    return float(value)


def read_csv(path: str, expected_kind: str | None = None) -> tuple[str, list[dict]]:
    """Return (kind, rows); raises SchemaError on any structural mismatch."""
    with open(path) as fh:
        text = fh.read()
    lines = text.splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty file")
    tag = _TAG.match(lines[0])
    if tag is None:
        raise SchemaError(f"{path}: missing spongebc-csv schema tag")
    version, kind = int(tag.group(1)), tag.group(2)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"{path}: schema version {version}, expected {SCHEMA_VERSION}")
    if kind not in COLUMNS:
        raise SchemaError(f"{path}: unknown artifact kind {kind!r}")
    if expected_kind is not None and kind != expected_kind:
        raise SchemaError(f"{path}: kind {kind!r}, expected {expected_kind!r}")
    body = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    if not body:
        raise SchemaError(f"{path}: missing header row")
    header = body[0]
    if header != COLUMNS[kind]:
        raise SchemaError(f"{path}: columns {header} do not match {COLUMNS[kind]}")
    if len(body) == 1:
        raise SchemaError(f"{path}: no data rows")
    rows = []
    for record in body[1:]:
        if len(record) != len(header):
            raise SchemaError(f"{path}: ragged row {record}")
        rows.append({c: _convert(c, v) for c, v in zip(header, record)})
    return kind, rows
