"""Trace records and their serialization.

A trace is row-major numeric data with named, unit-tagged columns and a
metadata mapping (configuration echo, seed, package version - never
timestamps, so identical runs emit identical bytes). Two formats are
supported: CSV with '#'-prefixed leading metadata lines and a
"name[unit]" header row, and an equivalent JSON document. Numbers are
written with shortest round-trip precision, so emitting and re-ingesting
reproduces every value bit for bit.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidParameterError

_MAGIC = "tripletsim-trace"
_FORMAT_VERSION = 1

_HEADER_RE = re.compile(r"^(?P<name>[^\[\]]+)\[(?P<unit>[^\[\]]*)\]$")


@dataclass(frozen=True)
class Column:
    """A named data column with a unit tag ('1' marks dimensionless)."""

    name: str
    unit: str = "1"

    def __post_init__(self) -> None:
        if not self.name or "[" in self.name or "]" in self.name or "," in self.name:
            raise InvalidParameterError(f"invalid column name {self.name!r}")
        if "[" in self.unit or "]" in self.unit or "," in self.unit:
            raise InvalidParameterError(f"invalid column unit {self.unit!r}")

    @property
    def header(self) -> str:
        return f"{self.name}[{self.unit}]"


@dataclass
class TraceRecord:
    """Numeric result table plus metadata."""

    columns: tuple[Column, ...]
    data: np.ndarray
    metadata: dict

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2:
            raise InvalidParameterError(f"trace data must be 2-d, got shape {self.data.shape}")
        if self.data.shape[1] != len(self.columns):
            raise InvalidParameterError(
                f"{len(self.columns)} columns declared but data has {self.data.shape[1]}"
            )
        if not np.all(np.isfinite(self.data)):
            raise InvalidParameterError("trace data must be finite")

    def column(self, name: str) -> np.ndarray:
        for k, col in enumerate(self.columns):
            if col.name == name:
                return self.data[:, k]
        raise InvalidParameterError(
            f"no column named {name!r}; have {[c.name for c in self.columns]}"
        )


def _format_number(value: float) -> str:
    return repr(float(value))


def emit(record: TraceRecord, fmt: str = "csv") -> bytes:
    """Serialize a trace record to CSV or JSON bytes (LF line endings)."""
    if fmt == "csv":
        lines = [f"# {_MAGIC} {_FORMAT_VERSION}"]
        lines.append("# " + json.dumps(record.metadata, sort_keys=True, separators=(",", ":")))
        lines.append(",".join(col.header for col in record.columns))
        for row in record.data:
            lines.append(",".join(_format_number(v) for v in row))
        return ("\n".join(lines) + "\n").encode("utf-8")
    if fmt == "json":
        doc = {
            "format": _MAGIC,
            "version": _FORMAT_VERSION,
            "metadata": record.metadata,
            "columns": [{"name": c.name, "unit": c.unit} for c in record.columns],
            "data": [[float(v) for v in row] for row in record.data],
        }
        return (json.dumps(doc, sort_keys=True, indent=1) + "\n").encode("utf-8")
    raise ConfigError(f"unknown output format {fmt!r}; use 'csv' or 'json'")


def parse_trace(payload: bytes | str) -> TraceRecord:
    """Re-ingest a trace emitted by :func:`emit` (either format)."""
    text = payload.decode("utf-8") if isinstance(payload, bytes) else payload
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _parse_json(stripped)
    return _parse_csv(text)


def read_trace(path: str) -> TraceRecord:
    with open(path, "rb") as fh:
        return parse_trace(fh.read())


def _parse_json(text: str) -> TraceRecord:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"trace is not valid JSON: {exc}") from exc
    if doc.get("format") != _MAGIC:
        raise ConfigError("not a trace document (missing format marker)")
    columns = tuple(Column(c["name"], c.get("unit", "1")) for c in doc["columns"])
    data = np.asarray(doc["data"], dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(columns))
    return TraceRecord(columns=columns, data=data, metadata=doc.get("metadata", {}))


def _parse_csv(text: str) -> TraceRecord:
    lines = text.split("\n")
    meta_lines: list[str] = []
    body: list[str] = []
    in_header = True
    for line in lines:
        if in_header and line.startswith("#"):
            meta_lines.append(line[1:].strip())
            continue
        in_header = False
        if line.strip():
            body.append(line)
    if not body:
        raise ConfigError("trace has no header row")
    metadata: dict = {}
    for chunk in meta_lines:
        if chunk.startswith("{"):
            try:
                metadata = json.loads(chunk)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"trace metadata line is not valid JSON: {exc}") from exc
            break
    columns = []
    for header in body[0].split(","):
        m = _HEADER_RE.match(header.strip())
        if m is None:
            raise ConfigError(f"malformed column header {header!r}; expected name[unit]")
        columns.append(Column(m.group("name"), m.group("unit")))
    rows = []
    for line in body[1:]:
        cells = line.split(",")
        if len(cells) != len(columns):
            raise ConfigError(
                f"row has {len(cells)} cells, expected {len(columns)}: {line!r}"
            )
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ConfigError(f"non-numeric cell in row {line!r}") from exc
    data = np.asarray(rows, dtype=float) if rows else np.empty((0, len(columns)))
    return TraceRecord(columns=tuple(columns), data=data, metadata=metadata)


def write_atomic(path: str, payload: bytes) -> None:
    """Write bytes so the destination is never seen half-written."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".trace-", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
