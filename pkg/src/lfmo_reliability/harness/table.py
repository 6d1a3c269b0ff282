"""CSV-shaped result tables with a commented metadata header."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

RESULT_SCHEMA = "lfmo-results/1"


def format_cell(value: Any) -> str:
    """Shortest round-trip text for numbers, empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(float(value))
    if hasattr(value, "item"):  # numpy scalar
        return format_cell(value.item())
    return str(value)


@dataclass
class ResultTable:
    kind: str
    columns: list[str]
    rows: list[dict[str, Any]] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    def add(self, row: dict[str, Any]) -> None:
        missing = set(self.columns) - set(row)
        unknown = set(row) - set(self.columns)
        if missing or unknown:
            raise KeyError(f"row does not match the {self.kind} schema: missing={sorted(missing)} unknown={sorted(unknown)}")
        self.rows.append(row)

    def body(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_cell(row[c]) for c in self.columns])
        return buf.getvalue()

    def header(self, timestamp: bool = True) -> str:
        meta = {"schema": RESULT_SCHEMA, "kind": self.kind, **self.metadata}
        lines = [f"# {k}: {v}" for k, v in meta.items()]
        if timestamp:
            lines.append(f"# created: {datetime.now(timezone.utc).isoformat(timespec='seconds')}")
        return "\n".join(lines) + "\n"

    def to_csv(self, timestamp: bool = True) -> str:
        return self.header(timestamp) + self.body()

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


def read_csv_body(text: str) -> list[dict[str, str]]:
    """Parse a table written by :meth:`ResultTable.to_csv`, skipping metadata."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))
