"""Deterministic report assembly: CSV tables, JSON metadata, payload hash.

Payloads never contain wall-clock data, so identical inputs give identical
bytes and an identical hash.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex numbers."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    return obj


def canonical_json(obj, indent=None):
    return json.dumps(jsonable(obj), sort_keys=True, indent=indent, separators=(",", ": ") if indent else (",", ":"))


def payload_hash(obj):
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def _cell(v):
    v = jsonable(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)):
        return canonical_json(v)
    return "" if v is None else str(v)


def csv_text(columns, rows):
    buf = io.StringIO()
    buf.write(f"#schema={SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def read_csv(path):
    """Inverse of :func:`csv_text` (values stay strings)."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#schema="):
        raise ValueError("missing #schema header")
    return list(csv.DictReader(lines[1:]))


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)


@dataclass
class Report:
    name: str
    metadata: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    verdict: dict = field(default_factory=dict)

    def add_table(self, key, columns, rows):
        self.tables[key] = Table(list(columns), list(rows))

    def payload(self):
        return {
            "name": self.name,
            "metadata": self.metadata,
            "tables": {k: {"columns": t.columns, "rows": [[jsonable(r.get(c)) for c in t.columns] for r in t.rows]}
                       for k, t in self.tables.items()},
            "verdict": self.verdict,
        }

    @property
    def hash(self):
        return payload_hash(self.payload())

    def structured_text(self):
        return canonical_json({**self.payload(), "payload_sha256": self.hash}, indent=2) + "\n"

    def write(self, out, fmt="csv"):
        """Write to directory ``out``; returns the list of files written."""
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        if fmt == "structured-text":
            p = out / f"{self.name}.txt"
            p.write_text(self.structured_text())
            return [p]
        if fmt != "csv":
            raise ValueError(f"unknown format {fmt!r}")
        for key, t in self.tables.items():
            p = out / f"{self.name}.{key}.csv"
            p.write_text(csv_text(t.columns, t.rows))
            written.append(p)
        meta = {"name": self.name, "metadata": self.metadata, "verdict": self.verdict,
                "tables": sorted(self.tables), "payload_sha256": self.hash}
        p = out / f"{self.name}.meta.json"
        p.write_text(canonical_json(meta, indent=2) + "\n")
        written.append(p)
        return written
