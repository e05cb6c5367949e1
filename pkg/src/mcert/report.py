"""Structured certification reports.

A report is a list of check records plus reproducibility metadata.  The
JSON serialization is deterministic (sorted keys, repr floats) except
for the ``header`` block, which isolates timestamps and runtimes so two
runs with identical seeds agree byte for byte outside it.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field

from . import __version__

__all__ = ["PASS", "FAIL", "INCONCLUSIVE", "CheckRecord", "CertificationReport"]

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"

SCHEMA = "mcert/1"


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        try:
            return value.item()
        except Exception:
            pass
    if isinstance(value, float):
        return value
    return value


@dataclass
class CheckRecord:
    """One certified check: a measured quantity against its bound."""

    name: str
    check_id: str
    verdict: str
    measured: float | None = None
    bound: float | None = None
    tolerance: float | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "check_id": self.check_id,
            "verdict": self.verdict,
            "measured": _jsonable(self.measured),
            "bound": _jsonable(self.bound),
            "tolerance": _jsonable(self.tolerance),
            "details": _jsonable(self.details),
        }


def input_digest(payload) -> str:
    blob = json.dumps(_jsonable(payload), sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


@dataclass
class CertificationReport:
    command: str
    digest: str = ""
    seeds: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    started: float = field(default_factory=time.time)

    def add(self, record: CheckRecord) -> CheckRecord:
        self.records.append(record)
        return record

    def add_table(self, name: str, rows: list) -> None:
        self.tables[name] = [_jsonable(r) for r in rows]

    @property
    def verdict(self) -> str:
        if any(r.verdict == FAIL for r in self.records):
            return FAIL
        if any(r.verdict == INCONCLUSIVE for r in self.records):
            return INCONCLUSIVE
        return PASS

    def exit_code(self) -> int:
        return 0 if self.verdict == PASS else 1

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "tool_version": __version__,
            "command": self.command,
            "input_digest": self.digest,
            "seeds": _jsonable(self.seeds),
            "verdict": self.verdict,
            "records": [r.to_dict() for r in self.records],
            "tables": self.tables,
            "header": {
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                "runtime_seconds": round(time.time() - self.started, 3),
            },
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())
            fh.write("\n")

    def save_tables_csv(self, stem) -> list:
        """Write each table as <stem>_<name>.csv; returns the paths."""
        paths = []
        for name, rows in self.tables.items():
            if not rows:
                continue
            path = f"{stem}_{name}.csv"
            cols = list(rows[0].keys())
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.DictWriter(fh, fieldnames=cols)
                writer.writeheader()
                writer.writerows(rows)
            paths.append(path)
        return paths

    def print_summary(self, out=None) -> None:
        import sys

        out = out or sys.stdout
        for r in self.records:
            measured = "" if r.measured is None else f"  measured={r.measured:.6g}"
            bound = "" if r.bound is None else f"  bound={r.bound:.6g}"
            print(f"[{r.verdict:>12}] {r.name}{measured}{bound}", file=out)
        print(f"overall: {self.verdict}", file=out)
