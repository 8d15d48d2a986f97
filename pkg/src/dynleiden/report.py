"""Run reports and their CSV / JSON serialisation."""

from __future__ import annotations

import csv
import json
import sys
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

__all__ = ["REPORT_COLUMNS", "PhaseTimer", "RunReport", "emit_report", "load_report"]


@dataclass
class RunReport:
    """One measured run of one algorithm on one snapshot.

    ``iterations`` holds the local-moving iteration count of every pass.
    Fractions are relative to the vertex count (affected) or to the number of
    communities in the prior partition (changed / marked).
    """

    algorithm: str = ""
    row_type: str = "run"
    graph: str = ""
    batch_fraction: float = 0.0
    batch_size: int = 0
    batch_index: int = 0
    repetition: int = 0
    time_marking: float = 0.0
    time_move: float = 0.0
    time_refine: float = 0.0
    time_aggregate: float = 0.0
    time_total: float = 0.0
    passes: int = 0
    iterations: list[int] = field(default_factory=list)
    moves_first_pass: int = 0
    modularity: float = 0.0
    community_count: int = 0
    affected_fraction: float = 1.0
    changed_community_fraction: float = 1.0
    marked_community_fraction: float = 1.0
    disconnected_count: int = 0
    max_passes_hit: bool = False
    skipped_updates: int = 0
    threads: int = 1
    seed: int = 0

    @property
    def phase_time(self) -> float:
        return self.time_marking + self.time_move + self.time_refine + self.time_aggregate

    def to_row(self) -> dict:
        row = asdict(self)
        row["iterations"] = ";".join(str(x) for x in self.iterations)
        return row

    @classmethod
    def from_row(cls, row: dict) -> RunReport:
        kwargs = {}
        for f in fields(cls):
            if f.name not in row:
                continue
            v = row[f.name]
            if f.name == "iterations":
                if isinstance(v, str):
                    v = [int(x) for x in v.split(";") if x]
                else:
                    v = [int(x) for x in v]
            elif f.type in ("int",):
                # mean rows may hold fractional averages of integer fields
                v = float(v)
                v = int(v) if v.is_integer() else v
            elif f.type in ("float",):
                v = float(v)
            elif f.type in ("bool",):
                v = v if isinstance(v, bool) else str(v).lower() == "true"
            kwargs[f.name] = v
        return cls(**kwargs)


REPORT_COLUMNS: tuple[str, ...] = tuple(f.name for f in fields(RunReport))


class PhaseTimer:
    """Accumulates wall time per named phase."""

    def __init__(self):
        self.totals: dict[str, float] = {}

    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.totals[name] = self.totals.get(name, 0.0) + time.perf_counter() - t0

    def __getitem__(self, name: str) -> float:
        return self.totals.get(name, 0.0)


def emit_report(reports, fmt: str, path) -> None:
    """Write reports as CSV (header + one row per run) or a JSON array.

    ``path`` may be ``"-"`` for standard output.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    rows = [r.to_row() for r in reports]
    if str(path) == "-":
        _write_rows(rows, fmt, sys.stdout)
        return
    with Path(path).open("w", newline="") as fh:
        _write_rows(rows, fmt, fh)


def _write_rows(rows, fmt, fh) -> None:
    if fmt == "csv":
        writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    else:
        for row in rows:
            row["iterations"] = [int(x) for x in row["iterations"].split(";") if x]
        json.dump(rows, fh, indent=1)
        fh.write("\n")


def load_report(path, fmt: str | None = None) -> list[RunReport]:
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".")
    if fmt == "json":
        return [RunReport.from_row(r) for r in json.loads(path.read_text())]
    with path.open(newline="") as fh:
        return [RunReport.from_row(r) for r in csv.DictReader(fh)]
