"""Convergence trace records and their CSV / JSON-lines serialization.

One record is emitted per training pass. The CSV column order is fixed so
plot scripts can rely on a stable schema; optional fields (primal-side
quantities and the averaged variants) are left empty when not evaluated.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "TRACE_COLUMNS",
    "TraceRecord",
    "dual_at_exact_calls",
    "read_trace",
    "write_trace",
]

TRACE_COLUMNS = (
    "iter",
    "pass_kind",
    "exact_calls",
    "approx_calls",
    "elapsed_ms",
    "dual",
    "primal",
    "gap",
    "dual_avg",
    "primal_avg",
    "gap_avg",
    "mean_ws_size",
    "approx_passes_this_iter",
)


@dataclass
class TraceRecord:
    """One logged measurement: counters, timing, and objective values."""

    iteration: int
    pass_kind: str  # "exact" or "approx"
    exact_calls: int
    approx_calls: int
    elapsed_ms: float
    dual: float
    primal: float | None = None
    gap: float | None = None
    dual_avg: float | None = None
    primal_avg: float | None = None
    gap_avg: float | None = None
    mean_ws_size: float = 0.0
    approx_passes_this_iter: int = 0

    def as_row(self) -> list[str]:
        values = (
            self.iteration,
            self.pass_kind,
            self.exact_calls,
            self.approx_calls,
            self.elapsed_ms,
            self.dual,
            self.primal,
            self.gap,
            self.dual_avg,
            self.primal_avg,
            self.gap_avg,
            self.mean_ws_size,
            self.approx_passes_this_iter,
        )
        # float() strips numpy scalars, whose repr is not parseable by float().
        return [
            "" if v is None else (repr(float(v)) if isinstance(v, float) else str(v))
            for v in values
        ]


_FIELD_NAMES = [f.name for f in fields(TraceRecord)]


def write_trace(path: str | Path, records: Iterable[TraceRecord], fmt: str = "csv") -> None:
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(TRACE_COLUMNS)
            for record in records:
                writer.writerow(record.as_row())
    elif fmt == "json":
        with path.open("w") as handle:
            for record in records:
                handle.write(json.dumps(asdict(record)) + "\n")
    else:
        raise ValueError(f"unknown trace format {fmt!r} (expected 'csv' or 'json')")


def read_trace(path: str | Path) -> list[TraceRecord]:
    """Load a trace written by :func:`write_trace`, inferring the format."""
    path = Path(path)
    text = path.read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return [_record_from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]
    rows = list(csv.reader(text.splitlines()))
    if not rows or tuple(rows[0]) != TRACE_COLUMNS:
        raise ValueError(f"{path}: not a trace file (unexpected header)")
    records = []
    for row in rows[1:]:
        if not row:
            continue
        raw = dict(zip(_FIELD_NAMES, row))
        records.append(
            TraceRecord(
                iteration=int(raw["iteration"]),
                pass_kind=raw["pass_kind"],
                exact_calls=int(raw["exact_calls"]),
                approx_calls=int(raw["approx_calls"]),
                elapsed_ms=float(raw["elapsed_ms"]),
                dual=float(raw["dual"]),
                primal=_opt_float(raw["primal"]),
                gap=_opt_float(raw["gap"]),
                dual_avg=_opt_float(raw["dual_avg"]),
                primal_avg=_opt_float(raw["primal_avg"]),
                gap_avg=_opt_float(raw["gap_avg"]),
                mean_ws_size=float(raw["mean_ws_size"]),
                approx_passes_this_iter=int(raw["approx_passes_this_iter"]),
            )
        )
    return records


def dual_at_exact_calls(records: Sequence[TraceRecord], calls: int) -> float | None:
    """Best dual bound reached using at most ``calls`` exact oracle calls."""
    best = None
    for record in records:
        if record.exact_calls <= calls:
            best = record.dual if best is None else max(best, record.dual)
    return best


def _opt_float(text: str) -> float | None:
    return None if text == "" else float(text)


def _record_from_dict(payload: dict) -> TraceRecord:
    return TraceRecord(**{name: payload.get(name) for name in _FIELD_NAMES})
