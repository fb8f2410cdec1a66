"""Post-processing of convergence traces: re-based suboptimality tables and
rendered convergence figures.

Raw traces log absolute primal and dual values. For comparison plots both
are re-based against the best bounds observed across all supplied runs: the
primal suboptimality subtracts the highest dual bound, the dual
suboptimality is measured from the lowest primal value. Figures show the
three measured quantities against cumulative exact oracle calls and against
elapsed time, one line per run.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .trace import TraceRecord, read_trace

__all__ = ["render_report", "suboptimality_rows"]

REPORT_COLUMNS = (
    "run",
    "iter",
    "pass_kind",
    "exact_calls",
    "approx_calls",
    "elapsed_ms",
    "dual_subopt",
    "primal_subopt",
    "gap",
)

_EPS_FLOOR = 1e-14  # semilog plots cannot show exact zeros


def suboptimality_rows(
    runs: dict[str, list[TraceRecord]],
) -> list[tuple]:
    """Flatten traces into re-based rows, one per record."""
    best_dual = max(r.dual for records in runs.values() for r in records)
    primals = [r.primal for records in runs.values() for r in records if r.primal is not None]
    best_primal = min(primals) if primals else None
    rows = []
    for name, records in runs.items():
        for r in records:
            primal_sub = None if r.primal is None else r.primal - best_dual
            dual_sub = None if best_primal is None else best_primal - r.dual
            rows.append(
                (
                    name,
                    r.iteration,
                    r.pass_kind,
                    r.exact_calls,
                    r.approx_calls,
                    r.elapsed_ms,
                    dual_sub,
                    primal_sub,
                    r.gap,
                )
            )
    return rows


def render_report(
    trace_paths: Sequence[str | Path],
    out_dir: str | Path,
    labels: Sequence[str] | None = None,
    fmt: str = "png",
) -> list[Path]:
    """Write the suboptimality table and the two convergence figures.

    Returns the paths of everything written.
    """
    paths = [Path(p) for p in trace_paths]
    if not paths:
        raise ValueError("no trace files given")
    if labels is not None and len(labels) != len(paths):
        raise ValueError("need exactly one label per trace file")
    names = list(labels) if labels is not None else [p.stem for p in paths]
    runs = {name: read_trace(path) for name, path in zip(names, paths)}
    for name, records in runs.items():
        if not records:
            raise ValueError(f"trace {name!r} holds no records")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    table = out_dir / "suboptimality.csv"
    with table.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(REPORT_COLUMNS)
        for row in suboptimality_rows(runs):
            writer.writerow(["" if v is None else v for v in row])
    written.append(table)

    best_dual = max(r.dual for records in runs.values() for r in records)
    primals = [r.primal for records in runs.values() for r in records if r.primal is not None]
    best_primal = min(primals) if primals else None

    for x_field, x_label, stem in (
        ("exact_calls", "exact oracle calls", "oracle_convergence"),
        ("elapsed_ms", "elapsed time [ms]", "runtime_convergence"),
    ):
        fig, axes = plt.subplots(1, 3, figsize=(12.0, 3.4))
        panels = (
            ("primal suboptimality", lambda r: None if r.primal is None else r.primal - best_dual),
            ("dual suboptimality", lambda r: None if best_primal is None else best_primal - r.dual),
            ("duality gap", lambda r: r.gap),
        )
        for ax, (title, extract) in zip(axes, panels):
            for name, records in runs.items():
                xs, ys = [], []
                for r in records:
                    y = extract(r)
                    if y is None:
                        continue
                    xs.append(getattr(r, x_field))
                    ys.append(max(y, _EPS_FLOOR))
                if xs:
                    ax.semilogy(xs, ys, label=name)
            ax.set_xlabel(x_label)
            ax.set_title(title)
            ax.grid(True, which="both", alpha=0.3)
        if axes[0].lines:
            axes[0].legend(fontsize=8)
        fig.tight_layout()
        figure_path = out_dir / f"{stem}.{fmt}"
        fig.savefig(figure_path, dpi=120)
        plt.close(fig)
        written.append(figure_path)
    return written
