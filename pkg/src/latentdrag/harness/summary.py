"""Seed-averaged cell summaries and the grid-level CSV."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

from ..errors import EmptyResults
from .grid import GridRun, npca_label

CSV_COLUMNS = (
    "npca",
    "layers",
    "lr",
    "iteration_total",
    "time_total",
    "ssim",
    "ssim_per_time",
    "converged",
)


@dataclass(frozen=True)
class CellSummary:
    n_pca: int | None
    layers: int
    learning_rate: float
    iteration_total: float
    time_total: float
    ssim: float
    ssim_per_time: float
    converged: bool  # False only when every seed exhausted the iteration cap
    n_seeds: int


def summarize(runs: list[GridRun]) -> list[CellSummary]:
    """Mean metrics per (layers, npca, lr) cell over its successful seeds."""
    cells: dict[tuple, list[GridRun]] = {}
    for run in runs:
        if run.record is None:
            continue
        cells.setdefault(run.cell, []).append(run)
    if not cells:
        raise EmptyResults("no successful runs to summarize")
    out: list[CellSummary] = []
    for key in sorted(cells, key=_cell_sort_key):
        members = cells[key]
        records = [m.record for m in members]
        n = len(records)
        mean_time = sum(r.t_total for r in records) / n
        mean_ssim = sum(r.ssim for r in records) / n
        out.append(
            CellSummary(
                n_pca=key[1],
                layers=key[0],
                learning_rate=key[2],
                iteration_total=sum(r.iterations for r in records) / n,
                time_total=mean_time,
                ssim=mean_ssim,
                ssim_per_time=mean_ssim / mean_time if mean_time > 0 else math.nan,
                converged=any(r.converged for r in records),
                n_seeds=n,
            )
        )
    return out


def _cell_sort_key(cell: tuple) -> tuple:
    layers, n_pca, lr = cell
    return (layers, n_pca is not None, n_pca if n_pca is not None else -1, lr)


def write_summary_csv(summaries: list[CellSummary], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for cell in summaries:
            writer.writerow(
                [
                    npca_label(cell.n_pca),
                    cell.layers,
                    f"{cell.learning_rate:g}",
                    f"{cell.iteration_total:.3f}",
                    f"{cell.time_total:.6f}",
                    f"{cell.ssim:.6f}",
                    f"{cell.ssim_per_time:.6f}",
                    str(cell.converged).lower(),
                ]
            )


def format_summary_table(summaries: list[CellSummary]) -> str:
    """Fixed-width table; capped cells carry a non-converged marker."""
    header = f"{'npca':>8} {'layers':>6} {'lr':>7} {'iters':>8} {'time_s':>9} {'ssim':>7} {'ssim/t':>9}"
    lines = [header, "-" * len(header)]
    for cell in summaries:
        iters = f"{cell.iteration_total:.0f}"
        if not cell.converged:
            iters += " (x)"
        lines.append(
            f"{npca_label(cell.n_pca):>8} {cell.layers:>6} {cell.learning_rate:>7g} "
            f"{iters:>8} {cell.time_total:>9.3f} {cell.ssim:>7.3f} "
            f"{cell.ssim_per_time * 100:>8.3f}e-2"
        )
    return "\n".join(lines)


def read_summaries_csv(path) -> list[CellSummary]:
    rows = list(csv.DictReader(Path(path).open()))
    out = []
    for row in rows:
        out.append(
            CellSummary(
                n_pca=None if row["npca"] == "regular" else int(row["npca"]),
                layers=int(row["layers"]),
                learning_rate=float(row["lr"]),
                iteration_total=float(row["iteration_total"]),
                time_total=float(row["time_total"]),
                ssim=float(row["ssim"]),
                ssim_per_time=float(row["ssim_per_time"]),
                converged=row["converged"] == "true",
                n_seeds=0,
            )
        )
    return out
