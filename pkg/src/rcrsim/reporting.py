"""Artifact writers: fixed-format CSV/JSON and the sweep heat map SVG."""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .experiments import CellResult, SweepGrid

SIG_DIGITS = 6

BAND_COLORS = {
    "gt999": "#3a6fd8",   # > 99.9 %
    "gt99": "#4cae4c",    # > 99 %
    "gt90": "#f0a030",    # > 90 %
    "le90": "#c0c0c0",
}

SWEEP_COLUMNS = ("delta_A", "delta_B", "Cplus", "tau_ns", "band")


def fmt(value: float) -> str:
    """Fixed six-significant-digit rendering used in every data file."""
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{value:.{SIG_DIGITS}g}"


def _round_sig(value: float) -> float:
    return float(fmt(value))


def jsonable(obj):
    """Recursively convert results to JSON types with fixed float precision."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return None if math.isnan(value) else _round_sig(value)
    return obj


def write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_sweep_csv(path: str, grid: SweepGrid) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for cell in grid.cells:
            writer.writerow([fmt(cell.delta_a), fmt(cell.delta_b),
                             fmt(cell.cplus), fmt(cell.tau * 1e9),
                             cell.band])


def read_sweep_csv(path: str) -> SweepGrid:
    """Rebuild a SweepGrid from its CSV rendering (six-digit precision)."""
    cells = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != SWEEP_COLUMNS:
            raise ValueError(f"unexpected sweep CSV header {header}")
        for row in reader:
            da, db, cplus, tau_ns, band = row
            cells.append(CellResult(
                delta_a=float(da), delta_b=float(db), cplus=float(cplus),
                tau=float(tau_ns) * 1e-9, band=band,
                ill_defined=band == "" and math.isnan(float(cplus))))
    delta_a_values = tuple(dict.fromkeys(c.delta_a for c in cells))
    delta_b_values = tuple(dict.fromkeys(c.delta_b for c in cells))
    return SweepGrid(delta_a_values=delta_a_values,
                     delta_b_values=delta_b_values, cells=tuple(cells))


def write_trace_csv(path: str, columns: dict[str, np.ndarray]) -> None:
    """Generic trace table, e.g. times plus populations or envelopes."""
    names = list(columns)
    rows = zip(*(np.asarray(columns[n]).ravel() for n in names))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in rows:
            writer.writerow([fmt(float(v)) for v in row])


def sweep_svg(grid: SweepGrid, cell_px: int = 48, margin: int = 70) -> str:
    """Standalone SVG heat map of a detuning sweep.

    Cells are colored by band; ill-defined or failed cells stay blank.
    delta_A runs along x, delta_B along y (increasing upward).
    """
    nx, ny = len(grid.delta_a_values), len(grid.delta_b_values)
    width = margin + nx * cell_px + 20
    height = margin + ny * cell_px + 20
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        '<style>text { font-family: sans-serif; font-size: 12px; }</style>',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    x0, y0 = margin, 20
    for i, da in enumerate(grid.delta_a_values):
        for j, db in enumerate(grid.delta_b_values):
            cell = grid.cell(i, j)
            x = x0 + i * cell_px
            y = y0 + (ny - 1 - j) * cell_px
            color = BAND_COLORS.get(cell.band)
            if color is None:
                parts.append(
                    f'<rect x="{x}" y="{y}" width="{cell_px}" '
                    f'height="{cell_px}" fill="none" stroke="#888"/>')
                continue
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell_px}" '
                f'height="{cell_px}" fill="{color}" stroke="#444"/>')
            parts.append(
                f'<text x="{x + cell_px / 2}" y="{y + cell_px / 2 + 4}" '
                f'text-anchor="middle">{100 * cell.cplus:.1f}</text>')
        parts.append(
            f'<text x="{x0 + i * cell_px + cell_px / 2}" '
            f'y="{y0 + ny * cell_px + 16}" text-anchor="middle">'
            f'{fmt(da)}</text>')
    for j, db in enumerate(grid.delta_b_values):
        parts.append(
            f'<text x="{x0 - 8}" '
            f'y="{y0 + (ny - 1 - j) * cell_px + cell_px / 2 + 4}" '
            f'text-anchor="end">{fmt(db)}</text>')
    parts.append(
        f'<text x="{x0 + nx * cell_px / 2}" y="{height - 2}" '
        f'text-anchor="middle">delta_A</text>')
    parts.append('</svg>')
    return "\n".join(parts)


def write_sweep_svg(path: str, grid: SweepGrid, **kwargs) -> None:
    with open(path, "w") as fh:
        fh.write(sweep_svg(grid, **kwargs))
        fh.write("\n")
