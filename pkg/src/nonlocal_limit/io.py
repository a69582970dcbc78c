"""CSV persistence for snapshots and convergence tables.

Numbers are written with 17 significant digits, which round-trips every
double exactly; zero (of either sign) is written as ``0``.  Lines end in LF.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core_model import CellField, Grid1D
from .errors import ParseError
from .nonlocal_operator import FaceField
from .results import RunResult

SNAPSHOT_HEADER = ("x", "q", "w")
TABLE_HEADER = ("eta", "l1_q", "l1_w", "linf_max", "entropy_min")


def fmt(value: float) -> str:
    value = float(value)
    if value == 0.0:
        return "0"
    return format(value, ".17g")


def _write_rows(path, header: Sequence[str], rows) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_field_csv(path, q: CellField, w: Optional[FaceField] = None) -> None:
    """One row per cell: center, cell value, and W at the cell's right face."""
    x = q.grid.centers
    if w is None:
        rows = ((fmt(xi), fmt(qi), "") for xi, qi in zip(x, q.values))
    else:
        rows = ((fmt(xi), fmt(qi), fmt(wi)) for xi, qi, wi in zip(x, q.values, w.at_cells()))
    _write_rows(path, SNAPSHOT_HEADER, rows)


def write_snapshot_csv(result: RunResult, t: float, path) -> None:
    write_field_csv(path, result.snapshot(t), result.w_snapshot(t))


def _read_rows(path, header: Sequence[str]) -> List[List[str]]:
    path = Path(path)
    with path.open(newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != tuple(header):
        raise ParseError(f"expected header {','.join(header)}", 1, path)
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(row)}", lineno, path)
    return rows[1:]


def _floats(column: Sequence[str], path, first_line: int = 2) -> np.ndarray:
    out = np.empty(len(column))
    for k, tok in enumerate(column):
        try:
            out[k] = float(tok)
        except ValueError:
            raise ParseError(f"not a number: {tok!r}", first_line + k, path) from None
    return out


def read_snapshot_csv(path) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    """Return (x, q, w); w is None when the column is empty (local runs)."""
    rows = _read_rows(path, SNAPSHOT_HEADER)
    if len(rows) < 2:
        raise ParseError("snapshot needs at least two cells", None, path)
    cols = list(zip(*rows))
    x = _floats(cols[0], path)
    q = _floats(cols[1], path)
    if all(tok == "" for tok in cols[2]):
        return x, q, None
    return x, q, _floats(cols[2], path)


def grid_from_centers(x: np.ndarray) -> Grid1D:
    """Uniform grid whose cell centers are x (to round-off)."""
    n = x.size
    dx = (x[-1] - x[0]) / (n - 1)
    if not np.allclose(np.diff(x), dx, rtol=1e-6, atol=0.0):
        raise ParseError("cell centers are not uniformly spaced")
    return Grid1D(float(x[0] - 0.5 * dx), float(x[-1] + 0.5 * dx), n)


def read_field_csv(path) -> CellField:
    x, q, _ = read_snapshot_csv(path)
    return CellField(grid_from_centers(x), q)


def write_table_csv(table, path) -> None:
    rows = (
        (fmt(r.eta), fmt(r.l1_q), fmt(r.l1_w), fmt(r.linf_max), fmt(r.entropy_min))
        for r in table.rows
    )
    _write_rows(path, TABLE_HEADER, rows)


def read_table_csv(path) -> np.ndarray:
    """Table as an (n_rows, 5) array in header order."""
    rows = _read_rows(path, TABLE_HEADER)
    return np.array([_floats(row, path) for row in rows]).reshape(-1, len(TABLE_HEADER))
