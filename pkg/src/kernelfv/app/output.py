"""Snapshot writers (CSV and legacy VTK).

Primitive values are computed from cell averages, so they are second-order
diagnostics intended for plotting and comparison, not high-order point values.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..euler_state import cons_to_prim
from ..solver import Field

CSV_HEADER = ("x", "y", "rho", "u", "v", "p", "flag")
DIGITS = 9


@dataclass
class Snapshot:
    time: float
    nx: int
    ny: int
    x: np.ndarray  # (ny, nx)
    y: np.ndarray
    prim: np.ndarray  # (ny, nx, 4)
    flag: np.ndarray  # (ny, nx) of 0/1


def snapshot(fld: Field, gamma: float, flags: Optional[np.ndarray] = None) -> Snapshot:
    g = fld.grid
    X, Y = g.centers()
    prim = cons_to_prim(fld.interior, gamma)
    if flags is None:
        flags = np.zeros((g.ny, g.nx), dtype=np.uint8)
    return Snapshot(fld.t, g.nx, g.ny, X, Y, prim, (np.asarray(flags) != 0).astype(np.uint8))


def _fmt(v: float) -> str:
    return f"{v:.{DIGITS}g}"


def snapshot_name(step: int, ext: str = "csv") -> str:
    return f"snap_{step:06d}.{ext}"


def write_csv(snap: Snapshot, path) -> str:
    rows = np.column_stack([snap.x.ravel(), snap.y.ravel(), snap.prim.reshape(-1, 4)])
    flags = snap.flag.ravel()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r, f in zip(rows, flags):
            w.writerow([_fmt(v) for v in r] + [int(f)])
    return str(path)


def read_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Returns (columns x,y,rho,u,v,p as float array (n, 6), flags (n,))."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        data = [row for row in reader]
    arr = np.array([[float(v) for v in row[:6]] for row in data])
    flags = np.array([int(row[6]) for row in data], dtype=np.uint8)
    return arr, flags


def write_vtk(snap: Snapshot, path, dx: float, dy: float) -> str:
    """Legacy ASCII STRUCTURED_POINTS with cell centres as points."""
    n = snap.nx * snap.ny
    lines = [
        "# vtk DataFile Version 3.0",
        f"kernelfv snapshot t={_fmt(snap.time)}",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {snap.nx} {snap.ny} 1",
        f"ORIGIN {_fmt(snap.x[0, 0])} {_fmt(snap.y[0, 0])} 0",
        f"SPACING {_fmt(dx)} {_fmt(dy)} 1",
        f"POINT_DATA {n}",
    ]
    names = ("rho", "u", "v", "p")
    for k, name in enumerate(names):
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(_fmt(v) for v in snap.prim[..., k].ravel())
    lines.append("SCALARS flag int 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(str(int(v)) for v in snap.flag.ravel())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return str(path)


def write_snapshot(fld: Field, out_dir, step: int, gamma: float, fmt: str = "csv",
                   flags: Optional[np.ndarray] = None) -> list[str]:
    """Write ``snap_<step>.csv`` and/or ``.vtk`` into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    snap = snapshot(fld, gamma, flags)
    written = []
    if fmt in ("csv", "both"):
        written.append(write_csv(snap, os.path.join(out_dir, snapshot_name(step, "csv"))))
    if fmt in ("vtk", "both"):
        written.append(write_vtk(snap, os.path.join(out_dir, snapshot_name(step, "vtk")),
                                 fld.grid.dx, fld.grid.dy))
    return written
