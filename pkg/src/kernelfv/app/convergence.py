"""L1 errors, experimental orders of convergence and the refinement study driver."""
from __future__ import annotations

import csv
import io
import math
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ..problems import ProblemSpec, get_problem
from ..solver import Field, Grid2D, SchemeOptions, advance_to, init_cell_averages

REF_QUAD_POINTS = 5


class GridMismatchError(ValueError):
    pass


def _same_grid(a: Grid2D, b: Grid2D) -> bool:
    return (a.nx, a.ny) == (b.nx, b.ny) and np.allclose((a.dx, a.dy), (b.dx, b.dy)) \
        and np.allclose(a.origin, b.origin)


def l1_error(fld: Field, reference: Union[Field, np.ndarray, Callable], gamma: float = 1.4,
             normalize: bool = False) -> float:
    """Sum over cells of |<rho> - <rho_ref>| * dx * dy.

    ``reference`` may be a field on the same grid, an array of interior
    averages (ny, nx, 4) or a pointwise primitive function ``f(x, y)``.
    With ``normalize`` the result is divided by the domain area.
    """
    g = fld.grid
    if isinstance(reference, Field):
        if not _same_grid(g, reference.grid):
            raise GridMismatchError("fields live on different grids")
        ref = reference.interior
    elif callable(reference):
        ref = init_cell_averages(reference, g, REF_QUAD_POINTS, gamma).interior
    else:
        ref = np.asarray(reference, dtype=float)
        if ref.shape[:2] != (g.ny, g.nx):
            raise GridMismatchError(f"reference shape {ref.shape} does not match grid {(g.ny, g.nx)}")
    rho_ref = ref[..., 0] if ref.ndim == 3 else ref
    err = float(np.sum(np.abs(fld.interior[..., 0] - rho_ref))) * g.dx * g.dy
    if normalize:
        err /= g.nx * g.dx * g.ny * g.dy
    return err


def eoc(e_coarse: float, e_refined: float) -> float:
    if not (e_coarse > 0 and e_refined > 0):
        raise ValueError("errors must be positive")
    return math.log(e_coarse / e_refined) / math.log(2.0)


@dataclass
class ConvergenceTable:
    problem: str
    radius: int
    levels: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    eocs: list = field(default_factory=list)  # None for the first level
    steps: list = field(default_factory=list)
    seconds: list = field(default_factory=list)

    def add(self, n: int, err: float, steps: int = 0, seconds: float = 0.0) -> None:
        self.eocs.append(eoc(self.errors[-1], err) if self.errors else None)
        self.levels.append(n)
        self.errors.append(err)
        self.steps.append(steps)
        self.seconds.append(seconds)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "l1_error", "eoc", "steps", "seconds"])
        for n, e, o, s, t in zip(self.levels, self.errors, self.eocs, self.steps, self.seconds):
            w.writerow([n, f"{e:.6e}", "" if o is None else f"{o:.4f}", s, f"{t:.2f}"])
        return buf.getvalue()

    def to_text(self) -> str:
        out = [f"{self.problem}  R={self.radius}",
               f"{'grid':>10} {'L1 error':>12} {'EOC':>7}"]
        for n, e, o in zip(self.levels, self.errors, self.eocs):
            out.append(f"{f'{n}x{n}':>10} {e:12.4e} {'' if o is None else f'{o:7.2f}':>7}")
        return "\n".join(out) + "\n"


def exact_reference(problem: ProblemSpec) -> Callable[[Field], np.ndarray]:
    """Cell averages of the exact solution at ``problem.t_final``.

    Only problems that return to their initial state (the periodic vortex
    after one domain crossing) are supported.
    """
    if problem.name != "isentropic_vortex":
        raise ValueError(f"no exact solution available for {problem.name!r}")
    return lambda fld: problem.initial_field(fld.grid).interior


def run_convergence_suite(problem: Union[str, ProblemSpec], radius: int, levels: Sequence[int],
                          out_dir: Optional[str] = None, options: Optional[SchemeOptions] = None,
                          normalize: bool = False, **control_overrides) -> ConvergenceTable:
    """Run ``problem`` on n x n grids and tabulate L1 density errors and EOCs."""
    pb = get_problem(problem) if isinstance(problem, str) else problem
    ref = exact_reference(pb)
    table = ConvergenceTable(pb.name, radius)
    for n in levels:
        t0 = time.perf_counter()
        opts = options or SchemeOptions(radius=radius, riemann=pb.riemann)
        scheme, fld = pb.setup(n, n, options=opts, radius=radius)
        fld, stats = advance_to(scheme, fld, pb.t_final, pb.controls(**control_overrides))
        err = l1_error(fld, ref(fld), pb.gamma, normalize=normalize)
        table.add(n, err, stats.steps, time.perf_counter() - t0)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        stem = os.path.join(out_dir, f"convergence_{pb.name}_R{radius}")
        with open(stem + ".csv", "w", encoding="utf-8") as fh:
            fh.write(table.to_csv())
        with open(stem + ".txt", "w", encoding="utf-8") as fh:
            fh.write(table.to_text())
    return table
