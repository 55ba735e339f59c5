"""Boundary conditions: ghost-cell filling and exterior Riemann states.

Exterior states at a physical boundary face are built from the interior
face states directly: reflecting flips the normal momentum, outflow copies,
fixed states overwrite.  With ghost width R this avoids reconstructing
inside the halo.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..euler_state import prim_to_cons
from .grid import Grid2D

SIDES = ("W", "E", "S", "N")
_NORMAL = {"W": 1, "E": 1, "S": 2, "N": 2}


class BoundaryCondition:
    kind = "base"

    def fill(self, U: np.ndarray, grid: Grid2D, side: str) -> None:
        raise NotImplementedError

    def exterior(self, inner: np.ndarray, side: str) -> np.ndarray:
        """Exterior states from interior face states shaped (n_faces, R, 4)."""
        raise NotImplementedError

    def prepare(self, grid: Grid2D, face_nodes: np.ndarray, gamma: float, side: str) -> None:
        """Hook for conditions that cache face or ghost data."""


def _ghost_slices(grid: Grid2D, side: str, k: int):
    """(ghost index, nearest interior index, mirrored interior index) for layer k >= 0."""
    g = grid.ghost
    if side == "W":
        return g - 1 - k, g, g + k
    if side == "E":
        n = grid.nx
        return g + n + k, g + n - 1, g + n - 1 - k
    if side == "S":
        return g - 1 - k, g, g + k
    n = grid.ny
    return g + n + k, g + n - 1, g + n - 1 - k


def _put(U, grid, side, dst, src_arr):
    g = grid.ghost
    if side in ("W", "E"):
        U[g:g + grid.ny, dst] = src_arr
    else:
        U[dst, :] = src_arr


def _get(U, grid, side, src):
    g = grid.ghost
    if side in ("W", "E"):
        return U[g:g + grid.ny, src]
    return U[src, :]


class Periodic(BoundaryCondition):
    kind = "periodic"

    def fill(self, U, grid, side):
        g = grid.ghost
        for k in range(g):
            dst, _, _ = _ghost_slices(grid, side, k)
            if side == "W":
                src = g + grid.nx - 1 - k
            elif side == "E":
                src = g + k
            elif side == "S":
                src = g + grid.ny - 1 - k
            else:
                src = g + k
            _put(U, grid, side, dst, _get(U, grid, side, src))

    def exterior(self, inner, side):
        raise RuntimeError("periodic exterior states come from the partner face")


class Outflow(BoundaryCondition):
    kind = "outflow"

    def fill(self, U, grid, side):
        for k in range(grid.ghost):
            dst, near, _ = _ghost_slices(grid, side, k)
            _put(U, grid, side, dst, _get(U, grid, side, near))

    def exterior(self, inner, side):
        return inner.copy()


class Reflecting(BoundaryCondition):
    kind = "reflecting"

    def fill(self, U, grid, side):
        c = _NORMAL[side]
        for k in range(grid.ghost):
            dst, _, mir = _ghost_slices(grid, side, k)
            vals = _get(U, grid, side, mir).copy()
            vals[..., c] = -vals[..., c]
            _put(U, grid, side, dst, vals)

    def exterior(self, inner, side):
        out = inner.copy()
        c = _NORMAL[side]
        out[..., c] = -out[..., c]
        return out


def _boundary_coords(grid: Grid2D, side: str, offsets: np.ndarray):
    """Coordinates along a side at cell centres shifted by ``offsets`` (unit cells)."""
    x0, x1, y0, y1 = grid.extent
    if side in ("W", "E"):
        t = grid.y_centers()[:, None] + offsets[None, :] * grid.dy
        x = np.full_like(t, x0 if side == "W" else x1)
        return x, t
    t = grid.x_centers()[:, None] + offsets[None, :] * grid.dx
    y = np.full_like(t, y0 if side == "S" else y1)
    return t, y


class Profile(BoundaryCondition):
    """Prescribed primitive state ``func(x, y)``; NaN density marks outflow points.

    The state is evaluated once on ghost-cell centres and on the boundary face
    quadrature points.
    """

    kind = "profile"

    def __init__(self, func: Callable[[np.ndarray, np.ndarray], np.ndarray]):
        self.func = func
        self._face = {}
        self._ghost = {}

    def _eval(self, x, y, gamma):
        V = np.asarray(self.func(x, y), dtype=float)
        V = np.broadcast_to(V, x.shape + (4,)).copy()
        fixed = np.isfinite(V[..., 0])
        U = np.full_like(V, np.nan)
        if np.any(fixed):
            U[fixed] = prim_to_cons(V[fixed], gamma)
        return U

    def prepare(self, grid, face_nodes, gamma, side):
        x, y = _boundary_coords(grid, side, face_nodes)
        self._face[side] = self._eval(x, y, gamma)
        ghosts = []
        for k in range(grid.ghost):
            dst, _, _ = _ghost_slices(grid, side, k)
            if side in ("W", "E"):
                gx = grid.origin[0] + (dst - grid.ghost + 0.5) * grid.dx
                gy = grid.y_centers()
                ghosts.append(self._eval(np.full_like(gy, gx), gy, gamma))
            else:
                gy = grid.origin[1] + (dst - grid.ghost + 0.5) * grid.dy
                gx = grid.x_centers(ghosts=True)
                ghosts.append(self._eval(gx, np.full_like(gx, gy), gamma))
        self._ghost[side] = ghosts

    def fill(self, U, grid, side):
        if side not in self._ghost:
            raise RuntimeError("boundary condition used before prepare()")
        for k in range(grid.ghost):
            dst, near, _ = _ghost_slices(grid, side, k)
            fixed = self._ghost[side][k]
            vals = _get(U, grid, side, near).copy()
            mask = np.isfinite(fixed[..., 0])
            vals[mask] = fixed[mask]
            _put(U, grid, side, dst, vals)

    def exterior(self, inner, side):
        fixed = self._face[side]
        out = inner.copy()
        mask = np.isfinite(fixed[..., 0])
        out[mask] = fixed[mask]
        return out


class Dirichlet(Profile):
    """Fixed primitive state, either constant or a function of position."""

    kind = "dirichlet"

    def __init__(self, state):
        if callable(state):
            func = state
        else:
            V = np.asarray(state, dtype=float)
            if V.shape != (4,):
                raise ValueError("dirichlet state must be (rho, u, v, p)")
            func = lambda x, y: np.broadcast_to(V, np.shape(x) + (4,))  # noqa: E731
        super().__init__(func)


def slit_inflow(jet_prim, half_width: float = 0.05, center: float = 0.0) -> Profile:
    """Jet state where |x - center| < half_width (strict), outflow elsewhere."""
    jet = np.asarray(jet_prim, dtype=float)

    def func(x, y):
        V = np.full(np.shape(x) + (4,), np.nan)
        inside = (np.asarray(x) - center) ** 2 < half_width ** 2
        V[inside] = jet
        return V

    bc = Profile(func)
    bc.kind = "slit"
    return bc


@dataclass
class BoundarySet:
    W: BoundaryCondition
    E: BoundaryCondition
    S: BoundaryCondition
    N: BoundaryCondition

    def __post_init__(self):
        if isinstance(self.W, Periodic) != isinstance(self.E, Periodic):
            raise ValueError("periodic boundaries must be paired (W/E)")
        if isinstance(self.S, Periodic) != isinstance(self.N, Periodic):
            raise ValueError("periodic boundaries must be paired (S/N)")

    @property
    def periodic_x(self) -> bool:
        return isinstance(self.W, Periodic)

    @property
    def periodic_y(self) -> bool:
        return isinstance(self.S, Periodic)

    def side(self, name: str) -> BoundaryCondition:
        return getattr(self, name)

    def prepare(self, grid: Grid2D, face_nodes: np.ndarray, gamma: float) -> None:
        for s in SIDES:
            self.side(s).prepare(grid, face_nodes, gamma, s)

    def fill(self, U: np.ndarray, grid: Grid2D) -> None:
        # x sides on interior rows first, then y sides over full padded rows (fills corners)
        for s in SIDES:
            self.side(s).fill(U, grid, s)
