"""Uniform Cartesian grid with a ghost halo and the cell-average field."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import geometry
from ..euler_state import InadmissibleStateError, prim_to_cons


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    dx: float
    dy: float
    origin: tuple[float, float] = (0.0, 0.0)
    ghost: int = 2

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one cell in each direction")
        if not self.dx > 0:
            raise ValueError("grid spacing must be positive")
        if abs(self.dx - self.dy) > 1e-12 * self.dx:
            raise ValueError(f"square cells required, got dx={self.dx} dy={self.dy}")
        if self.ghost < 1:
            raise ValueError("ghost width must be positive")

    @classmethod
    def from_extent(cls, nx: int, ny: int, xlim, ylim, ghost: int = 2) -> "Grid2D":
        dx = (xlim[1] - xlim[0]) / nx
        dy = (ylim[1] - ylim[0]) / ny
        return cls(nx, ny, dx, dy, (float(xlim[0]), float(ylim[0])), ghost)

    @property
    def delta(self) -> float:
        return self.dx

    @property
    def shape(self) -> tuple[int, int]:
        return self.ny, self.nx

    @property
    def padded_shape(self) -> tuple[int, int, int]:
        g = 2 * self.ghost
        return self.ny + g, self.nx + g, 4

    @property
    def interior(self) -> tuple[slice, slice]:
        g = self.ghost
        return slice(g, g + self.ny), slice(g, g + self.nx)

    def x_centers(self, ghosts: bool = False) -> np.ndarray:
        g = self.ghost if ghosts else 0
        return self.origin[0] + (np.arange(-g, self.nx + g) + 0.5) * self.dx

    def y_centers(self, ghosts: bool = False) -> np.ndarray:
        g = self.ghost if ghosts else 0
        return self.origin[1] + (np.arange(-g, self.ny + g) + 0.5) * self.dy

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid of interior cell centres, each shaped (ny, nx)."""
        return np.meshgrid(self.x_centers(), self.y_centers())

    @property
    def extent(self) -> tuple[float, float, float, float]:
        x0, y0 = self.origin
        return x0, x0 + self.nx * self.dx, y0, y0 + self.ny * self.dy


@dataclass
class Field:
    """Padded cell averages ``U[j, i, k]`` with ghost layers of width ``grid.ghost``."""

    grid: Grid2D
    U: np.ndarray
    t: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.U.shape != self.grid.padded_shape:
            raise ValueError(f"array shape {self.U.shape} does not match grid {self.grid.padded_shape}")

    @classmethod
    def zeros(cls, grid: Grid2D) -> "Field":
        return cls(grid, np.zeros(grid.padded_shape))

    @property
    def interior(self) -> np.ndarray:
        return self.U[self.grid.interior]

    def copy(self) -> "Field":
        return Field(self.grid, self.U.copy(), self.t, dict(self.meta))

    def totals(self) -> np.ndarray:
        """Domain integrals of the four conserved quantities."""
        return self.interior.sum(axis=(0, 1)) * self.grid.dx * self.grid.dy


def init_cell_averages(prim_ic, grid: Grid2D, n: int, gamma: float) -> Field:
    """Tensor Gauss-Legendre averages of the conservative state.

    ``prim_ic(x, y)`` returns primitives stacked on the last axis and must
    accept arrays.
    """
    pts, w = geometry.interior_quadrature_points(n)
    X, Y = grid.centers()
    acc = np.zeros((grid.ny, grid.nx, 4))
    for (xi, eta), wk in zip(pts, w):
        V = np.asarray(prim_ic(X + xi * grid.dx, Y + eta * grid.dy), dtype=float)
        try:
            acc += wk * prim_to_cons(V, gamma)
        except InadmissibleStateError as exc:
            raise InadmissibleStateError(f"initial condition: {exc}") from exc
    fld = Field.zeros(grid)
    fld.interior[...] = acc
    return fld


def mirror_average_x(fld: Field) -> None:
    """Force exact mirror symmetry about the vertical mid-line (in place)."""
    a = fld.interior
    b = a[:, ::-1].copy()
    b[..., 1] = -b[..., 1]
    sym = 0.5 * (a + b)
    a[...] = sym
