"""Semi-discrete operator L(U) for the finite volume scheme."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .. import geometry
from ..euler_state import InadmissibleStateError
from ..kernel_recon import KernelConfig, ReconstructionSet, linear_weights, precompute
from ..limiters import FLATTENER_KF, KAPPA, KXRCF_M
from ..weno import EPSILON
from . import kernels
from .boundary import BoundarySet
from .grid import Field, Grid2D


@dataclass
class SchemeOptions:
    radius: int = 2
    ell_over_delta: float = 5.0
    riemann: str = "hllc"
    kxrcf_enabled: bool = True
    kxrcf_m: float = KXRCF_M
    kappa: float = KAPPA
    flattener_kf: float = FLATTENER_KF
    epsilon: float = EPSILON
    gamma_hi: float = 0.8
    gamma_lo: float = 0.8
    positivity: bool = True
    # limit reconstructed states at interior nodes too; None leaves it to the problem
    interior_limiting: Optional[bool] = None

    def __post_init__(self):
        if self.radius not in geometry.SUPPORTED_RADII:
            raise ValueError(f"unsupported radius {self.radius}")
        if self.riemann not in ("hll", "hllc"):
            raise ValueError(f"unknown Riemann solver {self.riemann!r}")


@dataclass
class Viscosity:
    Re: float
    Pr: float = 0.71
    Ma: float = 1.0

    def temperature_scale(self, gamma: float) -> float:
        return gamma * self.Ma * self.Ma


@dataclass
class GravitySource:
    """(0, 0, rho, rho v) / Fr^2, exact from cell averages."""

    Fr: float = 1.0

    def average(self, U: np.ndarray) -> np.ndarray:
        inv = 1.0 / (self.Fr * self.Fr)
        out = np.zeros_like(U)
        out[..., 2] = U[..., 0] * inv
        out[..., 3] = U[..., 2] * inv
        return out


@dataclass
class PointSource:
    """User source ``func(x, y, U) -> S`` integrated over interior nodes."""

    func: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass
class RhsStats:
    flagged: int = 0
    cells: int = 1
    evaluations: int = 0

    @property
    def flagged_fraction(self) -> float:
        return self.flagged / self.cells


def slot_tables(stencil) -> tuple[np.ndarray, np.ndarray]:
    """Orbit rows per (sub)stencil, concatenated.

    Returns ``slot`` (n_rows, 4) of full-stencil indices, with N0 standing for
    an absent member, and ``qoff`` so rows qoff[q]..qoff[q+1] belong to q.
    """
    full = geometry.summation_orbits(stencil)
    N0 = len(stencil.full)
    rows = []
    qoff = [0]
    for q in range(len(stencil.stencils)):
        members = set(stencil.member_indices(q).tolist())
        for row in full:
            kept = [k if (k >= 0 and k in members) else N0 for k in row]
            if any(k < N0 for k in kept):
                rows.append(kept)
        qoff.append(len(rows))
    return np.array(rows, dtype=np.int64), np.array(qoff, dtype=np.int64)


def slot_coefficients(vectors: np.ndarray, slot: np.ndarray, qoff: np.ndarray) -> np.ndarray:
    """Rearrange padded vectors (n_st, F, N0) into slot layout (F, n_rows, 4)."""
    n_st, F, N0 = vectors.shape
    ext = np.concatenate([vectors, np.zeros((n_st, F, 1))], axis=2)
    out = np.zeros((F, slot.shape[0], 4))
    for q in range(n_st):
        for t in range(qoff[q], qoff[q + 1]):
            out[:, t, :] = ext[q][:, slot[t]]
    return out


class Scheme:
    """Kernel-based WENO-AO finite volume discretisation on one grid."""

    def __init__(self, grid: Grid2D, bcs: BoundarySet, gamma: float = 1.4,
                 options: Optional[SchemeOptions] = None,
                 viscosity: Optional[Viscosity] = None,
                 sources: tuple = (),
                 rset: Optional[ReconstructionSet] = None):
        self.options = options or SchemeOptions()
        opts = self.options
        if grid.ghost != opts.radius:
            raise ValueError(f"grid ghost width {grid.ghost} must equal the stencil radius {opts.radius}")
        self.grid = grid
        self.bcs = bcs
        self.gamma = float(gamma)
        self.viscosity = viscosity
        self.sources = tuple(sources)
        self.rset = rset or precompute(opts.radius, KernelConfig(opts.ell_over_delta))
        R = opts.radius
        self.R = R
        self.interior_nodes = len(self.sources) > 0 or bool(opts.interior_limiting)
        rs = self.rset
        vecs = rs.point_vectors
        if self.interior_nodes:
            vecs = np.concatenate([vecs, rs.interior_vectors], axis=1)
        self.r_all = np.ascontiguousarray(vecs)
        self.offs = rs.stencil.offsets_array(0)
        self.center = rs.stencil.index_map()[geometry.CellOffset(0, 0)]
        self.slot, self.qoff = slot_tables(rs.stencil)
        self.slot0 = np.ascontiguousarray(self.slot[:self.qoff[1]])
        self.coef = slot_coefficients(self.r_all, self.slot, self.qoff)
        self.dcoef = slot_coefficients(rs.deriv_vectors, self.slot, self.qoff)
        order = np.array([a1 + a2 for a1, a2 in rs.derivs], dtype=float)
        self.dscale = grid.dx ** (2.0 * order)
        self.lin_w = linear_weights(opts.gamma_hi, opts.gamma_lo)
        self.face_w = np.ascontiguousarray(rs.face_weights)
        self.int_w = rs.interior_weights
        self.solver_id = kernels.HLL if opts.riemann == "hll" else kernels.HLLC
        self.thresh = grid.dx ** opts.kxrcf_m
        self.n_points = self.r_all.shape[1]
        bcs.prepare(grid, rs.face_points[:R, 1], self.gamma)
        ny, nx = grid.ny, grid.nx
        self._S = np.empty((ny, nx, self.n_points, 4))
        self._flags = np.zeros((ny, nx), dtype=np.uint8)
        self._Fx = np.empty((ny, nx + 1, 4))
        self._Fy = np.empty((ny + 1, nx, 4))
        self.stats = RhsStats(cells=nx * ny)

    # -- pipeline pieces ----------------------------------------------------

    def fill_ghost(self, U: np.ndarray) -> np.ndarray:
        self.bcs.fill(U, self.grid)
        return U

    def check_admissible(self, U: np.ndarray) -> None:
        g = self.grid
        bad = kernels.check_averages(U, g.ghost, g.nx, g.ny, self.gamma)
        if bad:
            raise InadmissibleStateError(f"{bad} cell averages with non-positive density or pressure")

    def reconstruct_states(self, U: np.ndarray):
        """Face (and optional interior) states after flagging, WENO and limiting.

        Ghost cells must be filled.  Returns the state array and the flags.
        """
        g = self.grid
        opts = self.options
        S = self._S
        flags = self._flags
        kernels.recon_unlimited(U, g.ghost, g.nx, g.ny, self.offs, self.coef, self.slot0,
                                self.slot0.shape[0], S)
        n_flag = kernels.kxrcf_sweep(U, g.ghost, g.nx, g.ny, S, self.R, self.thresh, self.gamma,
                                     self.bcs.periodic_x, self.bcs.periodic_y,
                                     opts.kxrcf_enabled, flags)
        if n_flag:
            kernels.weno_sweep(U, g.ghost, g.nx, g.ny, self.offs, self.center, self.coef,
                               self.dcoef, self.slot, self.qoff, self.dscale, self.lin_w,
                               opts.epsilon, self.gamma, flags, S)
        if opts.positivity:
            status = kernels.positivity_sweep(U, g.ghost, g.nx, g.ny, S, opts.kappa,
                                              opts.flattener_kf, self.gamma)
            if status != kernels.STATUS_OK:
                raise InadmissibleStateError("positivity limiter met an inadmissible cell average")
        self.stats.flagged = int(n_flag)
        return S, flags

    def exterior_states(self, S: np.ndarray):
        R = self.R
        dummy_x = np.zeros((self.grid.ny, R, 4))
        dummy_y = np.zeros((self.grid.nx, R, 4))
        out = {}
        for side, sl, dummy in (("W", (slice(None), 0, slice(0, R)), dummy_x),
                                ("E", (slice(None), -1, slice(R, 2 * R)), dummy_x),
                                ("S", (0, slice(None), slice(2 * R, 3 * R)), dummy_y),
                                ("N", (-1, slice(None), slice(3 * R, 4 * R)), dummy_y)):
            bc = self.bcs.side(side)
            if bc.kind == "periodic":
                out[side] = dummy
            else:
                out[side] = np.ascontiguousarray(bc.exterior(S[sl], side))
        return out

    def source_average(self, U: np.ndarray, S: np.ndarray) -> Optional[np.ndarray]:
        if not self.sources:
            return None
        g = self.grid
        Ui = U[g.interior]
        total = np.zeros_like(Ui)
        for src in self.sources:
            if isinstance(src, GravitySource):
                total += src.average(Ui)
            else:
                X, Y = g.centers()
                nodes = self.rset.interior_points
                acc = np.zeros_like(Ui)
                for k, (xi, eta) in enumerate(nodes):
                    states = S[:, :, 4 * self.R + k, :]
                    acc += self.int_w[k] * np.asarray(
                        src.func(X + xi * g.dx, Y + eta * g.dy, states), dtype=float)
                total += acc
        return total

    def compute_rhs(self, U: np.ndarray) -> np.ndarray:
        """dU/dt for the interior cells; fills the ghost layers of ``U`` in place."""
        g = self.grid
        self.check_admissible(U)
        self.fill_ghost(U)
        S, _ = self.reconstruct_states(U)
        ext = self.exterior_states(S)
        kernels.flux_sweep(S, g.nx, g.ny, self.R, ext["W"], ext["E"], ext["S"], ext["N"],
                           self.bcs.periodic_x, self.bcs.periodic_y, self.face_w,
                           self.solver_id, self.gamma, self._Fx, self._Fy)
        if self.viscosity is not None:
            vis = self.viscosity
            kernels.viscous_sweep(U, g.ghost, g.nx, g.ny, g.dx, vis.Re, vis.Pr,
                                  vis.temperature_scale(self.gamma), self.gamma, self._Fx, self._Fy)
        out = np.empty((g.ny, g.nx, 4))
        kernels.accumulate(self._Fx, self._Fy, g.nx, g.ny, g.dx, out)
        src = self.source_average(U, S)
        if src is not None:
            out += src
        if not np.all(np.isfinite(out)):
            raise InadmissibleStateError("non-finite right-hand side")
        self.stats.evaluations += 1
        return out

    def rhs_field(self, fld: Field) -> np.ndarray:
        return self.compute_rhs(fld.U)

    def max_signal_speed(self, U: np.ndarray) -> float:
        g = self.grid
        return float(kernels.max_signal_speed(U, g.ghost, g.nx, g.ny, self.gamma))

    @property
    def flags(self) -> np.ndarray:
        """Troubled-cell flags (ny, nx) from the latest evaluation."""
        return self._flags.copy()

    @property
    def fluxes(self) -> tuple[np.ndarray, np.ndarray]:
        return self._Fx, self._Fy
