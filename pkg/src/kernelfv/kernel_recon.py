"""Kernel-plus-monomial reconstruction vectors.

For a stencil of N unit cells the approximant is a squared-exponential kernel
expansion anchored at the cell centres plus a monomial tail.  Matching cell
averages and requiring the kernel coefficients to be orthogonal to the
monomials gives an (N+D) block system; solving its transpose against the
sample vector of one evaluation functional yields a vector ``r`` so that the
reconstructed value is simply ``r @ g``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
from numpy.polynomial import hermite
from scipy.special import erf

from . import geometry
from .geometry import StencilGeometry

RESIDUAL_TOL = 1e-9
REFINE_STEPS = 2


class SingularSystemError(RuntimeError):
    """The block system could not be solved to the required residual."""


@dataclass(frozen=True)
class KernelConfig:
    ell_over_delta: float = 5.0

    def __post_init__(self):
        if not self.ell_over_delta > 0:
            raise ValueError("ell_over_delta must be positive")


def se_kernel(x, y, ell: float):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = np.sum((x - y) ** 2, axis=-1)
    return np.exp(-r2 / (2.0 * ell * ell))


def avg_kernel_1d(center_offset, ell: float):
    """Integral of exp(-t^2 / 2 ell^2) over the unit interval centred at ``c``."""
    c = np.asarray(center_offset, dtype=float)
    s = ell * math.sqrt(2.0)
    return ell * math.sqrt(0.5 * math.pi) * (erf((c + 0.5) / s) - erf((c - 0.5) / s))


def build_Q(cells, ell: float) -> np.ndarray:
    """Q[h, l] = average over cell h of K(., x_l)."""
    cells = np.asarray(cells, dtype=float).reshape(-1, 2)
    dx = cells[:, None, 0] - cells[None, :, 0]
    dy = cells[:, None, 1] - cells[None, :, 1]
    return avg_kernel_1d(dx, ell) * avg_kernel_1d(dy, ell)


def build_P(cells, degree: int) -> np.ndarray:
    return geometry.monomial_average_matrix(cells, degree)


def point_sample_vectors(cells, x_star, ell: float, degree: int):
    cells = np.asarray(cells, dtype=float).reshape(-1, 2)
    x_star = np.asarray(x_star, dtype=float)
    T = se_kernel(x_star[None, :], cells, ell)
    S = np.array([x_star[0] ** a1 * x_star[1] ** a2
                  for a1, a2 in geometry.monomial_exponents(degree)])
    return T, S


def _gaussian_derivative_1d(n: int, a: np.ndarray, ell: float) -> np.ndarray:
    # d^n/dx^n exp(-(x - a)^2 / (2 ell^2)) evaluated at x = 0
    s = ell * math.sqrt(2.0)
    t = -a / s
    coef = np.zeros(n + 1)
    coef[n] = 1.0
    return (-1.0 / s) ** n * hermite.hermval(t, coef) * np.exp(-t * t)


def deriv_sample_vectors(cells, alpha, ell: float, degree: int):
    """Derivative functional at the origin applied to kernel and monomials."""
    cells = np.asarray(cells, dtype=float).reshape(-1, 2)
    a1, a2 = alpha
    D = (_gaussian_derivative_1d(a1, cells[:, 0], ell)
         * _gaussian_derivative_1d(a2, cells[:, 1], ell))
    S = np.array([
        float(math.factorial(a1) * math.factorial(a2)) if (b1, b2) == (a1, a2) else 0.0
        for b1, b2 in geometry.monomial_exponents(degree)
    ])
    return D, S


def _block_matrix(Q: np.ndarray, P: np.ndarray) -> np.ndarray:
    N, D = P.shape
    A = np.zeros((N + D, N + D))
    A[:N, :N] = Q.T
    A[:N, N:] = P
    A[N:, :N] = P.T
    return A


def solve_recon_vectors(Q, P, rhs_T, rhs_S) -> np.ndarray:
    """Solve the transposed block system for several right-hand sides.

    ``rhs_T`` is (N, k) and ``rhs_S`` is (D, k); returns r as (k, N).
    """
    N = Q.shape[0]
    A = _block_matrix(Q, P)
    rhs = np.vstack([np.atleast_2d(rhs_T.T).T, np.atleast_2d(rhs_S.T).T])
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            lu = scipy.linalg.lu_factor(A, check_finite=True)
    except (ValueError, scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
        raise SingularSystemError(str(exc)) from exc
    sol = scipy.linalg.lu_solve(lu, rhs)
    if not np.all(np.isfinite(sol)):
        raise SingularSystemError("block system solve produced non-finite values")
    # mixed-precision refinement: the flat kernel makes A ill-conditioned
    A_ext = A.astype(np.longdouble)
    rhs_ext = rhs.astype(np.longdouble)
    for _ in range(REFINE_STEPS):
        res = (rhs_ext - A_ext @ sol.astype(np.longdouble)).astype(float)
        sol = sol + scipy.linalg.lu_solve(lu, res)
    resid = np.max(np.abs(A @ sol - rhs))
    if not np.isfinite(resid) or resid > RESIDUAL_TOL:
        raise SingularSystemError(f"block system residual {resid:.3e} exceeds {RESIDUAL_TOL}")
    return sol[:N].T


def solve_recon_vector(Q, P, rhs_T, rhs_S) -> np.ndarray:
    return solve_recon_vectors(Q, P, np.asarray(rhs_T)[:, None], np.asarray(rhs_S)[:, None])[0]


def evaluate(r, g) -> float:
    r = np.asarray(r)
    g = np.asarray(g)
    if r.shape[-1] != g.shape[-1]:
        raise ValueError(f"length mismatch: {r.shape[-1]} vs {g.shape[-1]}")
    return r @ g


def derivative_indices(R: int) -> list[tuple[int, int]]:
    """Multi-indices with 0 < |alpha| <= R, graded lexicographic."""
    return geometry.monomial_exponents(R)[1:]


def linear_weights(gamma_hi: float = 0.8, gamma_lo: float = 0.8) -> np.ndarray:
    g = np.empty(geometry.N_SUBSTENCILS + 1)
    g[0] = gamma_hi
    g[1] = (1.0 - gamma_hi) * gamma_lo
    g[2:] = (1.0 - gamma_hi) * (1.0 - gamma_lo) / 4.0
    return g


@dataclass(frozen=True)
class ReconstructionSet:
    """Precomputed vectors, padded to full-stencil length.

    point_vectors:    (6, 4R, N0)   face quadrature points ordered W, E, S, N
    deriv_vectors:    (6, n_alpha, N0) at the cell centre
    interior_vectors: (6, R*R, N0)  tensor Gauss-Legendre nodes in the cell
    """

    stencil: StencilGeometry
    ell_over_delta: float
    face_points: np.ndarray
    interior_points: np.ndarray
    interior_weights: np.ndarray
    face_weights: np.ndarray
    point_vectors: np.ndarray
    deriv_vectors: np.ndarray
    interior_vectors: np.ndarray
    derivs: tuple
    gamma: np.ndarray

    @property
    def radius(self) -> int:
        return self.stencil.radius

    @property
    def n_stencils(self) -> int:
        return len(self.stencil.stencils)

    def vector(self, q: int, p: int) -> np.ndarray:
        """Point-value vector for (sub)stencil q restricted to its own cells."""
        return self.point_vectors[q, p, self.stencil.member_indices(q)]

    def deriv_vector(self, q: int, a: int) -> np.ndarray:
        return self.deriv_vectors[q, a, self.stencil.member_indices(q)]

    def counts(self) -> tuple[int, int]:
        n = self.n_stencils
        return n * self.point_vectors.shape[1], n * self.deriv_vectors.shape[1]


class _StencilSystem:
    def __init__(self, cells: np.ndarray, degree: int, ell: float):
        self.cells = cells
        self.degree = degree
        self.ell = ell
        self.Q = build_Q(cells, ell)
        self.P = build_P(cells, degree)

    def point_vectors(self, pts: np.ndarray) -> np.ndarray:
        T, S = zip(*(point_sample_vectors(self.cells, x, self.ell, self.degree) for x in pts))
        return solve_recon_vectors(self.Q, self.P, np.array(T).T, np.array(S).T)

    def deriv_vectors(self, alphas) -> np.ndarray:
        T, S = zip(*(deriv_sample_vectors(self.cells, a, self.ell, self.degree) for a in alphas))
        return solve_recon_vectors(self.Q, self.P, np.array(T).T, np.array(S).T)


def _symmetrize(raw: np.ndarray, stencil: StencilGeometry, point_perm: dict, sign: dict) -> np.ndarray:
    """Make vectors exactly mirror-consistent.

    ``raw`` is (6, n_pts, N0).  ``point_perm[m]`` permutes the evaluation
    functionals under mirror m and ``sign[m]`` is a per-functional sign
    (derivatives flip with odd powers).  Within each orbit the representative
    is averaged over its stabiliser with commutative pairwise sums and every
    other member is an exact signed permutation of it.
    """
    n_st, n_pts, _ = raw.shape
    cell_perm = {m: geometry.mirror_permutation(stencil, m) for m in geometry.MIRRORS}
    out = np.full_like(raw, np.nan)
    done = np.zeros((n_st, n_pts), dtype=bool)

    def image(vec, m, p):
        # (T_m v)[perm[k]] = s * v[k]  <=>  T_m v = s * v[perm]  (perm is an involution)
        return sign[m][p] * vec[cell_perm[m]]

    for q in range(n_st):
        for p in range(n_pts):
            if done[q, p]:
                continue
            stab = [m for m in geometry.MIRRORS
                    if geometry.STENCIL_MIRROR[m][q] == q and point_perm[m][p] == p]
            v = raw[q, p]
            if len(stab) == 4:
                v = 0.25 * ((v + image(v, "x", p)) + (image(v, "y", p) + image(v, "xy", p)))
            elif len(stab) == 2:
                h = stab[1]
                v = 0.5 * (v + image(v, h, p))
            for m in geometry.MIRRORS:
                qq = geometry.STENCIL_MIRROR[m][q]
                pp = point_perm[m][p]
                if not done[qq, pp]:
                    out[qq, pp] = image(v, m, p)
                    done[qq, pp] = True
    return out


def precompute(R: int, config: KernelConfig | None = None) -> ReconstructionSet:
    """Build every point-value and derivative vector for radius R (one-time cost)."""
    config = config or KernelConfig()
    stencil = geometry.build_stencil(R)
    ell = config.ell_over_delta
    fps = geometry.face_quadrature_points(R)
    face_pts = fps.points
    int_pts, int_w = geometry.interior_quadrature_points(R)
    alphas = derivative_indices(R)
    N0 = len(stencil.full)
    n_st = len(stencil.stencils)

    pv = np.zeros((n_st, len(face_pts), N0))
    iv = np.zeros((n_st, len(int_pts), N0))
    dv = np.zeros((n_st, len(alphas), N0))
    for q, cells in enumerate(stencil.stencils):
        members = stencil.member_indices(q)
        system = _StencilSystem(np.array(cells, dtype=float), stencil.degrees[q], ell)
        pv[q][:, members] = system.point_vectors(face_pts)
        iv[q][:, members] = system.point_vectors(int_pts)
        dv[q][:, members] = system.deriv_vectors(alphas)

    def perms(points):
        return {m: geometry.point_permutation(points, m) for m in geometry.MIRRORS}

    ones = {m: np.ones(len(face_pts)) for m in geometry.MIRRORS}
    pv = _symmetrize(pv, stencil, perms(face_pts), ones)
    ones = {m: np.ones(len(int_pts)) for m in geometry.MIRRORS}
    iv = _symmetrize(iv, stencil, perms(int_pts), ones)
    ident = {m: np.arange(len(alphas)) for m in geometry.MIRRORS}
    dsign = {}
    for m, (sx, sy) in geometry.MIRRORS.items():
        dsign[m] = np.array([float(sx ** a1 * sy ** a2) for a1, a2 in alphas])
    dv = _symmetrize(dv, stencil, ident, dsign)

    face_w = geometry.gauss_legendre_rule(R).weights
    return ReconstructionSet(
        stencil=stencil,
        ell_over_delta=ell,
        face_points=face_pts,
        interior_points=int_pts,
        interior_weights=int_w,
        face_weights=face_w,
        point_vectors=pv,
        deriv_vectors=dv,
        interior_vectors=iv,
        derivs=tuple(alphas),
        gamma=linear_weights(),
    )


def dump_vectors(rset: ReconstructionSet, path: str | Path | None = None) -> str:
    """Plain-text table: one vector per line, ``stencil kind id entries...``."""
    lines = [f"# radius={rset.radius} ell_over_delta={rset.ell_over_delta!r}"]
    for q in range(rset.n_stencils):
        for p in range(rset.point_vectors.shape[1]):
            vals = " ".join(f"{v:.17g}" for v in rset.vector(q, p))
            lines.append(f"{q} point {p} {vals}")
        for a, alpha in enumerate(rset.derivs):
            vals = " ".join(f"{v:.17g}" for v in rset.deriv_vector(q, a))
            lines.append(f"{q} deriv {alpha[0]}{alpha[1]} {vals}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
