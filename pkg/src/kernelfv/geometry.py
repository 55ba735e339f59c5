"""Stencil enumeration and Gauss-Legendre quadrature in unit-cell coordinates.

All offsets and points live on a grid of unit cells; the central cell is
``[-1/2, 1/2]^2``.  The physical spacing never enters here.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

SUPPORTED_RADII = (2, 3)
N_SUBSTENCILS = 5
FACES = ("W", "E", "S", "N")

RANK_TOL = 1e-10


class CellOffset(NamedTuple):
    i: int
    j: int


@dataclass(frozen=True)
class StencilGeometry:
    """Full stencil, its five substencils and per-stencil polynomial degree.

    ``degrees[0]`` belongs to the full stencil, ``degrees[q]`` to substencil q.
    """

    radius: int
    full: tuple[CellOffset, ...]
    substencils: tuple[tuple[CellOffset, ...], ...] = ()
    degrees: tuple[int, ...] = ()

    @property
    def stencils(self) -> tuple[tuple[CellOffset, ...], ...]:
        return (self.full,) + self.substencils

    def index_map(self) -> dict[CellOffset, int]:
        return {c: k for k, c in enumerate(self.full)}

    def member_indices(self, q: int) -> np.ndarray:
        """Positions of the cells of (sub)stencil ``q`` inside the full stencil."""
        idx = self.index_map()
        return np.array([idx[c] for c in self.stencils[q]], dtype=np.int64)

    def offsets_array(self, q: int = 0) -> np.ndarray:
        return np.array(self.stencils[q], dtype=np.int64).reshape(-1, 2)


def _check_radius(R: int) -> None:
    if R not in SUPPORTED_RADII:
        raise ValueError(f"unsupported stencil radius {R!r}; expected one of {SUPPORTED_RADII}")


def build_full_stencil(R: int, dim: int = 2) -> StencilGeometry:
    """All offsets with ``i^2 + j^2 <= R^2``, ordered lexicographically by (j, i)."""
    _check_radius(R)
    if dim != 2:
        raise ValueError("only two-dimensional stencils are supported")
    cells = [
        CellOffset(i, j)
        for j in range(-R, R + 1)
        for i in range(-R, R + 1)
        if i * i + j * j <= R * R
    ]
    return StencilGeometry(radius=R, full=tuple(cells))


def build_substencils(stencil: StencilGeometry) -> StencilGeometry:
    R = stencil.radius
    rules = (
        lambda i, j: i * i + j * j <= (R - 1) ** 2,
        lambda i, j: abs(j) <= i,
        lambda i, j: abs(j) <= -i,
        lambda i, j: abs(i) <= j,
        lambda i, j: abs(i) <= -j,
    )
    subs = tuple(tuple(c for c in stencil.full if rule(c.i, c.j)) for rule in rules)
    return replace(stencil, substencils=subs)


# -- monomials -------------------------------------------------------------

def monomial_exponents(degree: int) -> list[tuple[int, int]]:
    """Graded lexicographic multi-indices: 1, x, y, x^2, xy, y^2, ..."""
    out = []
    for total in range(degree + 1):
        for a2 in range(total + 1):
            out.append((total - a2, a2))
    return out


def _power_average_1d(c: np.ndarray, k: int) -> np.ndarray:
    # exact average of t^k over [c - 1/2, c + 1/2]
    return ((c + 0.5) ** (k + 1) - (c - 0.5) ** (k + 1)) / (k + 1)


def monomial_average_matrix(cells: np.ndarray, degree: int) -> np.ndarray:
    """Cell averages of every monomial of total degree <= ``degree`` (N x D)."""
    cells = np.asarray(cells, dtype=float).reshape(-1, 2)
    exps = monomial_exponents(degree)
    P = np.empty((len(cells), len(exps)))
    for v, (a1, a2) in enumerate(exps):
        P[:, v] = _power_average_1d(cells[:, 0], a1) * _power_average_1d(cells[:, 1], a2)
    return P


def _max_unisolvent_degree(cells: np.ndarray) -> int:
    degree = 0
    while True:
        nxt = degree + 1
        D = len(monomial_exponents(nxt))
        if D > len(cells):
            return degree
        s = np.linalg.svd(monomial_average_matrix(cells, nxt), compute_uv=False)
        if s[-1] <= RANK_TOL * s[0]:
            return degree
        degree = nxt


def assign_degrees(stencil: StencilGeometry) -> StencilGeometry:
    """Largest total degree whose monomial average matrix has full column rank."""
    if not stencil.substencils:
        raise ValueError("substencils must be built before degrees are assigned")
    degrees = tuple(
        _max_unisolvent_degree(np.array(s, dtype=float)) for s in stencil.stencils
    )
    return replace(stencil, degrees=degrees)


def build_stencil(R: int) -> StencilGeometry:
    return assign_degrees(build_substencils(build_full_stencil(R)))


# -- quadrature ------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(np.sum(self.weights * f(self.nodes)))


def gauss_legendre_rule(n: int) -> QuadratureRule:
    """Gauss-Legendre rule on [-1/2, 1/2] with unit total weight.

    Nodes and weights are made exactly mirror symmetric so that mirrored
    evaluations produce bit-identical sums.
    """
    if not 1 <= n <= 6:
        raise ValueError(f"unsupported quadrature size {n}; expected 1..6")
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * x
    w = 0.5 * w
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(nodes=x, weights=w)


@dataclass(frozen=True)
class FacePointSet:
    """R quadrature points per face; ``points`` stacks W, E, S, N in that order."""

    n: int
    faces: dict = field(default_factory=dict)

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([self.faces[f] for f in FACES], axis=0)

    def face_slice(self, face: str) -> slice:
        k = FACES.index(face)
        return slice(k * self.n, (k + 1) * self.n)


def face_quadrature_points(R: int) -> FacePointSet:
    nodes = gauss_legendre_rule(R).nodes
    half = np.full_like(nodes, 0.5)
    faces = {
        "W": np.column_stack([-half, nodes]),
        "E": np.column_stack([half, nodes]),
        "S": np.column_stack([nodes, -half]),
        "N": np.column_stack([nodes, half]),
    }
    return FacePointSet(n=R, faces=faces)


def interior_quadrature_points(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product nodes (n^2 x 2, x fastest) and weights."""
    rule = gauss_legendre_rule(n)
    X, Y = np.meshgrid(rule.nodes, rule.nodes)
    W = np.outer(rule.weights, rule.weights)
    return np.column_stack([X.ravel(), Y.ravel()]), W.ravel()


# -- mirror symmetry -------------------------------------------------------

MIRRORS = {
    "e": (1, 1),
    "x": (-1, 1),
    "y": (1, -1),
    "xy": (-1, -1),
}

# substencil image under each mirror (index 0 is the full stencil)
STENCIL_MIRROR = {
    "e": (0, 1, 2, 3, 4, 5),
    "x": (0, 1, 3, 2, 4, 5),
    "y": (0, 1, 2, 3, 5, 4),
    "xy": (0, 1, 3, 2, 5, 4),
}


def mirror_permutation(stencil: StencilGeometry, mirror: str) -> np.ndarray:
    """``perm[k]`` is the full-stencil index of the mirror image of cell k."""
    sx, sy = MIRRORS[mirror]
    idx = stencil.index_map()
    return np.array([idx[CellOffset(sx * c.i, sy * c.j)] for c in stencil.full], dtype=np.int64)


def point_permutation(points: np.ndarray, mirror: str) -> np.ndarray:
    """Index of each point's mirror image inside the same point list (exact match)."""
    sx, sy = MIRRORS[mirror]
    lookup = {(float(p[0]), float(p[1])): k for k, p in enumerate(points)}
    perm = []
    for p in points:
        key = (float(sx * p[0]) + 0.0, float(sy * p[1]) + 0.0)
        if key not in lookup:
            raise ValueError("point set is not closed under the mirror")
        perm.append(lookup[key])
    return np.array(perm, dtype=np.int64)


def summation_orbits(stencil: StencilGeometry) -> np.ndarray:
    """Group full-stencil cells into mirror orbits for symmetric summation.

    Each row is ``(a, b, c, d)`` with ``b = mirror_x(a)``, ``c = mirror_y(a)``,
    ``d = mirror_xy(a)``; duplicates are replaced by -1.  Summing each row as
    ``(a + b) + (c + d)`` and the rows in order yields results that are exactly
    invariant under both mirrors.
    """
    idx = stencil.index_map()
    seen = set()
    rows = []
    for c in sorted(stencil.full, key=lambda c: (abs(c.j), abs(c.i))):
        rep = CellOffset(abs(c.i), abs(c.j))
        if rep in seen:
            continue
        seen.add(rep)
        a = idx[rep]
        b = idx[CellOffset(-rep.i, rep.j)]
        cc = idx[CellOffset(rep.i, -rep.j)]
        d = idx[CellOffset(-rep.i, -rep.j)]
        row = [a, b if b != a else -1, cc if cc != a else -1, d if d not in (a, b, cc) else -1]
        rows.append(row)
    return np.array(rows, dtype=np.int64)
