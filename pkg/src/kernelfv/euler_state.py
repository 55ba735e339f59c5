"""Ideal-gas state algebra for the 2D Euler equations.

States are arrays whose last axis holds four components: conservative
``(rho, mx, my, E)`` or primitive ``(rho, u, v, p)``.  Functions broadcast
over any leading axes.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numba import njit

GAMMA = 1.4


class InadmissibleStateError(ValueError):
    """Density or pressure is not strictly positive."""


class TransformPair(NamedTuple):
    phi: np.ndarray
    phi_inv: np.ndarray


def _split(U):
    U = np.asarray(U, dtype=float)
    if U.shape[-1] != 4:
        raise ValueError(f"expected 4 components on the last axis, got {U.shape[-1]}")
    return U[..., 0], U[..., 1], U[..., 2], U[..., 3]


def _check_density(rho):
    if np.any(~(rho > 0)):
        raise InadmissibleStateError("non-positive density")


def pressure(U, gamma: float = GAMMA):
    rho, mx, my, E = _split(U)
    _check_density(rho)
    return (gamma - 1.0) * (E - 0.5 * (mx * mx + my * my) / rho)


def cons_to_prim(U, gamma: float = GAMMA) -> np.ndarray:
    rho, mx, my, E = _split(U)
    p = pressure(U, gamma)
    if np.any(~(p > 0)):
        raise InadmissibleStateError("non-positive pressure")
    return np.stack([rho, mx / rho, my / rho, p], axis=-1)


def prim_to_cons(V, gamma: float = GAMMA) -> np.ndarray:
    rho, u, v, p = _split(V)
    _check_density(rho)
    if np.any(~(p > 0)):
        raise InadmissibleStateError("non-positive pressure")
    E = p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)
    return np.stack([rho, rho * u, rho * v, E], axis=-1)


def sound_speed(V, gamma: float = GAMMA):
    rho, _, _, p = _split(V)
    return np.sqrt(gamma * p / rho)


def exact_flux(U, axis: int, gamma: float = GAMMA) -> np.ndarray:
    """Directional Euler flux; ``axis`` 0 for x, 1 for y."""
    if axis not in (0, 1):
        raise ValueError("axis must be 0 or 1")
    rho, mx, my, E = _split(U)
    p = pressure(U, gamma)
    un = (mx if axis == 0 else my) / rho
    return np.stack([
        rho * un,
        mx * un + (p if axis == 0 else 0.0),
        my * un + (p if axis == 1 else 0.0),
        un * (E + p),
    ], axis=-1)


def build_transform(U_ref, gamma: float = GAMMA) -> TransformPair:
    """Jacobian of the primitive map at ``U_ref`` and its inverse."""
    U_ref = np.asarray(U_ref, dtype=float)
    if U_ref.shape != (4,):
        raise ValueError("reference must be a single state")
    V = cons_to_prim(U_ref, gamma)
    phi = np.zeros((4, 4))
    phi_inv = np.zeros((4, 4))
    _fill_transform(U_ref[0], V[1], V[2], gamma, phi, phi_inv)
    return TransformPair(phi, phi_inv)


@njit(cache=True)
def _fill_transform(rho, u, v, gamma, phi, phi_inv):
    g1 = gamma - 1.0
    q2 = u * u + v * v
    phi[0, 0] = 1.0
    phi[1, 0] = -u / rho
    phi[1, 1] = 1.0 / rho
    phi[2, 0] = -v / rho
    phi[2, 2] = 1.0 / rho
    phi[3, 0] = g1 * q2 * 0.5
    phi[3, 1] = -g1 * u
    phi[3, 2] = -g1 * v
    phi[3, 3] = g1
    phi_inv[0, 0] = 1.0
    phi_inv[1, 0] = u
    phi_inv[1, 1] = rho
    phi_inv[2, 0] = v
    phi_inv[2, 2] = rho
    phi_inv[3, 0] = 0.5 * q2
    phi_inv[3, 1] = rho * u
    phi_inv[3, 2] = rho * v
    phi_inv[3, 3] = 1.0 / g1


def to_recon_vars(phi, U_list) -> np.ndarray:
    return np.asarray(U_list, dtype=float) @ np.asarray(phi).T


def from_recon_vars(phi_inv, w_point) -> np.ndarray:
    return np.asarray(w_point, dtype=float) @ np.asarray(phi_inv).T


# -- scalar kernels shared by the compiled solver ----------------------------

@njit(cache=True, inline="always")
def pressure_scalar(rho, mx, my, E, gamma):
    return (gamma - 1.0) * (E - 0.5 * (mx * mx + my * my) / rho)


@njit(cache=True, inline="always")
def entropy_scalar(rho, p, gamma):
    return p / rho ** gamma


@njit(cache=True, inline="always")
def admissible_scalar(rho, mx, my, E, gamma):
    if not rho > 0.0:
        return False
    return pressure_scalar(rho, mx, my, E, gamma) > 0.0
