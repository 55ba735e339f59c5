"""HLL and HLLC fluxes with Roe-averaged wavespeed estimates.

The compiled cores work in a face-aligned frame: ``mn`` is the momentum normal
to the face and ``mt`` the tangential one.  Every expression is arranged so
that mirroring the pair (swap sides, negate normal velocity) negates the odd
flux components bit for bit.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from numba import njit

from .euler_state import GAMMA

SOLVERS = ("hll", "hllc")


class WaveSpeeds(NamedTuple):
    s_left: float
    s_right: float
    s_star: float


@njit(cache=True, inline="always")
def _speeds(rL, uL, vL, pL, EL, rR, uR, vR, pR, ER, gamma):
    cL = math.sqrt(gamma * pL / rL)
    cR = math.sqrt(gamma * pR / rR)
    sqL = math.sqrt(rL)
    sqR = math.sqrt(rR)
    den = sqL + sqR
    ut = (sqL * uL + sqR * uR) / den
    vt = (sqL * vL + sqR * vR) / den
    HL = (EL + pL) / rL
    HR = (ER + pR) / rR
    Ht = (sqL * HL + sqR * HR) / den
    c2 = (gamma - 1.0) * (Ht - 0.5 * (ut * ut + vt * vt))
    ct = math.sqrt(c2) if c2 > 0.0 else 0.0
    sL = min(uL - cL, ut - ct)
    sR = max(uR + cR, ut + ct)
    return sL, sR


@njit(cache=True, inline="always")
def _s_star(rL, uL, pL, rR, uR, pR, sL, sR):
    aL = rL * (sL - uL)
    aR = rR * (sR - uR)
    return ((pR - pL) + (aL * uL - aR * uR)) / (aL - aR)


@njit(cache=True)
def wavespeeds_core(rL, mnL, mtL, EL, rR, mnR, mtR, ER, gamma):
    uL = mnL / rL
    vL = mtL / rL
    uR = mnR / rR
    vR = mtR / rR
    pL = (gamma - 1.0) * (EL - 0.5 * (mnL * mnL + mtL * mtL) / rL)
    pR = (gamma - 1.0) * (ER - 0.5 * (mnR * mnR + mtR * mtR) / rR)
    sL, sR = _speeds(rL, uL, vL, pL, EL, rR, uR, vR, pR, ER, gamma)
    return sL, sR, _s_star(rL, uL, pL, rR, uR, pR, sL, sR)


@njit(cache=True)
def hll_core(rL, mnL, mtL, EL, rR, mnR, mtR, ER, gamma):
    uL = mnL / rL
    vL = mtL / rL
    uR = mnR / rR
    vR = mtR / rR
    pL = (gamma - 1.0) * (EL - 0.5 * (mnL * mnL + mtL * mtL) / rL)
    pR = (gamma - 1.0) * (ER - 0.5 * (mnR * mnR + mtR * mtR) / rR)
    sL, sR = _speeds(rL, uL, vL, pL, EL, rR, uR, vR, pR, ER, gamma)
    f0L = mnL
    f1L = mnL * uL + pL
    f2L = mtL * uL
    f3L = uL * (EL + pL)
    if sL >= 0.0:
        return f0L, f1L, f2L, f3L
    f0R = mnR
    f1R = mnR * uR + pR
    f2R = mtR * uR
    f3R = uR * (ER + pR)
    if sR <= 0.0:
        return f0R, f1R, f2R, f3R
    ss = sL * sR
    inv = 1.0 / (sR - sL)
    f0 = ((sR * f0L - sL * f0R) + ss * (rR - rL)) * inv
    f1 = ((sR * f1L - sL * f1R) + ss * (mnR - mnL)) * inv
    f2 = ((sR * f2L - sL * f2R) + ss * (mtR - mtL)) * inv
    f3 = ((sR * f3L - sL * f3R) + ss * (ER - EL)) * inv
    return f0, f1, f2, f3


@njit(cache=True, inline="always")
def _star_flux(r, mn, mt, E, u, v, p, s, s_star):
    f = (s - u) / (s - s_star)
    rs = r * f
    es = rs * (E / r + (s_star - u) * (s_star + p / (r * (s - u))))
    f0 = mn + s * (rs - r)
    f1 = (mn * u + p) + s * (rs * s_star - mn)
    f2 = mt * u + s * (rs * v - mt)
    f3 = u * (E + p) + s * (es - E)
    return f0, f1, f2, f3


@njit(cache=True)
def hllc_core(rL, mnL, mtL, EL, rR, mnR, mtR, ER, gamma):
    uL = mnL / rL
    vL = mtL / rL
    uR = mnR / rR
    vR = mtR / rR
    pL = (gamma - 1.0) * (EL - 0.5 * (mnL * mnL + mtL * mtL) / rL)
    pR = (gamma - 1.0) * (ER - 0.5 * (mnR * mnR + mtR * mtR) / rR)
    sL, sR = _speeds(rL, uL, vL, pL, EL, rR, uR, vR, pR, ER, gamma)
    if sL >= 0.0:
        return mnL, mnL * uL + pL, mtL * uL, uL * (EL + pL)
    if sR <= 0.0:
        return mnR, mnR * uR + pR, mtR * uR, uR * (ER + pR)
    sm = _s_star(rL, uL, pL, rR, uR, pR, sL, sR)
    if sm > 0.0:
        return _star_flux(rL, mnL, mtL, EL, uL, vL, pL, sL, sm)
    if sm < 0.0:
        return _star_flux(rR, mnR, mtR, ER, uR, vR, pR, sR, sm)
    a0, a1, a2, a3 = _star_flux(rL, mnL, mtL, EL, uL, vL, pL, sL, sm)
    b0, b1, b2, b3 = _star_flux(rR, mnR, mtR, ER, uR, vR, pR, sR, sm)
    return 0.5 * (a0 + b0), 0.5 * (a1 + b1), 0.5 * (a2 + b2), 0.5 * (a3 + b3)


# -- array-level wrappers --------------------------------------------------

def _rotate(U, axis):
    U = np.asarray(U, dtype=float)
    if axis == 0:
        return U[0], U[1], U[2], U[3]
    if axis == 1:
        return U[0], U[2], U[1], U[3]
    raise ValueError("axis must be 0 or 1")


def _unrotate(f, axis):
    f0, f1, f2, f3 = f
    return np.array([f0, f1, f2, f3] if axis == 0 else [f0, f2, f1, f3])


def wavespeeds(VL, VR, axis: int = 0, gamma: float = GAMMA) -> WaveSpeeds:
    """Signal speed estimates from primitive states."""
    from .euler_state import prim_to_cons

    UL = prim_to_cons(VL, gamma)
    UR = prim_to_cons(VR, gamma)
    return WaveSpeeds(*wavespeeds_core(*_rotate(UL, axis), *_rotate(UR, axis), gamma))


def hll_flux(UL, UR, axis: int = 0, gamma: float = GAMMA) -> np.ndarray:
    return _unrotate(hll_core(*_rotate(UL, axis), *_rotate(UR, axis), gamma), axis)


def hllc_flux(UL, UR, axis: int = 0, gamma: float = GAMMA) -> np.ndarray:
    return _unrotate(hllc_core(*_rotate(UL, axis), *_rotate(UR, axis), gamma), axis)


def get_solver(name: str):
    """Compiled core by name."""
    if name == "hll":
        return hll_core
    if name == "hllc":
        return hllc_core
    raise ValueError(f"unknown Riemann solver {name!r}; expected one of {SOLVERS}")
