"""Exact solution of the 1D Riemann problem for an ideal gas (test oracle)."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

TOL = 1e-12
MAX_ITER = 100


class VacuumError(ValueError):
    pass


class StarState(NamedTuple):
    p: float
    u: float


def _f(p, rho, pk, c, gamma):
    """Pressure function and derivative for one side."""
    if p > pk:
        A = 2.0 / ((gamma + 1.0) * rho)
        B = (gamma - 1.0) / (gamma + 1.0) * pk
        sq = math.sqrt(A / (p + B))
        return (p - pk) * sq, sq * (1.0 - 0.5 * (p - pk) / (B + p))
    pr = p / pk
    f = 2.0 * c / (gamma - 1.0) * (pr ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)
    df = pr ** (-(gamma + 1.0) / (2.0 * gamma)) / (rho * c)
    return f, df


def star_state(VL, VR, gamma: float = 1.4) -> StarState:
    rL, uL, pL = float(VL[0]), float(VL[1]), float(VL[-1])
    rR, uR, pR = float(VR[0]), float(VR[1]), float(VR[-1])
    cL = math.sqrt(gamma * pL / rL)
    cR = math.sqrt(gamma * pR / rR)
    du = uR - uL
    if 2.0 * (cL + cR) / (gamma - 1.0) <= du:
        raise VacuumError("initial data generate vacuum")
    # two-rarefaction guess, robust for weak and strong waves
    z = (gamma - 1.0) / (2.0 * gamma)
    p = ((cL + cR - 0.5 * (gamma - 1.0) * du) / (cL / pL ** z + cR / pR ** z)) ** (1.0 / z)
    p = max(p, TOL)
    for _ in range(MAX_ITER):
        fL, dL = _f(p, rL, pL, cL, gamma)
        fR, dR = _f(p, rR, pR, cR, gamma)
        p_new = p - (fL + fR + du) / (dL + dR)
        if p_new <= 0.0:
            p_new = 0.5 * p
        if abs(p_new - p) <= TOL * 0.5 * (p_new + p):
            p = p_new
            fL, _ = _f(p, rL, pL, cL, gamma)
            fR, _ = _f(p, rR, pR, cR, gamma)
            return StarState(p, 0.5 * (uL + uR) + 0.5 * (fR - fL))
        p = p_new
    raise RuntimeError("exact Riemann solver did not converge")


def _sample(s, VL, VR, star, gamma):
    rL, uL, pL = VL
    rR, uR, pR = VR
    ps, us = star
    g1 = gamma - 1.0
    gp = gamma + 1.0
    if s <= us:
        c = math.sqrt(gamma * pL / rL)
        if ps > pL:
            sh = uL - c * math.sqrt(gp / (2 * gamma) * ps / pL + g1 / (2 * gamma))
            if s <= sh:
                return rL, uL, pL
            return rL * (ps / pL + g1 / gp) / (g1 / gp * ps / pL + 1.0), us, ps
        cs = c * (ps / pL) ** (g1 / (2 * gamma))
        if s <= uL - c:
            return rL, uL, pL
        if s >= us - cs:
            return rL * (ps / pL) ** (1.0 / gamma), us, ps
        u = 2.0 / gp * (c + 0.5 * g1 * uL + s)
        cf = 2.0 / gp * (c + 0.5 * g1 * (uL - s))
        r = rL * (cf / c) ** (2.0 / g1)
        return r, u, pL * (cf / c) ** (2.0 * gamma / g1)
    c = math.sqrt(gamma * pR / rR)
    if ps > pR:
        sh = uR + c * math.sqrt(gp / (2 * gamma) * ps / pR + g1 / (2 * gamma))
        if s >= sh:
            return rR, uR, pR
        return rR * (ps / pR + g1 / gp) / (g1 / gp * ps / pR + 1.0), us, ps
    cs = c * (ps / pR) ** (g1 / (2 * gamma))
    if s >= uR + c:
        return rR, uR, pR
    if s <= us + cs:
        return rR * (ps / pR) ** (1.0 / gamma), us, ps
    u = 2.0 / gp * (-c + 0.5 * g1 * uR + s)
    cf = 2.0 / gp * (c - 0.5 * g1 * (uR - s))
    r = rR * (cf / c) ** (2.0 / g1)
    return r, u, pR * (cf / c) ** (2.0 * gamma / g1)


def exact_riemann(VL, VR, gamma: float, x_over_t):
    """Primitive (rho, u, p) of the self-similar solution at speeds ``x_over_t``.

    Accepts scalar or array speeds; returns an array with a trailing axis of 3.
    """
    VL3 = (float(VL[0]), float(VL[1]), float(VL[-1]))
    VR3 = (float(VR[0]), float(VR[1]), float(VR[-1]))
    star = star_state(VL3, VR3, gamma)
    s = np.asarray(x_over_t, dtype=float)
    out = np.array([_sample(float(v), VL3, VR3, star, gamma) for v in s.ravel()])
    return out.reshape(s.shape + (3,))


def cell_averaged_solution(VL, VR, gamma: float, x_edges, x0: float, t: float, sub: int = 64):
    """Exact solution averaged over cells with edges ``x_edges`` (midpoint sub-sampling)."""
    x_edges = np.asarray(x_edges, dtype=float)
    n = len(x_edges) - 1
    frac = (np.arange(sub) + 0.5) / sub
    pts = x_edges[:-1, None] + frac[None, :] * np.diff(x_edges)[:, None]
    sol = exact_riemann(VL, VR, gamma, (pts - x0) / t)
    return sol.mean(axis=1).reshape(n, 3)
