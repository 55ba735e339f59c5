"""Troubled-cell flagging and the self-adjusting positivity limiter."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .euler_state import GAMMA, InadmissibleStateError

KAPPA = 0.4
FLATTENER_KF = 0.33
KXRCF_M = 1.5
BISECT_RTOL = 1e-12
BISECT_MAXIT = 100
# states within this relative slack of a bound count as satisfying it
BOUND_SLACK = 1e-12


class LimiterError(RuntimeError):
    """The cell average itself violates the limiter bounds."""


@dataclass(frozen=True)
class PositivityBounds:
    rho_min: float
    rho_max: float
    p_min: float
    kappa: float = KAPPA
    eta: float = 0.0


# -- compiled cores ----------------------------------------------------------

@njit(cache=True, inline="always")
def _p(r, mx, my, E, gamma):
    return (gamma - 1.0) * (E - 0.5 * (mx * mx + my * my) / r)


@njit(cache=True)
def kxrcf_jump(inner, outer, n, avg_entropy, gamma):
    """Largest relative entropy jump over ``n`` paired face states.

    Returns +inf when any pointwise state is inadmissible.
    """
    jmax = 0.0
    for s in range(n):
        rA = inner[s, 0]
        rB = outer[s, 0]
        pA = _p(rA, inner[s, 1], inner[s, 2], inner[s, 3], gamma)
        pB = _p(rB, outer[s, 1], outer[s, 2], outer[s, 3], gamma)
        if not (rA > 0.0 and rB > 0.0 and pA > 0.0 and pB > 0.0):
            return math.inf
        d = abs(pA / rA ** gamma - pB / rB ** gamma)
        if d > jmax:
            jmax = d
    return jmax / avg_entropy


@njit(cache=True)
def flattener_core(u_w, u_e, v_s, v_n, c_min, kf):
    delta = 0.5 * (u_e - u_w) + 0.5 * (v_n - v_s)
    kc = kf * c_min
    eta = -(delta + kc) / kc
    if eta < 0.0:
        return 0.0
    if eta > 1.0:
        return 1.0
    return eta


@njit(cache=True)
def limit_density_core(states, n, avg, rho_min, rho_max):
    """Scale ``states[:n]`` toward ``avg``; returns theta or -1 on a bad average."""
    rbar = avg[0]
    if rbar < rho_min * (1.0 - BOUND_SLACK) or rbar > rho_max * (1.0 + BOUND_SLACK):
        return -1.0
    theta = 1.0
    for s in range(n):
        r = states[s, 0]
        if r < rho_min * (1.0 - BOUND_SLACK):
            t = (rbar - rho_min) / (rbar - r)
            if t < theta:
                theta = t
        elif r > rho_max * (1.0 + BOUND_SLACK):
            t = (rho_max - rbar) / (r - rbar)
            if t < theta:
                theta = t
    if theta < 1.0:
        if theta < 0.0:
            theta = 0.0
        for s in range(n):
            for k in range(4):
                states[s, k] = avg[k] + theta * (states[s, k] - avg[k])
    return theta


@njit(cache=True, inline="always")
def _p_along(states, s, avg, theta, gamma):
    r = avg[0] + theta * (states[s, 0] - avg[0])
    mx = avg[1] + theta * (states[s, 1] - avg[1])
    my = avg[2] + theta * (states[s, 2] - avg[2])
    E = avg[3] + theta * (states[s, 3] - avg[3])
    return _p(r, mx, my, E, gamma)


@njit(cache=True)
def limit_pressure_core(states, n, avg, p_min, gamma):
    """Bisection pressure limiter; returns theta or -1 on a bad average."""
    if not avg[0] > 0.0:
        return -1.0
    pbar = _p(avg[0], avg[1], avg[2], avg[3], gamma)
    if pbar < p_min * (1.0 - BOUND_SLACK):
        return -1.0
    theta = 1.0
    for s in range(n):
        ps = _p(states[s, 0], states[s, 1], states[s, 2], states[s, 3], gamma)
        if ps >= p_min * (1.0 - BOUND_SLACK) and states[s, 0] > 0.0:
            continue
        lo = 0.0
        hi = 1.0
        for _ in range(BISECT_MAXIT):
            mid = 0.5 * (lo + hi)
            if _p_along(states, s, avg, mid, gamma) >= p_min:
                lo = mid
            else:
                hi = mid
            if hi - lo <= BISECT_RTOL * hi:
                break
        if lo < theta:
            theta = lo
    if theta < 1.0:
        for s in range(n):
            for k in range(4):
                states[s, k] = avg[k] + theta * (states[s, k] - avg[k])
    return theta


# -- array-level API -----------------------------------------------------------

def kxrcf_flag(inner, outer, avg, delta: float, m: float = KXRCF_M, gamma: float = GAMMA) -> bool:
    """Flag a cell from its face states and the matching neighbour states.

    ``inner`` and ``outer`` are (n, 4) conservative states paired point by point.
    """
    inner = np.ascontiguousarray(inner, dtype=float).reshape(-1, 4)
    outer = np.ascontiguousarray(outer, dtype=float).reshape(-1, 4)
    if inner.shape != outer.shape:
        raise ValueError("face state arrays must match")
    avg = np.asarray(avg, dtype=float)
    pbar = _p(avg[0], avg[1], avg[2], avg[3], gamma)
    if not (avg[0] > 0 and pbar > 0):
        raise InadmissibleStateError("non-positive cell average")
    q = pbar / avg[0] ** gamma
    return bool(kxrcf_jump(inner, outer, len(inner), q, gamma) >= delta ** m)


def _neighbourhood_prims(nb, gamma):
    nb = np.asarray(nb, dtype=float)
    if nb.shape != (3, 3, 4):
        raise ValueError("expected a 3x3 neighbourhood of conservative states indexed [dy, dx]")
    rho = nb[..., 0]
    p = (gamma - 1.0) * (nb[..., 3] - 0.5 * (nb[..., 1] ** 2 + nb[..., 2] ** 2) / rho)
    return rho, nb[..., 1] / rho, nb[..., 2] / rho, p


def compute_flattener(nb, gamma: float = GAMMA, kf: float = FLATTENER_KF) -> float:
    """Compression switch in [0, 1] from a 3x3 block of averages."""
    rho, u, v, p = _neighbourhood_prims(nb, gamma)
    c_min = float(np.min(np.sqrt(gamma * p / rho)))
    return flattener_core(u[1, 0], u[1, 2], v[0, 1], v[2, 1], c_min, kf)


def compute_bounds(nb, kappa: float = KAPPA, eta: float = 0.0, gamma: float = GAMMA) -> PositivityBounds:
    rho, _, _, p = _neighbourhood_prims(nb, gamma)
    lo = 1.0 - kappa + kappa * eta
    hi = 1.0 + kappa - kappa * eta
    return PositivityBounds(
        rho_min=float(rho.min() * lo),
        rho_max=float(rho.max() * hi),
        p_min=float(p.min() * lo),
        kappa=kappa,
        eta=eta,
    )


def limit_density(states, avg, bounds: PositivityBounds) -> np.ndarray:
    out = np.array(states, dtype=float).reshape(-1, 4)
    theta = limit_density_core(out, len(out), np.asarray(avg, dtype=float), bounds.rho_min, bounds.rho_max)
    if theta < 0:
        raise LimiterError("cell average density outside its bounds")
    return out


def limit_pressure(states, avg, p_min: float, gamma: float = GAMMA) -> np.ndarray:
    out = np.array(states, dtype=float).reshape(-1, 4)
    theta = limit_pressure_core(out, len(out), np.asarray(avg, dtype=float), p_min, gamma)
    if theta < 0:
        raise LimiterError("cell average pressure below its floor")
    return out
