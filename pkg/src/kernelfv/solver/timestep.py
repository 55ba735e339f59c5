"""Four-stage third-order SSP Runge-Kutta with an embedded second-order estimate.

Stages share the three-stage SSP(3,2) method: weights (1/3, 1/3, 1/3, 0) on
the stage derivatives give the embedded solution.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..euler_state import InadmissibleStateError
from .grid import Field

log = logging.getLogger(__name__)

B_MAIN = (1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.5)
B_EMBEDDED = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0)
ERROR_ORDER = 3  # local order of the error estimate (embedded order + 1)
PI_BETA1 = 0.7
PI_BETA2 = 0.4
GROW_MAX = 5.0
SHRINK_MIN = 0.2


class SolverAbort(RuntimeError):
    """Step size fell below the allowed minimum."""


@dataclass
class TimeControls:
    cfl_max: float = 1.0
    atol: float = 1e-4
    rtol: float = 1e-4
    t_final: float = 1.0
    safety: float = 0.9
    dt_min: float = 1e-12
    dt_max: float = math.inf
    dt_initial: Optional[float] = None
    max_steps: int = 10_000_000

    def __post_init__(self):
        for name in ("cfl_max", "atol", "rtol", "safety", "dt_min", "dt_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class RunStats:
    steps: int = 0
    rejected: int = 0
    rhs_evaluations: int = 0
    flagged_fraction: list = field(default_factory=list)
    dt: list = field(default_factory=list)
    t: float = 0.0

    @property
    def rejection_rate(self) -> float:
        total = self.steps + self.rejected
        return self.rejected / total if total else 0.0


def error_norm(u_new: np.ndarray, u_hat: np.ndarray, atol: float, rtol: float) -> float:
    sc = atol + rtol * np.abs(u_new)
    return float(np.sqrt(np.mean(((u_new - u_hat) / sc) ** 2)))


def ssp43_stages(L: Callable[[np.ndarray], np.ndarray], u: np.ndarray, dt: float):
    """Generic SSP(4,3) step on a plain array; returns (u_plus, u_hat)."""
    k1 = L(u)
    u1 = u + 0.5 * dt * k1
    k2 = L(u1)
    u2 = u1 + 0.5 * dt * k2
    k3 = L(u2)
    u3 = (2.0 / 3.0) * u + (1.0 / 3.0) * u2 + (dt / 6.0) * k3
    k4 = L(u3)
    u_plus = u3 + 0.5 * dt * k4
    u_hat = u + dt * (B_EMBEDDED[0] * k1 + B_EMBEDDED[1] * k2 + B_EMBEDDED[2] * k3)
    return u_plus, u_hat


def ssp43_step(scheme, fld: Field, dt: float, atol: float = 1e-4, rtol: float = 1e-4):
    """One step on a padded field; returns (new field, error estimate)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    g = scheme.grid
    sl = g.interior

    def L(Upad):
        return scheme.compute_rhs(Upad)

    U0 = fld.U
    u0 = U0[sl]
    k1 = L(U0)
    flagged = scheme.stats.flagged_fraction
    U1 = U0.copy()
    U1[sl] = u0 + 0.5 * dt * k1
    k2 = L(U1)
    U2 = U1.copy()
    U2[sl] = U1[sl] + 0.5 * dt * k2
    k3 = L(U2)
    U3 = U2.copy()
    U3[sl] = (2.0 / 3.0) * u0 + (1.0 / 3.0) * U2[sl] + (dt / 6.0) * k3
    k4 = L(U3)
    Unew = U3.copy()
    Unew[sl] = U3[sl] + 0.5 * dt * k4
    u_hat = u0 + dt * (B_EMBEDDED[0] * k1 + B_EMBEDDED[1] * k2 + B_EMBEDDED[2] * k3)
    err = error_norm(Unew[sl], u_hat, atol, rtol)
    scheme.check_admissible(Unew)
    out = Field(g, Unew, fld.t + dt, dict(fld.meta))
    out.meta["flagged_fraction"] = flagged
    return out, err


def cfl_dt(scheme, U: np.ndarray, cfl: float) -> float:
    smax = scheme.max_signal_speed(U)
    dt = math.inf if smax <= 0 else cfl * scheme.grid.dx / smax
    vis = getattr(scheme, "viscosity", None)
    if vis is not None:
        dt = min(dt, scheme.grid.dx ** 2 * vis.Re / 4.0)
    return dt


def controller_factor(err: float, err_prev: Optional[float], safety: float = 0.9) -> float:
    """PI step-size factor, clamped to [SHRINK_MIN, GROW_MAX]."""
    k = ERROR_ORDER
    if err <= 0.0:
        return GROW_MAX
    fac = safety * err ** (-PI_BETA1 / k)
    if err_prev is not None and err_prev > 0.0:
        fac *= err_prev ** (PI_BETA2 / k)
    return min(GROW_MAX, max(SHRINK_MIN, fac))


def select_dt(scheme, fld: Field, controls: TimeControls, dt_prev: Optional[float],
              err: Optional[float] = None, err_prev: Optional[float] = None) -> float:
    dt = cfl_dt(scheme, fld.U, controls.cfl_max)
    if dt_prev is not None and err is not None:
        dt = min(dt, dt_prev * controller_factor(err, err_prev, controls.safety))
    dt = min(dt, controls.dt_max)
    if dt < controls.dt_min:
        raise SolverAbort(f"time step {dt:.3e} below minimum {controls.dt_min:.3e}")
    return dt


def advance_to(scheme, fld: Field, t_final: float, controls: TimeControls,
               callback: Optional[Callable[[Field, RunStats], None]] = None):
    """Adaptive accept/reject loop; returns (field, stats)."""
    stats = RunStats(t=fld.t)
    t0_evals = scheme.stats.evaluations
    if t_final < fld.t:
        raise ValueError("t_final lies before the current time")
    if t_final == fld.t:
        return fld, stats
    dt = controls.dt_initial or select_dt(scheme, fld, controls, None)
    err_prev = None
    while fld.t < t_final:
        if stats.steps >= controls.max_steps:
            raise SolverAbort("maximum number of steps reached")
        remaining = t_final - fld.t
        last = dt >= remaining
        step = remaining if last else dt
        try:
            new, err = ssp43_step(scheme, fld, step, controls.atol, controls.rtol)
            ok = math.isfinite(err)
        except InadmissibleStateError as exc:
            log.debug("step rejected at t=%.6g dt=%.3e: %s", fld.t, step, exc)
            new, err, ok = None, math.inf, False
        if not ok:
            stats.rejected += 1
            dt = 0.5 * step
            if dt < controls.dt_min:
                raise SolverAbort(f"time step {dt:.3e} below minimum at t={fld.t:.6g}")
            continue
        if err > 1.0:
            stats.rejected += 1
            dt = step * max(SHRINK_MIN, controls.safety * err ** (-1.0 / ERROR_ORDER))
            if dt < controls.dt_min:
                raise SolverAbort(f"time step {dt:.3e} below minimum at t={fld.t:.6g}")
            continue
        if last:
            new.t = t_final
        fld = new
        stats.steps += 1
        stats.dt.append(step)
        stats.flagged_fraction.append(new.meta.get("flagged_fraction", 0.0))
        stats.t = fld.t
        if callback is not None:
            callback(fld, stats)
        if fld.t >= t_final:
            break
        dt = select_dt(scheme, fld, controls, step, err, err_prev)
        err_prev = max(err, 1e-10)
    stats.rhs_evaluations = scheme.stats.evaluations - t0_evals
    return fld, stats
