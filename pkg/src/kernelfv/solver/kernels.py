"""Compiled sweeps of the right-hand-side pipeline.

Layout conventions:
    U      padded cell averages, (ny + 2G, nx + 2G, 4)
    S      reconstructed states per interior cell, (ny, nx, P, 4); points are
           W[0..R), E[0..R), S[0..R), N[0..R) and then optional interior nodes
    flags  (ny, nx) uint8
Dot products over a stencil run through mirror orbit tables so that mirrored
data give bit-identical results.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..limiters import flattener_core, kxrcf_jump, limit_density_core, limit_pressure_core
from ..riemann import hll_core, hllc_core

HLL = 0
HLLC = 1

STATUS_OK = 0
STATUS_BAD_AVERAGE = 1
STATUS_LIMITER = 2


@njit(cache=True)
def orbit_dot(r, gv, c, orb, nrow):
    """sum_k r[k] * gv[k, c] summed as ((a + b) + (c + d)) per orbit row.

    Reference form used by tests; the sweeps use the slot layout below.
    """
    acc = 0.0
    for t in range(nrow):
        h1 = False
        s1 = 0.0
        for m in range(2):
            k = orb[t, m]
            if k >= 0:
                x = r[k] * gv[k, c]
                s1 = s1 + x if h1 else x
                h1 = True
        h2 = False
        s2 = 0.0
        for m in range(2, 4):
            k = orb[t, m]
            if k >= 0:
                x = r[k] * gv[k, c]
                s2 = s2 + x if h2 else x
                h2 = True
        if h1 and h2:
            s = s1 + s2
        elif h1:
            s = s1
        else:
            s = s2
        acc = s if t == 0 else acc + s
    return acc


@njit(cache=True)
def _gather(U, jj, ii, offs, gv):
    for k in range(offs.shape[0]):
        for c in range(4):
            gv[k, c] = U[jj + offs[k, 1], ii + offs[k, 0], c]


@njit(cache=True)
def _gather_slots(gv, slot, GW):
    """GW[t, m, c] = gv[slot[t, m], c]; the last row of gv is all zeros."""
    for t in range(slot.shape[0]):
        for m in range(4):
            k = slot[t, m]
            for c in range(4):
                GW[t, m, c] = gv[k, c]


@njit(cache=True)
def _slot_values(coef, f, t0, t1, GW, out):
    """out[c] = sum over rows t0..t1 of ((a + b) + (c + d)) for functional f.

    Absent orbit members carry a zero coefficient and a zero datum.
    """
    a0 = coef[f, t0, 0]
    a1 = coef[f, t0, 1]
    a2 = coef[f, t0, 2]
    a3 = coef[f, t0, 3]
    g = GW[t0]
    o0 = (a0 * g[0, 0] + a1 * g[1, 0]) + (a2 * g[2, 0] + a3 * g[3, 0])
    o1 = (a0 * g[0, 1] + a1 * g[1, 1]) + (a2 * g[2, 1] + a3 * g[3, 1])
    o2 = (a0 * g[0, 2] + a1 * g[1, 2]) + (a2 * g[2, 2] + a3 * g[3, 2])
    o3 = (a0 * g[0, 3] + a1 * g[1, 3]) + (a2 * g[2, 3] + a3 * g[3, 3])
    for t in range(t0 + 1, t1):
        a0 = coef[f, t, 0]
        a1 = coef[f, t, 1]
        a2 = coef[f, t, 2]
        a3 = coef[f, t, 3]
        g = GW[t]
        o0 += (a0 * g[0, 0] + a1 * g[1, 0]) + (a2 * g[2, 0] + a3 * g[3, 0])
        o1 += (a0 * g[0, 1] + a1 * g[1, 1]) + (a2 * g[2, 1] + a3 * g[3, 1])
        o2 += (a0 * g[0, 2] + a1 * g[1, 2]) + (a2 * g[2, 2] + a3 * g[3, 2])
        o3 += (a0 * g[0, 3] + a1 * g[1, 3]) + (a2 * g[2, 3] + a3 * g[3, 3])
    out[0] = o0
    out[1] = o1
    out[2] = o2
    out[3] = o3


@njit(cache=True)
def check_averages(U, G, nx, ny, gamma):
    """Number of interior cells with non-positive (or NaN) density or pressure."""
    bad = 0
    for j in range(ny):
        for i in range(nx):
            r = U[j + G, i + G, 0]
            mx = U[j + G, i + G, 1]
            my = U[j + G, i + G, 2]
            E = U[j + G, i + G, 3]
            if not r > 0.0:
                bad += 1
                continue
            p = (gamma - 1.0) * (E - 0.5 * (mx * mx + my * my) / r)
            if not p > 0.0:
                bad += 1
    return bad


@njit(cache=True)
def recon_unlimited(U, G, nx, ny, offs, coef, slot, t1, S):
    """Full-stencil reconstruction of conservative states (rows 0..t1 of the slot table)."""
    N0 = offs.shape[0]
    P = coef.shape[0]
    gv = np.zeros((N0 + 1, 4))
    GW = np.empty((slot.shape[0], 4, 4))
    out = np.empty(4)
    for j in range(ny):
        for i in range(nx):
            _gather(U, j + G, i + G, offs, gv)
            _gather_slots(gv, slot, GW)
            for p in range(P):
                _slot_values(coef, p, 0, t1, GW, out)
                for c in range(4):
                    S[j, i, p, c] = out[c]


@njit(cache=True)
def kxrcf_sweep(U, G, nx, ny, S, R, thresh, gamma, per_x, per_y, enabled, flags):
    """Set flags; returns the number of flagged cells."""
    inner = np.empty((4 * R, 4))
    outer = np.empty((4 * R, 4))
    count = 0
    for j in range(ny):
        for i in range(nx):
            if not enabled:
                flags[j, i] = 1
                count += 1
                continue
            r = U[j + G, i + G, 0]
            mx = U[j + G, i + G, 1]
            my = U[j + G, i + G, 2]
            E = U[j + G, i + G, 3]
            pbar = (gamma - 1.0) * (E - 0.5 * (mx * mx + my * my) / r)
            q = pbar / r ** gamma
            n = 0
            if i > 0 or per_x:
                ii = i - 1 if i > 0 else nx - 1
                for k in range(R):
                    for c in range(4):
                        inner[n, c] = S[j, i, k, c]
                        outer[n, c] = S[j, ii, R + k, c]
                    n += 1
            if i < nx - 1 or per_x:
                ii = i + 1 if i < nx - 1 else 0
                for k in range(R):
                    for c in range(4):
                        inner[n, c] = S[j, i, R + k, c]
                        outer[n, c] = S[j, ii, k, c]
                    n += 1
            if j > 0 or per_y:
                jj = j - 1 if j > 0 else ny - 1
                for k in range(R):
                    for c in range(4):
                        inner[n, c] = S[j, i, 2 * R + k, c]
                        outer[n, c] = S[jj, i, 3 * R + k, c]
                    n += 1
            if j < ny - 1 or per_y:
                jj = j + 1 if j < ny - 1 else 0
                for k in range(R):
                    for c in range(4):
                        inner[n, c] = S[j, i, 3 * R + k, c]
                        outer[n, c] = S[jj, i, 2 * R + k, c]
                    n += 1
            flag = False
            if not (r > 0.0 and pbar > 0.0):
                flag = True
            elif n > 0 and kxrcf_jump(inner, outer, n, q, gamma) >= thresh:
                flag = True
            else:
                # own states on exempt boundary faces must still be admissible
                for s in range(S.shape[2]):
                    rs = S[j, i, s, 0]
                    if not rs > 0.0:
                        flag = True
                        break
                    ps = (gamma - 1.0) * (S[j, i, s, 3] - 0.5 * (S[j, i, s, 1] ** 2 + S[j, i, s, 2] ** 2) / rs)
                    if not ps > 0.0:
                        flag = True
                        break
            flags[j, i] = 1 if flag else 0
            if flag:
                count += 1
    return count


@njit(cache=True)
def weno_sweep(U, G, nx, ny, offs, center, coef, dcoef, slot, qoff, dscale, lin_w, eps, gamma, flags, S):
    """WENO-AO in linearised primitive variables for flagged cells."""
    N0 = offs.shape[0]
    n_st = qoff.shape[0] - 1
    P = coef.shape[0]
    nA = dcoef.shape[0]
    gv = np.zeros((N0 + 1, 4))
    wv = np.zeros((N0 + 1, 4))
    GW = np.empty((slot.shape[0], 4, 4))
    om = np.empty((n_st, 4))
    vals = np.empty((n_st, 4))
    out = np.empty(4)
    g1 = gamma - 1.0
    for j in range(ny):
        for i in range(nx):
            if flags[j, i] == 0:
                continue
            _gather(U, j + G, i + G, offs, gv)
            rho = gv[center, 0]
            u = gv[center, 1] / rho
            v = gv[center, 2] / rho
            q2 = u * u + v * v
            mu_ = rho * u
            mv_ = rho * v
            p10 = -u / rho
            p20 = -v / rho
            pdiag = 1.0 / rho
            p30 = g1 * q2 * 0.5
            p31 = -g1 * u
            p32 = -g1 * v
            for k in range(N0):
                r = gv[k, 0]
                wv[k, 0] = r
                wv[k, 1] = p10 * r + pdiag * gv[k, 1]
                wv[k, 2] = p20 * r + pdiag * gv[k, 2]
                wv[k, 3] = ((p30 * r + p31 * gv[k, 1]) + p32 * gv[k, 2]) + g1 * gv[k, 3]
            _gather_slots(wv, slot, GW)
            # smoothness indicators, one per stencil and component
            for q in range(n_st):
                for c in range(4):
                    vals[q, c] = 0.0
                for a in range(nA):
                    _slot_values(dcoef, a, qoff[q], qoff[q + 1], GW, out)
                    for c in range(4):
                        vals[q, c] = vals[q, c] + dscale[a] * (out[c] * out[c])
                for c in range(4):
                    b = vals[q, c]
                    om[q, c] = lin_w[q] / (b * b + eps)
            for c in range(4):
                tot = om[0, c] + (om[1, c] + ((om[2, c] + om[3, c]) + (om[4, c] + om[5, c])))
                for q in range(n_st):
                    om[q, c] = om[q, c] / tot
            for p in range(P):
                for q in range(n_st):
                    _slot_values(coef, p, qoff[q], qoff[q + 1], GW, out)
                    for c in range(4):
                        vals[q, c] = out[c]
                for c in range(4):
                    rr = om[0, c] / lin_w[0]
                    c1 = om[1, c] - rr * lin_w[1]
                    c2 = om[2, c] - rr * lin_w[2]
                    c3 = om[3, c] - rr * lin_w[3]
                    c4 = om[4, c] - rr * lin_w[4]
                    c5 = om[5, c] - rr * lin_w[5]
                    out[c] = rr * vals[0, c] + (c1 * vals[1, c] + ((c2 * vals[2, c] + c3 * vals[3, c])
                                                                  + (c4 * vals[4, c] + c5 * vals[5, c])))
                w0 = out[0]
                w1 = out[1]
                w2 = out[2]
                w3 = out[3]
                S[j, i, p, 0] = w0
                S[j, i, p, 1] = u * w0 + rho * w1
                S[j, i, p, 2] = v * w0 + rho * w2
                S[j, i, p, 3] = ((0.5 * q2 * w0 + mu_ * w1) + mv_ * w2) + w3 / g1


@njit(cache=True)
def positivity_sweep(U, G, nx, ny, S, kappa, kf, gamma):
    """Limit all states of every cell; returns a status code."""
    P = S.shape[2]
    avg = np.empty(4)
    for j in range(ny):
        for i in range(nx):
            rmin = math.inf
            rmax = -math.inf
            pmin = math.inf
            cmin = math.inf
            for dj in range(-1, 2):
                for di in range(-1, 2):
                    r = U[j + G + dj, i + G + di, 0]
                    mx = U[j + G + dj, i + G + di, 1]
                    my = U[j + G + dj, i + G + di, 2]
                    E = U[j + G + dj, i + G + di, 3]
                    p = (gamma - 1.0) * (E - 0.5 * (mx * mx + my * my) / r)
                    if not (r > 0.0 and p > 0.0):
                        return STATUS_BAD_AVERAGE
                    rmin = min(rmin, r)
                    rmax = max(rmax, r)
                    pmin = min(pmin, p)
                    cmin = min(cmin, math.sqrt(gamma * p / r))
            jj = j + G
            ii = i + G
            uw = U[jj, ii - 1, 1] / U[jj, ii - 1, 0]
            ue = U[jj, ii + 1, 1] / U[jj, ii + 1, 0]
            vs = U[jj - 1, ii, 2] / U[jj - 1, ii, 0]
            vn = U[jj + 1, ii, 2] / U[jj + 1, ii, 0]
            eta = flattener_core(uw, ue, vs, vn, cmin, kf)
            lo = 1.0 - kappa + kappa * eta
            hi = 1.0 + kappa - kappa * eta
            for c in range(4):
                avg[c] = U[jj, ii, c]
            st = S[j, i]
            if limit_density_core(st, P, avg, rmin * lo, rmax * hi) < 0.0:
                return STATUS_LIMITER
            if limit_pressure_core(st, P, avg, pmin * lo, gamma) < 0.0:
                return STATUS_LIMITER
    return STATUS_OK


@njit(cache=True)
def _riemann(solver, rL, mnL, mtL, EL, rR, mnR, mtR, ER, gamma):
    if solver == HLL:
        return hll_core(rL, mnL, mtL, EL, rR, mnR, mtR, ER, gamma)
    return hllc_core(rL, mnL, mtL, EL, rR, mnR, mtR, ER, gamma)


@njit(cache=True)
def _face_sum(w, fk, R, c):
    h = R // 2
    acc = 0.0
    for k in range(h):
        t = w[k] * fk[k, c] + w[R - 1 - k] * fk[R - 1 - k, c]
        acc = t if k == 0 else acc + t
    if R % 2 == 1:
        t = w[h] * fk[h, c]
        acc = t if h == 0 else acc + t
    return acc


@njit(cache=True)
def flux_sweep(S, nx, ny, R, extW, extE, extS, extN, per_x, per_y, w, solver, gamma, Fx, Fy):
    fk = np.empty((R, 4))
    for j in range(ny):
        for i in range(nx + 1):
            for k in range(R):
                if i == 0:
                    if per_x:
                        rL = S[j, nx - 1, R + k, 0]
                        mL = S[j, nx - 1, R + k, 1]
                        tL = S[j, nx - 1, R + k, 2]
                        eL = S[j, nx - 1, R + k, 3]
                    else:
                        rL = extW[j, k, 0]
                        mL = extW[j, k, 1]
                        tL = extW[j, k, 2]
                        eL = extW[j, k, 3]
                else:
                    rL = S[j, i - 1, R + k, 0]
                    mL = S[j, i - 1, R + k, 1]
                    tL = S[j, i - 1, R + k, 2]
                    eL = S[j, i - 1, R + k, 3]
                if i == nx:
                    if per_x:
                        rR = S[j, 0, k, 0]
                        mR = S[j, 0, k, 1]
                        tR = S[j, 0, k, 2]
                        eR = S[j, 0, k, 3]
                    else:
                        rR = extE[j, k, 0]
                        mR = extE[j, k, 1]
                        tR = extE[j, k, 2]
                        eR = extE[j, k, 3]
                else:
                    rR = S[j, i, k, 0]
                    mR = S[j, i, k, 1]
                    tR = S[j, i, k, 2]
                    eR = S[j, i, k, 3]
                f0, f1, f2, f3 = _riemann(solver, rL, mL, tL, eL, rR, mR, tR, eR, gamma)
                fk[k, 0] = f0
                fk[k, 1] = f1
                fk[k, 2] = f2
                fk[k, 3] = f3
            for c in range(4):
                Fx[j, i, c] = _face_sum(w, fk, R, c)
    for j in range(ny + 1):
        for i in range(nx):
            for k in range(R):
                a = 2 * R + k
                b = 3 * R + k
                if j == 0:
                    if per_y:
                        rL = S[ny - 1, i, b, 0]
                        mL = S[ny - 1, i, b, 2]
                        tL = S[ny - 1, i, b, 1]
                        eL = S[ny - 1, i, b, 3]
                    else:
                        rL = extS[i, k, 0]
                        mL = extS[i, k, 2]
                        tL = extS[i, k, 1]
                        eL = extS[i, k, 3]
                else:
                    rL = S[j - 1, i, b, 0]
                    mL = S[j - 1, i, b, 2]
                    tL = S[j - 1, i, b, 1]
                    eL = S[j - 1, i, b, 3]
                if j == ny:
                    if per_y:
                        rR = S[0, i, a, 0]
                        mR = S[0, i, a, 2]
                        tR = S[0, i, a, 1]
                        eR = S[0, i, a, 3]
                    else:
                        rR = extN[i, k, 0]
                        mR = extN[i, k, 2]
                        tR = extN[i, k, 1]
                        eR = extN[i, k, 3]
                else:
                    rR = S[j, i, a, 0]
                    mR = S[j, i, a, 2]
                    tR = S[j, i, a, 1]
                    eR = S[j, i, a, 3]
                f0, f1, f2, f3 = _riemann(solver, rL, mL, tL, eL, rR, mR, tR, eR, gamma)
                fk[k, 0] = f0
                fk[k, 1] = f2
                fk[k, 2] = f1
                fk[k, 3] = f3
            for c in range(4):
                Fy[j, i, c] = _face_sum(w, fk, R, c)


@njit(cache=True, inline="always")
def _prim(U, jj, ii, gamma, T_scale):
    r = U[jj, ii, 0]
    u = U[jj, ii, 1] / r
    v = U[jj, ii, 2] / r
    p = (gamma - 1.0) * (U[jj, ii, 3] - 0.5 * r * (u * u + v * v))
    return u, v, T_scale * p / r


@njit(cache=True)
def viscous_sweep(U, G, nx, ny, dx, Re, Pr, T_scale, gamma, Fx, Fy):
    """Subtract second-order viscous fluxes at face centres from Fx, Fy."""
    inv = 1.0 / dx
    mu = 1.0 / Re
    kap = 1.0 / (Pr * Re)
    for j in range(ny):
        jj = j + G
        for i in range(nx + 1):
            ii = i + G
            uL, vL, TL = _prim(U, jj, ii - 1, gamma, T_scale)
            uR, vR, TR = _prim(U, jj, ii, gamma, T_scale)
            uNR, vNR, _ = _prim(U, jj + 1, ii, gamma, T_scale)
            uSR, vSR, _ = _prim(U, jj - 1, ii, gamma, T_scale)
            uNL, vNL, _ = _prim(U, jj + 1, ii - 1, gamma, T_scale)
            uSL, vSL, _ = _prim(U, jj - 1, ii - 1, gamma, T_scale)
            ux = (uR - uL) * inv
            vx = (vR - vL) * inv
            Tx = (TR - TL) * inv
            uy = 0.25 * ((uNR - uSR) + (uNL - uSL)) * inv
            vy = 0.25 * ((vNR - vSR) + (vNL - vSL)) * inv
            div = ux + vy
            sxx = mu * (2.0 * ux - (2.0 / 3.0) * div)
            sxy = mu * (uy + vx)
            uf = 0.5 * (uL + uR)
            vf = 0.5 * (vL + vR)
            Fx[j, i, 1] -= sxx
            Fx[j, i, 2] -= sxy
            Fx[j, i, 3] -= (sxx * uf + sxy * vf) + kap * Tx
    for j in range(ny + 1):
        jj = j + G
        for i in range(nx):
            ii = i + G
            uL, vL, TL = _prim(U, jj - 1, ii, gamma, T_scale)
            uR, vR, TR = _prim(U, jj, ii, gamma, T_scale)
            uER, vER, _ = _prim(U, jj, ii + 1, gamma, T_scale)
            uWR, vWR, _ = _prim(U, jj, ii - 1, gamma, T_scale)
            uEL, vEL, _ = _prim(U, jj - 1, ii + 1, gamma, T_scale)
            uWL, vWL, _ = _prim(U, jj - 1, ii - 1, gamma, T_scale)
            uy = (uR - uL) * inv
            vy = (vR - vL) * inv
            Ty = (TR - TL) * inv
            ux = 0.25 * ((uER - uWR) + (uEL - uWL)) * inv
            vx = 0.25 * ((vER - vWR) + (vEL - vWL)) * inv
            div = ux + vy
            syy = mu * (2.0 * vy - (2.0 / 3.0) * div)
            sxy = mu * (uy + vx)
            uf = 0.5 * (uL + uR)
            vf = 0.5 * (vL + vR)
            Fy[j, i, 1] -= sxy
            Fy[j, i, 2] -= syy
            Fy[j, i, 3] -= (sxy * uf + syy * vf) + kap * Ty


@njit(cache=True)
def accumulate(Fx, Fy, nx, ny, dx, out):
    inv = 1.0 / dx
    for j in range(ny):
        for i in range(nx):
            for c in range(4):
                out[j, i, c] = -((Fx[j, i + 1, c] - Fx[j, i, c]) + (Fy[j + 1, i, c] - Fy[j, i, c])) * inv


@njit(cache=True)
def max_signal_speed(U, G, nx, ny, gamma):
    smax = 0.0
    for j in range(ny):
        for i in range(nx):
            r = U[j + G, i + G, 0]
            u = U[j + G, i + G, 1] / r
            v = U[j + G, i + G, 2] / r
            p = (gamma - 1.0) * (U[j + G, i + G, 3] - 0.5 * r * (u * u + v * v))
            c = math.sqrt(gamma * p / r) if p > 0.0 and r > 0.0 else 0.0
            s = (abs(u) + c) + (abs(v) + c)
            if s > smax:
                smax = s
    return smax
