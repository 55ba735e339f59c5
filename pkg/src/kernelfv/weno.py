"""Smoothness indicators, nonlinear weights and the adaptive-order combination."""
from __future__ import annotations

import numpy as np
from numba import njit

from .kernel_recon import ReconstructionSet, linear_weights

EPSILON = 1e-40

__all__ = [
    "EPSILON",
    "linear_weights",
    "smoothness_indicator",
    "nonlinear_weights",
    "weno_ao_reconstruct",
    "combine",
]


def smoothness_indicator(deriv_vectors, g, delta: float, derivs) -> float:
    """beta = sum_alpha delta^(2|alpha|) (d_alpha . g)^2.

    ``deriv_vectors`` is (n_alpha, N) for one stencil, ``derivs`` the matching
    multi-indices.
    """
    d = np.asarray(deriv_vectors) @ np.asarray(g, dtype=float)
    order = np.array([a1 + a2 for a1, a2 in derivs])
    return float(np.sum(delta ** (2 * order) * d * d))


@njit(cache=True)
def _nonlinear_weights(beta, gamma, eps):
    n = beta.shape[0]
    w = np.empty(n)
    for q in range(n):
        w[q] = gamma[q] / (beta[q] * beta[q] + eps)
    # grouping keeps the biased pairs symmetric under mirrors
    tot = w[0] + (w[1] + ((w[2] + w[3]) + (w[4] + w[5])))
    for q in range(n):
        w[q] = w[q] / tot
    return w


def nonlinear_weights(beta, gamma=None, epsilon: float = EPSILON) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    gamma = linear_weights() if gamma is None else np.asarray(gamma, dtype=float)
    if beta.shape != (6,) or gamma.shape != (6,):
        raise ValueError("expected six smoothness values and six linear weights")
    if np.any(beta < 0):
        raise ValueError("smoothness indicators must be non-negative")
    return _nonlinear_weights(beta, gamma, float(epsilon))


@njit(cache=True)
def combine(values, omega, gamma):
    """Adaptive-order blend of the six stencil values."""
    c0 = omega[0] / gamma[0]
    r = omega[0] / gamma[0]
    c1 = omega[1] - r * gamma[1]
    c2 = omega[2] - r * gamma[2]
    c3 = omega[3] - r * gamma[3]
    c4 = omega[4] - r * gamma[4]
    c5 = omega[5] - r * gamma[5]
    return c0 * values[0] + (c1 * values[1] + ((c2 * values[2] + c3 * values[3])
                                              + (c4 * values[4] + c5 * values[5])))


def weno_ao_reconstruct(rset: ReconstructionSet, point: int, g_per_stencil, omega, gamma=None) -> float:
    """Blend the point values of all six stencils at face point ``point``.

    ``g_per_stencil[q]`` holds the averages of stencil q in its own cell order.
    """
    gamma = rset.gamma if gamma is None else np.asarray(gamma, dtype=float)
    vals = np.array([rset.vector(q, point) @ np.asarray(g_per_stencil[q], dtype=float)
                     for q in range(rset.n_stencils)])
    return float(combine(vals, np.asarray(omega, dtype=float), gamma))
