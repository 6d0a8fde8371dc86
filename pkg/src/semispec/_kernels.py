"""Fixed-step RK4 kernels for phase shooting and eigenfunction integration.

The potential enters only through its values on the half-step ladder of the
integration grid, precomputed in Python with the exact analytic evaluators.
The kernels never evaluate the potential themselves, so every potential
family (and every future one) shares one compiled path, and the same ladder
is reused across all energy iterates of a solve.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def prufer_theta_end(E: float, w_half: np.ndarray, h: float, scale: float) -> float:
    """Terminal phase of the scaled Prufer angle.

    With u = rho sin(theta)/sqrt(scale), u' = rho sqrt(scale) cos(theta),
    theta' = scale cos^2(theta) + ((E - W)/scale) sin^2(theta).  A constant
    scale ~ sqrt(E) keeps theta' of one magnitude through the classical
    region (the unscaled angle has theta' swinging over [1, E - W], which
    wrecks fixed-step accuracy at large E).

    ``w_half`` holds W on the half-step ladder of the integration interval;
    theta starts at 0 (Dirichlet at the left edge).  Nodes of u are exactly
    the multiples of pi, theta is strictly increasing in E, and the n-th
    Dirichlet eigenvalue has terminal phase n pi.
    """
    n_steps = (w_half.size - 1) // 2
    th = 0.0
    for i in range(n_steps):
        w0 = w_half[2 * i]
        wm = w_half[2 * i + 1]
        w1 = w_half[2 * i + 2]
        s = math.sin(th)
        c = math.cos(th)
        k1 = scale * c * c + ((E - w0) / scale) * s * s
        t2 = th + 0.5 * h * k1
        s = math.sin(t2)
        c = math.cos(t2)
        k2 = scale * c * c + ((E - wm) / scale) * s * s
        t3 = th + 0.5 * h * k2
        s = math.sin(t3)
        c = math.cos(t3)
        k3 = scale * c * c + ((E - wm) / scale) * s * s
        t4 = th + h * k3
        s = math.sin(t4)
        c = math.cos(t4)
        k4 = scale * c * c + ((E - w1) / scale) * s * s
        th += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    return th


@njit(cache=True)
def backward_solution(E: float, w_half: np.ndarray, h: float,
                      y0: float, dy0: float) -> tuple:
    """Integrate y'' = (W - E) y from the right end of the ladder down to 0.

    Returns y on the integer nodes (index 0 = leftmost) and y' at the left
    edge.  Integrating toward the classical region is the stable direction
    for the decaying solution.
    """
    n = (w_half.size - 1) // 2
    out = np.empty(n + 1)
    y = y0
    dy = dy0
    out[n] = y
    for i in range(n, 0, -1):
        w1 = w_half[2 * i]
        wm = w_half[2 * i - 1]
        w0 = w_half[2 * i - 2]
        # RK4 with step -h for (y, y')
        k1y = dy
        k1d = (w1 - E) * y
        k2y = dy - 0.5 * h * k1d
        k2d = (wm - E) * (y - 0.5 * h * k1y)
        k3y = dy - 0.5 * h * k2d
        k3d = (wm - E) * (y - 0.5 * h * k2y)
        k4y = dy - h * k3d
        k4d = (w0 - E) * (y - h * k3y)
        y = y - h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
        dy = dy - h * (k1d + 2.0 * k2d + 2.0 * k3d + k4d) / 6.0
        out[i - 1] = y
    return out, dy
