"""Bohr-Sommerfeld counting, its inversion, and action integrals.

The counting function N(E) = (1/pi) int sqrt(E - xi V) over the classical
region approximates the level index n with an error bounded by the absolute
constant 8 + 5/(2 pi^2) for even convex potentials.  From that constant the
integer gap parameter K0 used by the multi-index separation estimates is
derived (smallest integer with (K0 - 1)/2 at or above the bound), not
assumed.

Also provided: the reduced per-coordinate action H(t) with its derivative
band against sqrt(V), and the auxiliary point y < x_plus where
V'(y) / (E - V(y))^(3/2) = 1/pi, which controls how many oscillator nodes
can hide between y and the transition point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.optimize import brentq

from semispec.potentials import Potential
from semispec.schrodinger import SolverConfig, solve_eigen, transition_points
from semispec.special import integrate

__all__ = [
    "BS_ERROR_BOUND",
    "K0_GAP",
    "BSReport",
    "bs_count",
    "bs_invert",
    "bs_report",
    "action_H",
    "action_derivative_band",
    "y_point",
]

BS_ERROR_BOUND = 8.0 + 5.0 / (2.0 * math.pi**2)
# smallest positive integer K with (K - 1) / 2 >= BS_ERROR_BOUND
K0_GAP = int(math.ceil(2.0 * BS_ERROR_BOUND + 1.0))


def bs_count(V: Potential, xi: float, E: float, rel_tol: float = 1e-8) -> float:
    """N(E) = (1/pi) int_{x-}^{x+} sqrt(E - xi V), sqrt-singular at both ends."""
    x_m, x_p = transition_points(V, xi, E)

    def f(x):
        return np.sqrt(np.maximum(E - xi * np.asarray(V.eval_k(x, 0), dtype=float), 0.0))

    rough = (x_p - x_m) * math.sqrt(E) / math.pi
    val = integrate(f, x_m, x_p, mode="sqrt_both", tol=rel_tol * max(rough, 1.0))
    return val / math.pi


def bs_invert(V: Potential, xi: float, n: int, rel_tol: float = 1e-8) -> float:
    """Solve N(E) = n by bisection; N is strictly increasing in E.

    The initial bracket comes from the eigenvalue growth law
    E ~ xi^(2/(2+d)) n^(2d/(2+d)).
    """
    d = V.d
    v1 = float(V.eval_k(1.0, 0))
    guess = (xi * v1) ** (2.0 / (2.0 + d)) * (2.0 * n) ** (2.0 * d / (2.0 + d))
    lo, hi = guess / 8.0, guess * 8.0
    while bs_count(V, xi, lo, rel_tol=1e-6) > n:
        lo /= 8.0
    while bs_count(V, xi, hi, rel_tol=1e-6) < n:
        hi *= 8.0
    return brentq(lambda E: bs_count(V, xi, E, rel_tol=rel_tol) - n, lo, hi,
                  xtol=1e-300, rtol=max(rel_tol, 8.9e-16))


@dataclass
class BSReport:
    """Per-level counting errors |n - N(E_n)| against the absolute bound."""

    records: list          # dicts {n, energy, count, error}
    max_error: float
    bound: float
    xi: float
    potential: str

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    def to_csv(self, path):
        rows = np.array([[r["n"], r["energy"], r["count"], r["error"]]
                         for r in self.records])
        np.savetxt(path, rows, delimiter=",", header="n,E,N,error", comments="")


def bs_report(V: Potential, xi: float, n_max: int,
              cfg: SolverConfig | None = None,
              energies: dict | None = None) -> BSReport:
    """Counting errors for levels 1..n_max; energies may be passed in."""
    records = []
    for n in range(1, n_max + 1):
        E = energies[n] if energies else solve_eigen(V, xi, n, cfg).energy
        count = bs_count(V, xi, E)
        records.append({"n": n, "energy": E, "count": count,
                        "error": abs(n - count)})
    max_err = max(r["error"] for r in records)
    return BSReport(records=records, max_error=max_err, bound=BS_ERROR_BOUND,
                    xi=xi, potential=repr(V))


def action_H(V: Potential, t: float, rel_tol: float = 1e-9) -> float:
    """Reduced action H(t) = (2/pi) int_0^t sqrt(V(t) - V(s)) ds."""
    if t <= 0.0:
        return 0.0
    vt = float(V.eval_k(t, 0))

    def f(s):
        return np.sqrt(np.maximum(vt - np.asarray(V.eval_k(s, 0), dtype=float), 0.0))

    rough = t * math.sqrt(vt)
    val = integrate(f, 0.0, t, mode="sqrt_endpoint_b", tol=rel_tol * max(rough, 1e-12))
    return 2.0 * val / math.pi


def action_derivative_band(V: Potential, ts) -> tuple[float, float]:
    """Range of H'(t) / sqrt(V(t)) over ``ts``, derivative by centred differences."""
    ratios = []
    for t in np.asarray(ts, dtype=float):
        h = 1e-5 * t
        dh = (action_H(V, t + h) - action_H(V, t - h)) / (2.0 * h)
        ratios.append(dh / math.sqrt(float(V.eval_k(t, 0))))
    return float(np.min(ratios)), float(np.max(ratios))


def y_point(V: Potential, xi: float, E: float) -> float:
    """The unique y in (0, x_plus) with xi V'(y) / (E - xi V(y))^(3/2) = 1/pi."""
    x_p = transition_points(V, xi, E)[1]

    def g(y):
        num = xi * float(V.eval_k(y, 1))
        den = (E - xi * float(V.eval_k(y, 0))) ** 1.5
        return num / den - 1.0 / math.pi

    lo = 1e-9 * x_p
    hi = x_p * (1.0 - 1e-12)
    return brentq(g, lo, hi, xtol=1e-14 * x_p, rtol=8.881784197001252e-16)
