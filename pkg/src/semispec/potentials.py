"""Even power-law potentials, scale-invariant perturbations, and certificates.

A potential here is an even function V with V(0) = 0, strictly increasing on
the positive half-line, carrying analytically coded derivatives up to order
three.  Built-in families:

- ``power``:          V(t) = xi |t|^(2 sigma)
- ``log_perturbed``:  V(t) = xi |t|^(2 sigma) (1 + eps cos(log|t| + phase))
- ``custom_table``:   monotone cubic interpolation of user samples

The log-perturbed family is the canonical scale-invariant C^3 perturbation:
every derivative of t^a (c + A cos log t + B sin log t) has the same shape
with (a, c, A, B) -> (a-1, a c, a A + B, a B - A), so all four class ratios
are uniform in t by construction.

``check_membership`` certifies, by grid maximisation, membership in the
class of potentials comparable to |t|^d together with their first three
derivatives.  Ratios are normalised by the pure power law's own derivative
coefficients, so the pure power certifies with kappa = 1 exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

__all__ = [
    "PotentialSpec",
    "Potential",
    "ClassReport",
    "make_potential",
    "check_membership",
    "rescale",
]

_FAMILIES = ("power", "log_perturbed", "custom_table")


@dataclass(frozen=True)
class PotentialSpec:
    """Declarative description of a potential.

    ``phase`` enters only the log-perturbed family; it is what keeps that
    family closed under rescaling (the perturbation picks up a log-shift).
    """

    family: str
    sigma: float
    epsilon: float = 0.0
    xi: float = 1.0
    phase: float = 0.0
    table: tuple | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not self.sigma > 0.5:
            raise ValueError(f"sigma must exceed 1/2, got {self.sigma}")
        if self.xi <= 0.0:
            raise ValueError("xi must be positive")
        if self.family == "custom_table" and self.table is None:
            raise ValueError("custom_table requires a (t, V) table")

    def to_json(self) -> str:
        d = asdict(self)
        if d["table"] is not None:
            d["table"] = [list(map(float, row)) for row in d["table"]]
        return json.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "PotentialSpec":
        d = json.loads(text)
        if d.get("table") is not None:
            d["table"] = tuple(tuple(row) for row in d["table"])
        return cls(**{k: d[k] for k in ("family", "sigma", "epsilon", "xi", "phase", "table") if k in d})


@dataclass(frozen=True)
class ClassReport:
    """Result of a grid-based class-membership certification."""

    is_member: bool
    kappa_estimate: float
    worst_ratio_location: float
    grid_spec: str
    convex: bool = True
    reason: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self))


class Potential:
    """Even potential with evaluators for derivatives 0..3.

    Immutable after construction; evaluators are pure, numpy-vectorised and
    safe for concurrent use.
    """

    def __init__(self, spec: PotentialSpec):
        self.spec = spec
        self.d = 2.0 * spec.sigma
        if spec.family in ("power", "log_perturbed"):
            # level-k representation: xi * t^a (c + A cos log t + B sin log t)
            a = self.d
            c = 1.0
            A = spec.epsilon * math.cos(spec.phase)
            B = -spec.epsilon * math.sin(spec.phase)
            levels = [(a, c, A, B)]
            for _ in range(3):
                a, c, A, B = a - 1.0, a * c, a * A + B, a * B - A
                levels.append((a, c, A, B))
            self._levels = levels
            # V' > 0 on R+ iff the level-1 trigonometric amplitude stays
            # below its constant term
            _, c1, A1, B1 = levels[1]
            if math.hypot(A1, B1) >= c1:
                raise ValueError(
                    f"epsilon={spec.epsilon} makes V' change sign on the positive half-line "
                    f"(amplitude {math.hypot(A1, B1):.3g} >= {c1:.3g})")
            self._pchip = None
        else:
            from scipy.interpolate import PchipInterpolator

            t_tab = np.asarray([row[0] for row in spec.table], dtype=float)
            v_tab = np.asarray([row[1] for row in spec.table], dtype=float)
            if t_tab[0] < 0.0 or np.any(np.diff(t_tab) <= 0.0) or np.any(np.diff(v_tab) <= 0.0):
                raise ValueError("custom table must be increasing in t >= 0 with increasing V")
            p = PchipInterpolator(t_tab, v_tab)
            self._pchip = (p, p.derivative(1), p.derivative(2), float(t_tab[-1]))
            self._levels = None

    def eval_k(self, t, k: int):
        """k-th derivative at t (k in 0..3).  Odd derivatives are odd in t."""
        if k not in (0, 1, 2, 3):
            raise ValueError("k must be in {0, 1, 2, 3}")
        t_arr = np.asarray(t, dtype=float)
        at = np.abs(t_arr)
        if self._levels is not None:
            a, c, A, B = self._levels[k]
            with np.errstate(divide="ignore", invalid="ignore"):
                u = np.log(at)
                val = self.spec.xi * at**a * (c + A * np.cos(u) + B * np.sin(u))
            val = np.where(at == 0.0, 0.0 if (k == 0 or self.d > k) else np.nan, val)
        else:
            val = self._table_eval(at, k)
        if k % 2 == 1:
            val = val * np.sign(t_arr)
        if np.isscalar(t) or t_arr.ndim == 0:
            return float(val)
        return val

    def _table_eval(self, at, k):
        p, p1, p2, tmax = self._pchip
        atc = np.clip(at, 0.0, tmax)
        if k == 0:
            return p(atc)
        if k == 1:
            return p1(atc)
        if k == 2:
            return p2(atc)
        h = np.maximum(1e-3 * np.maximum(atc, 1e-3), 1e-6)
        return (p2(np.clip(atc + h, 0, tmax)) - p2(np.clip(atc - h, 0, tmax))) / (2.0 * h)

    def __call__(self, t):
        return self.eval_k(t, 0)

    def fingerprint(self) -> str:
        import hashlib

        return hashlib.sha256(self.spec.to_json().encode()).hexdigest()[:16]

    def __repr__(self):
        s = self.spec
        return (f"Potential({s.family}, sigma={s.sigma}, eps={s.epsilon}, "
                f"xi={s.xi:.6g}, phase={s.phase:.6g})")


def make_potential(spec: PotentialSpec) -> Potential:
    """Construct a potential with analytic derivatives for built-in families."""
    return Potential(spec)


def _default_grid() -> np.ndarray:
    return np.geomspace(1e-4, 1e4, 4096)


def check_membership(V: Potential, d: float, grid: np.ndarray | None = None,
                     kappa_cap: float = 1e4, require_convex: bool = False) -> ClassReport:
    """Certify comparability of V with |t|^d up to third derivatives.

    kappa_estimate is the grid maximum over the four ratio families, each
    normalised by the corresponding derivative coefficient of the pure power
    law, with the overall multiplier xi-hat fitted as the geometric mean of
    V/t^d.  Membership requires every ratio finite and below ``kappa_cap``;
    the grid certifies, it does not prove.
    """
    if grid is None:
        grid = _default_grid()
    grid = np.asarray(grid, dtype=float)
    grid_spec = f"log grid [{grid.min():.3g}, {grid.max():.3g}] x {grid.size}"
    if grid.min() <= 0.0 or grid.size < 1000:
        raise ValueError("grid must exclude 0 and carry at least 1e3 points")

    v0 = V.eval_k(grid, 0)
    v0_neg = V.eval_k(-grid, 0)
    if np.max(np.abs(v0 - v0_neg)) > 0.0:
        return ClassReport(False, math.inf, float(grid[np.argmax(np.abs(v0 - v0_neg))]),
                           grid_spec, convex=False, reason="potential is not even")
    v1 = V.eval_k(grid, 1)
    if np.min(v1) <= 0.0:
        return ClassReport(False, math.inf, float(grid[np.argmin(v1)]), grid_spec,
                           convex=False, reason="V' <= 0 somewhere on the positive half-line")
    v2 = V.eval_k(grid, 2)
    v3 = V.eval_k(grid, 3)

    xi_hat = math.exp(float(np.mean(np.log(v0 / grid**d))))
    p1 = abs(d)
    p2 = abs(d * (d - 1.0))
    p3 = abs(d * (d - 1.0) * (d - 2.0))

    r0 = v0 / (xi_hat * grid**d)
    fam0 = np.maximum(r0, 1.0 / r0)
    r1 = v1 / (xi_hat * p1 * grid ** (d - 1.0))
    fam1 = np.maximum(r1, 1.0 / r1)
    if p2 > 1e-12:
        fam2 = np.abs(v2) / (xi_hat * p2 * grid ** (d - 2.0))
    else:
        fam2 = np.abs(v2) / (xi_hat * grid ** (d - 2.0))
    if p3 > 1e-12:
        fam3 = np.abs(v3) / (xi_hat * p3 * grid ** (d - 3.0))
    else:
        fam3 = np.abs(v3) / (xi_hat * grid ** (d - 3.0))

    fams = np.vstack([fam0, fam1, fam2, fam3])
    worst_flat = int(np.nanargmax(fams))
    kappa = float(fams.flat[worst_flat])
    worst_t = float(grid[worst_flat % grid.size])
    convex = bool(np.min(v2) >= -1e-12 * np.max(np.abs(v2)))

    ok = bool(np.all(np.isfinite(fams)) and kappa <= kappa_cap)
    reason = "" if ok else f"ratio {kappa:.3g} exceeds cap {kappa_cap:.3g}"
    if require_convex and not convex:
        ok = False
        reason = (reason + "; " if reason else "") + "V'' < 0 somewhere on the grid"
    return ClassReport(ok, kappa, worst_t, grid_spec, convex=convex, reason=reason)


def rescale(V: Potential, t: float) -> Potential:
    """The scaled potential V_t(x) = t^2 V(t x); class and kappa preserved.

    Built-in families stay inside their family: the multiplier becomes
    xi t^(2 + 2 sigma) and the log-perturbation phase shifts by log t.
    """
    if t <= 0.0:
        raise ValueError("scale factor must be positive")
    s = V.spec
    if s.family in ("power", "log_perturbed"):
        return Potential(PotentialSpec(
            family=s.family, sigma=s.sigma, epsilon=s.epsilon,
            xi=s.xi * t ** (2.0 + 2.0 * s.sigma),
            phase=s.phase + math.log(t), table=None))
    t_tab = np.asarray([row[0] for row in s.table], dtype=float) / t
    v_tab = np.asarray([row[1] for row in s.table], dtype=float) * t * t
    return Potential(PotentialSpec(family="custom_table", sigma=s.sigma,
                                   epsilon=s.epsilon, xi=s.xi, phase=s.phase,
                                   table=tuple((float(a), float(b)) for a, b in zip(t_tab, v_tab))))
