"""Grushin spectral layer: multi-index inversion, gaps, Plancherel density.

The operator -Delta_x - V(x) Delta_y with V(x) = sum_j V_j(x_j) diagonalises,
after a partial Fourier transform in y, into one-dimensional Schrodinger
operators -d2/dx_j2 + xi V_j at xi = |eta|^2.  Everything here is built from
their eigendata:

- Sigma_n(xi) = sum_j E_{n_j}(xi) and its inverse Xi_n(lambda);
- transition-point vectors and the scaled gaps between them;
- the weighted Plancherel density, a multi-index eigenfunction sum whose
  uniform boundedness is the quantitative heart of the multiplier estimate;
- exact spectral-side Plancherel norms for compactly supported multipliers;
- the quasi-distance and ball volume of the underlying doubling geometry.

For pure power potentials the xi-dependence of all eigendata follows an
exact scaling identity, so one spectrum per coordinate feeds every (n,
lambda) query; perturbed coordinates fall back to fresh solves per xi.

Multi-index sums are truncated by octave doubling: the mass of successive
dyadic shells decays geometrically, the remainder is extrapolated from the
last shell ratio, and the truncation radius grows until the estimated tail
clears the target (or a cap is hit, in which case the report says so --
for the smallest weight exponents the tail closes only slowly and the
honest answer is a tail estimate, not a silent cut).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from semispec.potentials import Potential, check_membership
from semispec.schrodinger import SolverConfig, solve_eigen
from semispec.special import _gauss_nodes, _gauss_weights

__all__ = [
    "GrushinModel",
    "MultiIndexFrame",
    "DensityPoint",
    "PlancherelReport",
    "GapReport",
    "SumIntegralReport",
    "sigma_of_xi",
    "sigma_xi",
    "transition_vector",
    "gap_statistic",
    "admissible_pairs",
    "plancherel_density",
    "plancherel_report",
    "default_query_points",
    "spectral_l2_norm",
    "quasi_distance",
    "ball_volume",
    "geometry",
    "ef_factor_constant",
    "sum_vs_integral_check",
]


class TailNotClosing(RuntimeError):
    pass


class CoordinateSpectrum:
    """Eigendata for one coordinate potential, with scaling shortcuts.

    For homogeneous (pure power) potentials, eigendata at any xi follow from
    the xi = 1 tables via E_m(xi) = xi^(2/(2+d)) E_m(1),
    psi_{m,xi}(x) = t^(1/2) psi_{m,1}(t x) and x_m(xi) = x_m(1)/t with
    t = xi^(1/(2+d)).  Otherwise eigenpairs are solved per (m, xi) and
    cached.
    """

    def __init__(self, V: Potential, cfg: SolverConfig | None = None):
        self.V = V
        self.d = V.d
        self.cfg = cfg or SolverConfig()
        self.homogeneous = V.spec.family == "power"
        self._e1: list[float] = []
        self._x1: list[float] = []
        self._spl: dict[int, tuple] = {}
        self._fresh: dict = {}

    def ensure(self, n: int) -> None:
        for m in range(len(self._e1) + 1, n + 1):
            pair = solve_eigen(self.V, 1.0, m, self.cfg)
            self._e1.append(pair.energy)
            self._x1.append(pair.x_plus)
            self._store_spline(m, pair)

    def _store_spline(self, m, pair):
        half = pair.grid >= 0.0
        g, v = pair.grid[half], pair.psi[half]
        lam_min = 2.0 * math.pi / math.sqrt(pair.energy)
        stride = max(1, int((lam_min / 24.0) / (g[1] - g[0])))
        gs, vs = g[::stride], v[::stride]
        if gs[-1] != g[-1]:
            gs = np.append(gs, g[-1])
            vs = np.append(vs, v[-1])
        self._spl[m] = (CubicSpline(gs, vs), float(g[-1]))

    def _scale(self, xi: float) -> float:
        return xi ** (1.0 / (2.0 + self.d))

    def energy(self, m: int, xi: float) -> float:
        if self.homogeneous:
            self.ensure(m)
            return xi ** (2.0 / (2.0 + self.d)) * self._e1[m - 1]
        return self._fresh_pair(m, xi).energy

    def denergy(self, m: int, xi: float) -> float:
        if self.homogeneous:
            return 2.0 * self.energy(m, xi) / ((2.0 + self.d) * xi)
        p = self._fresh_pair(m, xi)
        vv = np.asarray(self.V.eval_k(p.grid, 0), dtype=float)
        return float(simpson(vv * p.psi**2, x=p.grid))

    def x_plus(self, m: int, xi: float) -> float:
        if self.homogeneous:
            self.ensure(m)
            return self._x1[m - 1] / self._scale(xi)
        return self._fresh_pair(m, xi).x_plus

    def psi_sq(self, m: int, xi, x):
        """|psi_{m, xi}(x)|^2, vectorised over xi and/or x (broadcast)."""
        xi_arr = np.asarray(xi, dtype=float)
        x_arr = np.asarray(x, dtype=float)
        if self.homogeneous:
            self.ensure(m)
            spline, win = self._spl[m]
            t = xi_arr ** (1.0 / (2.0 + self.d))
            arg = np.abs(t * x_arr)
            val = np.where(arg <= win, spline(np.minimum(arg, win)), 0.0)
            return t * val * val
        if xi_arr.ndim == 0:
            spline, win = self._fresh_spline(m, float(xi_arr))
            arg = np.abs(x_arr)
            val = np.where(arg <= win, spline(np.minimum(arg, win)), 0.0)
            return val * val
        out = np.empty(np.broadcast(xi_arr, x_arr).shape)
        xi_b, x_b = np.broadcast_arrays(xi_arr, x_arr)
        for idx in np.ndindex(out.shape):
            spline, win = self._fresh_spline(m, float(xi_b[idx]))
            a = abs(float(x_b[idx]))
            out[idx] = spline(min(a, win)) ** 2 if a <= win else 0.0
        return out

    def _fresh_pair(self, m, xi):
        key = (m, round(float(xi), 13))
        if key not in self._fresh:
            cfg = SolverConfig(validate=self.cfg.validate and xi == 1.0)
            self._fresh[key] = (solve_eigen(self.V, float(xi), m, cfg), None)
        return self._fresh[key][0]

    def _fresh_spline(self, m, xi):
        key = (m, round(float(xi), 13))
        pair, spl = self._fresh.get(key, (None, None))
        if pair is None:
            pair = self._fresh_pair(m, xi)
            spl = None
        if spl is None:
            half = pair.grid >= 0.0
            spl = (CubicSpline(pair.grid[half], pair.psi[half]),
                   float(pair.grid[-1]))
            self._fresh[key] = (pair, spl)
        return spl


class GrushinModel:
    """Degenerate-elliptic model -Delta_x - sum_j V_j(x_j) Delta_y."""

    def __init__(self, d1: int, d2: int, sigma: float, potentials, certify: bool = True):
        if len(potentials) != d1:
            raise ValueError("need one coordinate potential per x dimension")
        if not sigma > 0.5:
            raise ValueError("sigma must exceed 1/2")
        self.d1 = int(d1)
        self.d2 = int(d2)
        self.sigma = float(sigma)
        self.potentials = list(potentials)
        if certify:
            for j, V in enumerate(self.potentials):
                rep = check_membership(V, 2.0 * sigma, require_convex=True)
                if not rep.is_member:
                    raise ValueError(f"coordinate {j}: not certified ({rep.reason})")
        self._spectra = [CoordinateSpectrum(V) for V in self.potentials]

    @property
    def Q(self) -> float:
        return self.d1 + (1.0 + self.sigma) * self.d2

    @property
    def D(self) -> float:
        return max(self.d1 + self.d2, (1.0 + self.sigma) * self.d2)

    @property
    def homogeneous(self) -> bool:
        return all(s.homogeneous for s in self._spectra)

    def spectrum(self, j: int) -> CoordinateSpectrum:
        return self._spectra[j]


@dataclass
class MultiIndexFrame:
    n: tuple
    lam: float
    xi: float            # Xi_n(lambda)
    dxi: float           # Xi_n'(lambda)
    x_tilde: tuple       # transition vector at (n, lambda)


def sigma_of_xi(model: GrushinModel, n, xi: float) -> float:
    """Sigma_n(xi) = sum_j E_{n_j}(xi)."""
    return sum(model.spectrum(j).energy(int(n[j]), xi) for j in range(model.d1))


def _xi_of_lambda(model: GrushinModel, n, lam: float) -> float:
    if model.homogeneous:
        s = sum(model.spectrum(j).energy(int(n[j]), 1.0) for j in range(model.d1))
        return (lam / s) ** (1.0 + model.sigma)
    s = sum(model.spectrum(j).energy(int(n[j]), 1.0) for j in range(model.d1))
    guess = (lam / s) ** (1.0 + model.sigma)
    lo, hi = guess / 8.0, guess * 8.0
    while sigma_of_xi(model, n, lo) > lam:
        lo /= 8.0
    while sigma_of_xi(model, n, hi) < lam:
        hi *= 8.0
    return brentq(lambda xi: sigma_of_xi(model, n, xi) - lam, lo, hi,
                  xtol=1e-300, rtol=8.881784197001252e-16)


def sigma_xi(model: GrushinModel, n, lam: float) -> MultiIndexFrame:
    """Invert Sigma_n at lambda; the derivative comes from Feynman-Hellmann.

    Xi' = 1 / Sigma'(Xi) with Sigma'(xi) = sum_j dE_{n_j}/dxi, each term the
    integral of V_j against the squared coordinate eigenfunction.
    """
    n = tuple(int(v) for v in n)
    xi = _xi_of_lambda(model, n, lam)
    dsigma = sum(model.spectrum(j).denergy(n[j], xi) for j in range(model.d1))
    x_t = tuple(model.spectrum(j).x_plus(n[j], xi) for j in range(model.d1))
    return MultiIndexFrame(n=n, lam=float(lam), xi=float(xi),
                           dxi=1.0 / float(dsigma), x_tilde=x_t)


def transition_vector(model: GrushinModel, n, lam: float) -> tuple:
    """Component-wise roots of Xi_n(lambda) V_j(x) = E_{n_j}(Xi_n(lambda))."""
    return sigma_xi(model, n, lam).x_tilde


@dataclass
class GapReport:
    min_scaled_gap: float
    argmin_pair: tuple
    n_pairs: int
    k0: int
    lam: float


def admissible_pairs(d1: int, n_cap: int, k0: int, count: int, seed: int = 0) -> list:
    """Random index pairs whose nonzero component differences all reach k0."""
    rng = np.random.default_rng(seed)
    pairs = []
    guard = 0
    while len(pairs) < count and guard < 100 * count:
        guard += 1
        a = tuple(int(v) for v in rng.integers(1, n_cap + 1, size=d1))
        b = tuple(int(v) for v in rng.integers(1, n_cap + 1, size=d1))
        diffs = [abs(x - y) for x, y in zip(a, b) if x != y]
        if diffs and min(diffs) >= k0:
            pairs.append((a, b))
    if len(pairs) < count:
        raise ValueError("could not sample enough admissible pairs")
    return pairs


def gap_statistic(model: GrushinModel, lam: float, index_pairs, k0: int = 18) -> GapReport:
    """Minimum scaled transition-point gap over admissible index pairs."""
    best = math.inf
    arg = None
    for a, b in index_pairs:
        diffs = [abs(x - y) for x, y in zip(a, b) if x != y]
        if not diffs or min(diffs) < k0:
            raise ValueError(f"pair {a}, {b} violates the K0 = {k0} precondition")
        xa = transition_vector(model, a, lam)
        xb = transition_vector(model, b, lam)
        gap = math.sqrt(lam) * max(abs(xb[j] - xa[j])
                                   for j in range(model.d1) if a[j] != b[j])
        if gap < best:
            best, arg = gap, (a, b)
    if not best > 0.0:
        raise AssertionError("scaled transition gap is not strictly positive")
    return GapReport(min_scaled_gap=float(best), argmin_pair=arg,
                     n_pairs=len(index_pairs), k0=k0, lam=float(lam))


# -- Plancherel density ---------------------------------------------------


def _density_exponents(model: GrushinModel, gamma: float):
    sig = model.sigma
    p_lam = gamma / sig + 1.0 - (model.d1 + model.d2) / 2.0
    p_xi = gamma / sig + 1.0 - model.d2 / 2.0
    return p_lam, p_xi


def _block_sum_1d(model, lam, x, p_lam, p_xi, m_lo, m_hi) -> float:
    sp = model.spectrum(0)
    sp.ensure(m_hi)
    if model.homogeneous:
        e1 = np.asarray(sp._e1[m_lo - 1:m_hi], dtype=float)
        xi = (lam / e1) ** (1.0 + model.sigma)
        dxi = (1.0 + model.sigma) * xi / lam
    else:
        frames = [sigma_xi(model, (m,), lam) for m in range(m_lo, m_hi + 1)]
        xi = np.array([f.xi for f in frames])
        dxi = np.array([f.dxi for f in frames])
    total = 0.0
    for i, m in enumerate(range(m_lo, m_hi + 1)):
        psi2 = float(sp.psi_sq(m, xi[i], x[0]))
        total += lam**p_lam * xi[i] ** (-p_xi) * psi2 * dxi[i]
    return total


def _block_sum_2d(model, lam, x, p_lam, p_xi, block) -> float:
    """Sum over the index set ``block`` = (range1, range2), homogeneous path."""
    sp1, sp2 = model.spectrum(0), model.spectrum(1)
    r1, r2 = block
    sp1.ensure(r1[-1])
    sp2.ensure(r2[-1])
    e1 = np.asarray(sp1._e1, dtype=float)[np.asarray(r1) - 1]
    e2 = np.asarray(sp2._e1, dtype=float)[np.asarray(r2) - 1]
    s = e1[:, None] + e2[None, :]
    xi = (lam / s) ** (1.0 + model.sigma)
    dxi = (1.0 + model.sigma) * xi / lam
    psi1 = np.empty_like(xi)
    for i, m in enumerate(r1):
        psi1[i, :] = sp1.psi_sq(m, xi[i, :], x[0])
    psi2 = np.empty_like(xi)
    for k, m in enumerate(r2):
        psi2[:, k] = sp2.psi_sq(m, xi[:, k], x[1])
    terms = lam**p_lam * xi ** (-p_xi) * psi1 * psi2 * dxi
    return float(np.sum(terms))


def _partial_sum(model, lam, x, p_lam, p_xi, n_lo, n_hi) -> float:
    """Mass of the dyadic shell n_lo < |n|_inf <= n_hi."""
    if model.d1 == 1:
        return _block_sum_1d(model, lam, x, p_lam, p_xi, n_lo + 1, n_hi)
    if model.d1 == 2:
        if not model.homogeneous:
            total = 0.0
            for m1 in range(1, n_hi + 1):
                lo2 = n_lo + 1 if m1 <= n_lo else 1
                for m2 in range(lo2, n_hi + 1):
                    f = sigma_xi(model, (m1, m2), lam)
                    psi2 = float(model.spectrum(0).psi_sq(m1, f.xi, x[0])) \
                        * float(model.spectrum(1).psi_sq(m2, f.xi, x[1]))
                    total += lam**p_lam * f.xi ** (-p_xi) * psi2 * f.dxi
            return total
        full = range(1, n_hi + 1)
        new = range(n_lo + 1, n_hi + 1)
        old = range(1, n_lo + 1)
        t = _block_sum_2d(model, lam, x, p_lam, p_xi, (new, full))
        if n_lo >= 1:
            t += _block_sum_2d(model, lam, x, p_lam, p_xi, (old, new))
        return t
    raise NotImplementedError("d1 <= 2 at desk scale")


@dataclass
class DensityPoint:
    lam: float
    x: tuple
    gamma: float
    value: float
    n_max: int
    tail_estimate: float
    closed: bool


def plancherel_density(model: GrushinModel, lam: float, x, gamma: float,
                       n_start: int = 16, tail_target: float = 0.01,
                       n_cap: int = 1024, strict: bool = False) -> DensityPoint:
    """Weighted Plancherel density at one (lambda, x, gamma) query.

    value = max(lambda^-1/2, |x|)^(d2 sigma - 2 gamma) times the truncated
    multi-index sum; the tail is extrapolated geometrically from the last
    dyadic shell.  The truncation radius doubles until the tail estimate
    clears ``tail_target`` relative to the partial sum; if the cap is hit
    first the point is flagged (or raises, under ``strict``).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != model.d1:
        raise ValueError("query point must have d1 components")
    if not 0.0 <= gamma < model.d2 * model.sigma / 2.0:
        raise ValueError("gamma must lie in [0, d2 sigma / 2)")
    p_lam, p_xi = _density_exponents(model, gamma)
    weight = max(lam ** (-0.5), float(np.linalg.norm(x))) ** (
        model.d2 * model.sigma - 2.0 * gamma)

    n_hi = n_start
    total = _partial_sum(model, lam, x, p_lam, p_xi, 0, n_hi)
    prev_shell = None
    tail = math.inf
    closed = False
    while True:
        shell = _partial_sum(model, lam, x, p_lam, p_xi, n_hi, 2 * n_hi)
        n_hi *= 2
        total += shell
        if shell == 0.0:
            tail, closed = 0.0, True
            break
        # geometric remainder from two consecutive dyadic shells; the head
        # of the sum is not a shell and must not enter the ratio
        if prev_shell is not None and shell < prev_shell:
            q = shell / prev_shell
            tail = shell * q / (1.0 - q)
            if tail <= tail_target * total:
                closed = True
                break
        prev_shell = shell
        if n_hi >= n_cap:
            break
    if strict and not closed:
        raise TailNotClosing(
            f"tail estimate {tail:.3g} vs partial {total:.3g} at n_max={n_hi} "
            f"(lambda={lam:.3g}, gamma={gamma:.3g})")
    return DensityPoint(lam=float(lam), x=tuple(float(v) for v in x),
                        gamma=float(gamma), value=float(weight * total),
                        n_max=n_hi, tail_estimate=float(weight * tail),
                        closed=closed)


def default_query_points(model: GrushinModel, lam: float, n_ref: int = 3) -> list:
    """Representative x queries: origin, lambda^-1/2 shell, transition scale."""
    ones = np.ones(model.d1) / math.sqrt(model.d1)
    x_t = np.asarray(transition_vector(model, (n_ref,) * model.d1, lam))
    pts = [np.zeros(model.d1), lam ** (-0.5) * ones, -(lam ** (-0.5)) * ones,
           x_t, -x_t, 0.5 * x_t]
    return [tuple(float(v) for v in p) for p in pts]


@dataclass
class PlancherelReport:
    points: list               # DensityPoint records
    sup_value: float
    all_closed: bool
    model_desc: dict

    def to_json(self) -> str:
        return json.dumps({
            "sup_value": self.sup_value,
            "all_closed": self.all_closed,
            "model": self.model_desc,
            "points": [asdict(p) for p in self.points],
        })

    def to_csv(self, path):
        rows = [[p.lam, *p.x, p.gamma, p.value, p.n_max, p.tail_estimate]
                for p in self.points]
        d1 = len(self.points[0].x)
        header = "lambda," + ",".join(f"x{j+1}" for j in range(d1)) \
            + ",gamma,value,n_max,tail"
        np.savetxt(path, np.asarray(rows), delimiter=",", header=header, comments="")


def plancherel_report(model: GrushinModel, lams, gammas, xs=None,
                      n_start: int = 16, tail_target: float = 0.01,
                      n_cap: int = 1024) -> PlancherelReport:
    pts = []
    for lam in lams:
        queries = xs if xs is not None else default_query_points(model, float(lam))
        for gamma in gammas:
            for x in queries:
                pts.append(plancherel_density(model, float(lam), x, float(gamma),
                                              n_start=n_start,
                                              tail_target=tail_target,
                                              n_cap=n_cap))
    return PlancherelReport(
        points=pts,
        sup_value=max(p.value for p in pts),
        all_closed=all(p.closed for p in pts),
        model_desc={"d1": model.d1, "d2": model.d2, "sigma": model.sigma,
                    "Q": model.Q, "D": model.D})


# -- exact spectral Plancherel norm ---------------------------------------


def _radial_constant(d2: int) -> float:
    return math.pi ** (d2 / 2.0) / (math.gamma(d2 / 2.0) * (2.0 * math.pi) ** d2)


def spectral_l2_norm(model: GrushinModel, F, support: tuple, x_prime,
                     rel_tol: float = 0.005, n_start: int = 8,
                     n_cap: int = 512) -> float:
    """L2 kernel norm of F(L, |T|^2 radial part) at column x_prime.

    Computes C_{d2} * sum_n int |F(Sigma_n(xi))|^2 |psi_{n,xi}(x')|^2
    xi^(d2/2 - 1) d xi by the substitution lambda = Sigma_n(xi), truncating
    the index sum by octave doubling.
    """
    a, b = float(support[0]), float(support[1])
    if not 0.0 < a < b or not math.isfinite(b):
        raise ValueError("F must be supported in a compact subinterval of (0, inf)")
    x_prime = np.atleast_1d(np.asarray(x_prime, dtype=float))

    nodes = 0.5 * (a + b) + 0.5 * (b - a) * _gauss_nodes
    wts = 0.5 * (b - a) * _gauss_weights
    fvals = np.array([abs(F(float(l))) ** 2 for l in nodes])

    def index_term(n) -> float:
        acc = 0.0
        for l_node, w_node, f2 in zip(nodes, wts, fvals):
            if f2 == 0.0:
                continue
            fr = sigma_xi(model, n, float(l_node))
            psi2 = 1.0
            for j in range(model.d1):
                psi2 *= float(model.spectrum(j).psi_sq(n[j], fr.xi, x_prime[j]))
            acc += w_node * f2 * psi2 * fr.xi ** (model.d2 / 2.0 - 1.0) * fr.dxi
        return acc

    def shell(n_lo, n_hi) -> float:
        tot = 0.0
        for n in _shell_indices(model.d1, n_lo, n_hi):
            tot += index_term(n)
        return tot

    total = shell(0, n_start)
    prev = None
    n_hi = n_start
    while n_hi < n_cap:
        s = shell(n_hi, 2 * n_hi)
        n_hi *= 2
        total += s
        if s == 0.0:
            break
        if prev is not None and s < prev:
            q = s / prev
            if s * q / (1.0 - q) <= rel_tol * total:
                break
        prev = s
    return _radial_constant(model.d2) * total


def _shell_indices(d1: int, n_lo: int, n_hi: int):
    if d1 == 1:
        for m in range(n_lo + 1, n_hi + 1):
            yield (m,)
    elif d1 == 2:
        for m1 in range(1, n_hi + 1):
            lo2 = n_lo + 1 if m1 <= n_lo else 1
            for m2 in range(lo2, n_hi + 1):
                yield (m1, m2)
    else:
        raise NotImplementedError("d1 <= 2 at desk scale")


# -- geometry --------------------------------------------------------------


def quasi_distance(model: GrushinModel, z, zp) -> float:
    """|x - x'| + min(|y - y'|^(1/(1+sigma)), |y - y'| / (|x| + |x'|)^sigma).

    A two-sided comparison expression for the control distance, not the
    distance itself; symmetric, vanishing iff z = z', quasi-triangle only.
    """
    x, y = (np.atleast_1d(np.asarray(p, dtype=float)) for p in z)
    xp, yp = (np.atleast_1d(np.asarray(p, dtype=float)) for p in zp)
    dy = float(np.linalg.norm(y - yp))
    xsum = float(np.linalg.norm(x) + np.linalg.norm(xp))
    first = dy ** (1.0 / (1.0 + model.sigma))
    second = dy / xsum**model.sigma if xsum > 0.0 else math.inf
    return float(np.linalg.norm(x - xp)) + min(first, second)


def ball_volume(model: GrushinModel, z, r: float) -> float:
    """Comparison volume r^(d1+d2) max(r, |x|)^(sigma d2) of the r-ball at z."""
    x = np.atleast_1d(np.asarray(z[0], dtype=float))
    return r ** (model.d1 + model.d2) * max(r, float(np.linalg.norm(x))) ** (
        model.sigma * model.d2)


def geometry(model: GrushinModel, z, zp, r: float = 1.0) -> dict:
    return {
        "distance_estimate": quasi_distance(model, z, zp),
        "volume_z_r": ball_volume(model, z, r),
        "volume_z_2r": ball_volume(model, z, 2.0 * r),
        "doubling_exponent": model.Q,
    }


# -- per-factor eigenfunction bound and lattice sum check ------------------


def ef_factor_constant(model: GrushinModel, lams, n_list, points_per_axis: int = 40) -> float:
    """Uniform constant in the per-factor transition-scale bound.

    ratio = lambda^-1/2 psi_j^2 * (lam^1/2 xt_j)^(1/2)
            * (1 + | lam^1/2 |x_j| - lam^1/2 xt_j |)^(1/2), maximised over a
    grid of x_j spanning [0, 3 xt_j].
    """
    worst = 0.0
    for lam in lams:
        for n in n_list:
            fr = sigma_xi(model, n, float(lam))
            for j in range(model.d1):
                xt = fr.x_tilde[j]
                xs = np.linspace(0.0, 3.0 * xt, points_per_axis)
                psi2 = np.asarray(model.spectrum(j).psi_sq(n[j], fr.xi, xs), dtype=float)
                ratio = (lam ** (-0.5) * psi2
                         * math.sqrt(math.sqrt(lam) * xt)
                         * np.sqrt(1.0 + np.abs(math.sqrt(lam) * np.abs(xs)
                                                - math.sqrt(lam) * xt)))
                worst = max(worst, float(np.max(ratio)))
    return worst


@dataclass
class SumIntegralReport:
    holds: bool
    lhs: float
    rhs: float
    hypotheses_ok: bool
    notes: str


def sum_vs_integral_check(H, points, classes, omega, r: float, kappa: float,
                          grid_n: int = 3000) -> SumIntegralReport:
    """Check sum_{u in P} H(u) <= e kappa^3 int_Omega H on a 1-d instance.

    Hypotheses verified numerically: log-Lipschitz constant of H at most
    kappa on Omega, |B_r(u) cap Omega| >= 1/kappa, at most kappa classes,
    and 2r-separation within each class.  Violations are reported, not
    asserted.
    """
    a, b = float(omega[0]), float(omega[1])
    xs = np.linspace(a + 1e-9 * (b - a), b - 1e-9 * (b - a), grid_n)
    hv = np.asarray([float(H(x)) for x in xs])
    notes = []
    ok = True
    if np.any(hv <= 0.0):
        ok = False
        notes.append("H is not positive on Omega")
    grad = np.abs(np.gradient(hv, xs))[1:-1]  # one-sided endpoint stencils excluded
    if np.max(grad / hv[1:-1]) > kappa * (1.0 + 1e-4):
        ok = False
        notes.append(f"log-Lipschitz constant {np.max(grad/hv[1:-1]):.3g} exceeds kappa")
    pts = [float(u) for u in points]
    for u in pts:
        if not a < u < b:
            ok = False
            notes.append(f"point {u} outside Omega")
        if min(u + r, b) - max(u - r, a) < 1.0 / kappa - 1e-12:
            ok = False
            notes.append(f"ball mass at {u} below 1/kappa")
    if len(classes) > kappa + 1e-9:
        ok = False
        notes.append("more than kappa classes")
    for cls in classes:
        cs = sorted(float(pts[i]) for i in cls)
        if any(cs[i + 1] - cs[i] < 2.0 * r - 1e-12 for i in range(len(cs) - 1)):
            ok = False
            notes.append("class separation below 2r")
    lhs = float(sum(float(H(u)) for u in pts))
    rhs = math.e * kappa**3 * float(simpson(hv, x=xs))
    return SumIntegralReport(holds=bool(lhs <= rhs), lhs=lhs, rhs=rhs,
                             hypotheses_ok=ok, notes="; ".join(notes))
