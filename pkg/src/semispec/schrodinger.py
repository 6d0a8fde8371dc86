"""Eigenvalues, eigenfunctions and diagnostics for -d2/dx2 + xi V on the line.

The primary solver is phase shooting: the Prufer angle theta, with
tan(theta) = u / u', obeys theta' = cos^2 theta + (E - W) sin^2 theta, its
terminal value is strictly increasing in E, and the n-th Dirichlet
eigenvalue is the unique E with terminal phase n pi.  That makes targeting
the n-th level exact (no level can be skipped or double-counted).

An independent dense symmetric-tridiagonal finite-difference discretisation
(LAPACK bisection, Richardson-extrapolated over two grids) supplies the
bracket and the cross-validation oracle; shooting and matrix results must
agree to 1e-6 relative or the solve errors out.  The oracle is computed in
blocks of levels per (V, xi) and cached, so a whole ladder of n costs one
matrix factorisation.

Eigenfunctions are assembled by integrating backward from the exponential
region (the stable direction) on the positive half-line and reflecting by
parity; potentials here are even, so psi_n(-x) = (-1)^(n-1) psi_n(x).

The integration window [-x_r, x_r] is chosen so the decay integral
S = int sqrt(W - E) past the transition point reaches ~40 e-folds, putting
the Dirichlet truncation error near e^(-80) while keeping solution values
inside float64 range.  The reported domain halfwidth L follows the coarser
rule max(3 x_plus, W = 16 E); psi vanishes to working precision between
x_r and L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.linalg import eigvalsh_tridiagonal
from scipy.optimize import brentq

from semispec._kernels import backward_solution, prufer_theta_end
from semispec.potentials import Potential, PotentialSpec, make_potential, rescale
from semispec.special import _gauss_nodes, _gauss_weights

__all__ = [
    "SolverConfig",
    "Eigenpair",
    "DiagnosticsReport",
    "EigensolveError",
    "ScalingLawReport",
    "solve_eigen",
    "transition_points",
    "diagnostics",
    "riesz_ratio",
    "solve_basis",
    "scaling_law_check",
]

_BRENT_RTOL = 8.881784197001252e-16  # 4 * eps, scipy's minimum


class EigensolveError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for one eigensolve; defaults are auto-selected per (xi, n)."""

    domain_halfwidth: float = 0.0      # 0 -> max(3 x_plus, point where W = 16 E)
    grid_points: int = 2000            # lower bound on integration steps
    shoot_tol: float = 1e-12           # relative Brent tolerance on E
    match_point: float = 0.0           # parity assembly point (x = 0 for even V)
    validate: bool = True              # cross-check against the matrix oracle
    decay_efolds: float = 40.0         # target S past the transition point


@dataclass
class Eigenpair:
    n: int
    energy: float
    grid: np.ndarray                   # symmetric window grid
    psi: np.ndarray                    # L2-normalised, psi > 0 at the right edge
    x_plus: float
    x_minus: float
    xi: float
    domain_halfwidth: float
    window_halfwidth: float
    parity: int
    assembly_residual: float           # |u'(0)| (even) or |u(0)| (odd), scaled
    method_gap: float                  # |E_shoot - E_matrix| / E, nan if unvalidated

    @property
    def sign_convention(self) -> str:
        return "positive at large positive x"


@dataclass
class DiagnosticsReport:
    virial_ratio: float
    zero_count: int
    fh_residual: float
    decay_margin: float
    transition_bound_const: float
    uniform_bound_const: float
    lb_product: float
    decay_delta: float                 # fitted rate in exp(-delta x sqrt(W))


def transition_points(V: Potential, xi: float, E: float) -> tuple[float, float]:
    """Roots of xi V(x) = E on both half-lines; for even V these are +-x_plus."""
    if E <= 0.0:
        raise ValueError("E must be positive")
    hi = 1.0
    while xi * float(V.eval_k(hi, 0)) < E:
        hi *= 2.0
        if hi > 1e12:
            raise EigensolveError("transition point out of range")
    x_plus = brentq(lambda x: xi * float(V.eval_k(x, 0)) - E, 0.0, hi,
                    xtol=1e-300, rtol=_BRENT_RTOL)
    return -float(x_plus), float(x_plus)


def _sqrt_band(V: Potential, xi: float, E: float, a: float, b: float) -> float:
    """int_a^b sqrt(xi V - E) for a, b at or beyond the transition point."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    t = mid + half * _gauss_nodes
    vals = np.sqrt(np.maximum(xi * np.asarray(V.eval_k(t, 0), dtype=float) - E, 0.0))
    return float(half * np.sum(_gauss_weights * vals))


def _decay_integral(V: Potential, xi: float, E: float, x_plus: float, x: float) -> float:
    """Same integral from x_plus, sqrt singularity removed by s^2 = t - x_plus."""
    smax = math.sqrt(max(x - x_plus, 0.0))
    if smax == 0.0:
        return 0.0
    s = 0.5 * smax * (_gauss_nodes + 1.0)
    t = x_plus + s * s
    vals = 2.0 * s * np.sqrt(np.maximum(xi * np.asarray(V.eval_k(t, 0), dtype=float) - E, 0.0))
    return float(0.5 * smax * np.sum(_gauss_weights * vals))


def _window_halfwidth(V: Potential, xi: float, E: float, x_plus: float,
                      efolds: float) -> float:
    """Smallest x_r with W(x_r) >= 1.5 E and decay integral >= ``efolds``."""
    hi = x_plus
    while xi * float(V.eval_k(hi, 0)) < 1.5 * E:
        hi *= 2.0
    x_r = brentq(lambda x: xi * float(V.eval_k(x, 0)) - 1.5 * E, x_plus, hi, xtol=1e-10)
    while _decay_integral(V, xi, E, x_plus, x_r) < efolds:
        x_r *= 1.2
        if x_r > 1e5 * x_plus:
            raise EigensolveError("decay window did not close")
    return float(x_r)


def _step_size(E: float, n: int, x_r: float, grid_points: int) -> float:
    # the h^4 phase bias at this step is removed afterwards by Richardson
    # extrapolation over (h, h/2), so the budget here is deliberately loose
    phase_tol = 5e-8 * (1.0 + n)
    h_acc = (phase_tol * 120.0 / (max(E, 1.0) ** 2.5 * 2.0 * x_r)) ** 0.25
    h_osc = 2.0 * math.pi / (math.sqrt(max(E, 1.0)) * 40.0)
    h = min(h_acc, h_osc, 2.0 * x_r / max(grid_points, 400))
    return max(h, 2.0 * x_r / 4e6)


def _scaling_guess(V: Potential, xi: float, n: int) -> float:
    d = V.d
    v1 = float(V.eval_k(1.0, 0))
    return (xi * v1) ** (2.0 / (2.0 + d)) * (2.0 * n - 1.0) ** (2.0 * d / (2.0 + d))


_oracle_cache: dict = {}


def _oracle_block(V: Potential, xi: float, n: int, efolds: float):
    """Matrix-oracle eigenvalues for the block of levels containing n.

    Levels come in blocks of 64 * 2^k (one tridiagonal factorisation per
    block per (V, xi), so deep ladders touch at most a handful of blocks)
    with Richardson extrapolation over two grids.  Returns
    (value, error_estimate) for level n.
    """
    block = 64
    while block < n:
        block *= 2
    key = (V.fingerprint(), round(float(xi), 12), block)
    if key not in _oracle_cache:
        e_top = 1.1 * _scaling_guess(V, xi, block)
        x_plus = transition_points(V, xi, e_top)[1]
        x_r = _window_halfwidth(V, xi, e_top, x_plus, efolds)
        h_fd = min(0.015 / math.sqrt(1.5 * e_top), x_r / 2000.0)
        n_base = int(math.ceil(2.0 * x_r / h_fd))
        levels = []
        for n_pts in (n_base, 2 * n_base):
            h = 2.0 * x_r / (n_pts + 1)
            xs = -x_r + h * np.arange(1, n_pts + 1)
            diag = 2.0 / h**2 + xi * np.asarray(V.eval_k(xs, 0), dtype=float)
            off = np.full(n_pts - 1, -1.0 / h**2)
            levels.append(eigvalsh_tridiagonal(diag, off, select="i",
                                               select_range=(0, block - 1),
                                               lapack_driver="stebz"))
        richardson = (4.0 * levels[1] - levels[0]) / 3.0
        err = np.abs(levels[1] - levels[0]) / 3.0 + 1e-13 * np.abs(richardson)
        _oracle_cache[key] = (richardson, err)
    ev, err = _oracle_cache[key]
    return float(ev[n - 1]), float(err[n - 1])


def _shoot_energy(V: Potential, xi: float, n: int, cfg: SolverConfig,
                  e_hint: float | None = None, hint_window: float = 1e-3):
    """Phase-shooting eigenvalue; returns (E, method_gap, x_r, h, n_steps)."""
    oracle_E = oracle_err = None
    if cfg.validate:
        oracle_E, oracle_err = _oracle_block(V, xi, n, cfg.decay_efolds)
        E_est = oracle_E
    elif e_hint is not None:
        E_est = float(e_hint)
    else:
        E_est = _scaling_guess(V, xi, n)

    x_plus = transition_points(V, xi, E_est)[1]
    x_r = _window_halfwidth(V, xi, E_est, x_plus, cfg.decay_efolds)
    h = _step_size(E_est, n, x_r, cfg.grid_points)
    n_steps = int(math.ceil(2.0 * x_r / h))
    h = 2.0 * x_r / n_steps
    xs = np.linspace(-x_r, x_r, 4 * n_steps + 1)
    w_quarter = xi * np.asarray(V.eval_k(xs, 0), dtype=float)
    w_half = w_quarter[::2]

    target = n * math.pi
    scale = math.sqrt(E_est)

    def miss(E: float) -> float:
        return prufer_theta_end(E, w_half, h, scale) - target

    def miss_fine(E: float) -> float:
        return prufer_theta_end(E, w_quarter, 0.5 * h, scale) - target

    if oracle_E is not None:
        delta = max(8.0 * oracle_err, 3e-6 * oracle_E)
    elif e_hint is not None:
        delta = hint_window * E_est
    else:
        delta = 0.5 * E_est
    lo, hi = E_est - delta, E_est + delta
    for _ in range(10):
        lo = max(lo, 1e-12 * E_est)
        if miss(lo) < 0.0 < miss(hi):
            break
        span_lo, span_hi = E_est - lo, hi - E_est
        lo, hi = E_est - 6.0 * span_lo, E_est + 6.0 * span_hi
    else:
        raise EigensolveError(
            f"could not bracket level n={n}: node-count window disagrees with the oracle")
    xtol = cfg.shoot_tol * max(E_est, 1.0)
    E_coarse = brentq(miss, lo, hi, xtol=xtol, rtol=_BRENT_RTOL)
    # remove the O(h^4) phase bias: solve once more at h/2 and extrapolate
    w_b = max(3e-5 * E_coarse, 16.0 * xtol)
    lo2, hi2 = E_coarse - w_b, E_coarse + w_b
    for _ in range(8):
        lo2 = max(lo2, 1e-12 * E_coarse)
        if miss_fine(lo2) < 0.0 < miss_fine(hi2):
            break
        lo2, hi2 = E_coarse - 6.0 * (E_coarse - lo2), E_coarse + 6.0 * (hi2 - E_coarse)
    else:
        raise EigensolveError(f"refinement bracket failed at n={n}")
    E_fine = brentq(miss_fine, lo2, hi2, xtol=xtol, rtol=_BRENT_RTOL)
    E = (16.0 * E_fine - E_coarse) / 15.0

    if oracle_E is not None:
        method_gap = abs(E - oracle_E) / E
        if method_gap > 1e-6:
            raise EigensolveError(
                f"shooting ({E:.10g}) and matrix oracle ({oracle_E:.10g}) disagree "
                f"by {method_gap:.2e} relative at n={n}")
    else:
        method_gap = math.nan
    return float(E), float(method_gap), x_r, h, n_steps


def solve_eigen(V: Potential, xi: float, n: int, cfg: SolverConfig | None = None,
                e_hint: float | None = None) -> Eigenpair:
    """The n-th eigenpair of -d2/dx2 + xi V by phase shooting."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if xi <= 0.0:
        raise ValueError("xi must be positive")
    cfg = cfg or SolverConfig()
    E, method_gap, x_r, h, _ = _shoot_energy(V, xi, n, cfg, e_hint=e_hint)

    n_half = int(math.ceil(2.0 * x_r / h))
    xs_half = np.linspace(0.0, x_r, 2 * n_half + 1)
    w_half_pos = xi * np.asarray(V.eval_k(xs_half, 0), dtype=float)
    w_top = w_half_pos[-1]
    dw_top = xi * float(V.eval_k(x_r, 1))
    f_top = w_top - E
    dy0 = -(math.sqrt(f_top) + dw_top / (4.0 * f_top))
    y, dy_left = backward_solution(E, w_half_pos, x_r / n_half, 1.0, dy0)

    parity = 1 if (n - 1) % 2 == 0 else -1
    g_pos = xs_half[::2]
    grid = np.concatenate([-g_pos[:0:-1], g_pos])
    psi = np.concatenate([parity * y[:0:-1], y])
    norm = math.sqrt(float(simpson(psi * psi, x=grid)))
    psi = psi / norm
    peak = float(np.max(np.abs(psi)))
    if parity == 1:
        residual = abs(dy_left) / (norm * peak * math.sqrt(E))
    else:
        residual = abs(y[0]) / (norm * peak)

    x_plus = transition_points(V, xi, E)[1]
    L = cfg.domain_halfwidth
    if L <= 0.0:
        hi16 = x_plus
        while xi * float(V.eval_k(hi16, 0)) < 16.0 * E:
            hi16 *= 2.0
        L = max(3.0 * x_plus,
                brentq(lambda x: xi * float(V.eval_k(x, 0)) - 16.0 * E,
                       x_plus, hi16, xtol=1e-9))
    return Eigenpair(n=n, energy=E, grid=grid, psi=psi,
                     x_plus=x_plus, x_minus=-x_plus, xi=xi,
                     domain_halfwidth=float(L), window_halfwidth=x_r,
                     parity=parity, assembly_residual=float(residual),
                     method_gap=method_gap)


def _count_zeros(pair: Eigenpair) -> int:
    floor = 1e-9 * float(np.max(np.abs(pair.psi)))
    sig = pair.psi[np.abs(pair.psi) > floor]
    return int(np.sum(np.signbit(sig[:-1]) != np.signbit(sig[1:])))


def diagnostics(pair: Eigenpair, V: Potential, xi: float) -> DiagnosticsReport:
    """Virial, zero-count, Feynman-Hellmann, decay and pointwise-bound checks."""
    E = pair.energy
    g, psi = pair.grid, pair.psi
    vvals = np.asarray(V.eval_k(g, 0), dtype=float)
    virial = float(simpson(xi * vvals * psi * psi, x=g)) / E

    zero_count = _count_zeros(pair)

    # Feynman-Hellmann: centred difference of E(xi) against int V psi^2
    cfg = SolverConfig(validate=False)
    h_xi = 1e-4 * xi
    slope = 2.0 / (2.0 + V.d)
    e_up = _shoot_energy(V, xi + h_xi, pair.n, cfg,
                         e_hint=E * (1.0 + slope * 1e-4), hint_window=3e-4)[0]
    e_dn = _shoot_energy(V, xi - h_xi, pair.n, cfg,
                         e_hint=E * (1.0 - slope * 1e-4), hint_window=3e-4)[0]
    dE = (e_up - e_dn) / (2.0 * h_xi)
    fh_int = float(simpson(vvals * psi * psi, x=g))
    fh_residual = abs(dE - fh_int) / abs(dE)

    # decay certificate |psi(x')| <= |psi(x)| exp(-int sqrt(W - E)) past x_plus
    floor = 1e-15 * float(np.max(np.abs(psi)))
    sel = (g > 1.05 * pair.x_plus) & (np.abs(psi) > floor)
    xs = g[sel]
    margin = math.inf
    decay_delta = math.nan
    if xs.size > 16:
        idx = np.linspace(0, xs.size - 1, 9, dtype=int)
        pts = xs[idx]
        lp = np.log(np.abs(psi[sel][idx]))
        for i in range(len(pts) - 1):
            s_int = _sqrt_band(V, xi, E, pts[i], pts[i + 1])
            margin = min(margin, (lp[i] - lp[i + 1]) - s_int)
        far = xs > 1.4 * pair.x_plus
        if np.sum(far) > 8:
            xw = xs[far]
            lw = np.log(np.abs(psi[sel][far]))
            basis = xw * np.sqrt(xi * np.asarray(V.eval_k(xw, 0), dtype=float))
            A = np.vstack([np.ones_like(basis), -basis]).T
            coef, *_ = np.linalg.lstsq(A, lw, rcond=None)
            decay_delta = float(coef[1])

    pos = g > 0
    trans_const = float(np.max(psi[pos] ** 2 * math.sqrt(pair.x_plus)
                               * np.sqrt(np.abs(g[pos] - pair.x_plus))))
    unif_const = float(np.max(psi**2) * math.sqrt(pair.x_plus) * E ** (-0.25))
    return DiagnosticsReport(
        virial_ratio=virial, zero_count=zero_count, fh_residual=float(fh_residual),
        decay_margin=float(margin), transition_bound_const=trans_const,
        uniform_bound_const=unif_const, lb_product=math.sqrt(E) * pair.x_plus,
        decay_delta=decay_delta)


def solve_basis(V: Potential, xi: float, n_max: int,
                cfg: SolverConfig | None = None) -> tuple[np.ndarray, np.ndarray, list]:
    """First n_max eigenpairs resampled (cubic) onto the widest window grid."""
    pairs = [solve_eigen(V, xi, m, cfg) for m in range(1, n_max + 1)]
    top = max(p.window_halfwidth for p in pairs)
    finest = min(p.grid[1] - p.grid[0] for p in pairs)
    n_side = int(math.ceil(top / finest))
    grid = np.linspace(-top, top, 2 * n_side + 1)
    mat = np.zeros((n_max, grid.size))
    for i, p in enumerate(pairs):
        inside = np.abs(grid) <= p.window_halfwidth
        mat[i, inside] = CubicSpline(p.grid, p.psi)(grid[inside])
        mat[i] /= math.sqrt(float(simpson(mat[i] ** 2, x=grid)))
    return grid, mat, pairs


def riesz_ratio(V: Potential, xi: float, coefficients, k: int,
                basis: tuple | None = None) -> float:
    """|| (xi V)^k f ||_2 / || H^k f ||_2 for f a finite eigen-combination.

    The numerator multiplies pointwise; the denominator applies the spectral
    power through the eigen-expansion sum c_m E_m^k psi_m.
    """
    if k not in (0, 1, 2, 3):
        raise ValueError("k must be in {0, 1, 2, 3}")
    coeffs = np.asarray(coefficients, dtype=float)
    if coeffs.size > 20:
        raise ValueError("at most 20 eigen-components supported")
    if not np.any(coeffs != 0.0):
        raise ValueError("f vanishes: zero denominator")
    if basis is None:
        basis = solve_basis(V, xi, coeffs.size)
    grid, mat, pairs = basis
    f = coeffs @ mat[: coeffs.size]
    energies = np.array([p.energy for p in pairs[: coeffs.size]])
    w = xi * np.asarray(V.eval_k(grid, 0), dtype=float)
    num = math.sqrt(float(simpson((w**k * f) ** 2, x=grid)))
    hk_f = (coeffs * energies**k) @ mat[: coeffs.size]
    den = math.sqrt(float(simpson(hk_f**2, x=grid)))
    return num / den


@dataclass
class ScalingLawReport:
    energy_band: tuple[float, float]      # E_n xi^(-2/(2+d)) n^(-2d/(2+d))
    derivative_band: tuple[float, float]  # xi dE/dxi / E via Feynman-Hellmann
    drift_on_doubling: float
    comparison_violations: int
    covariance_max_rel_err: float


def scaling_law_check(V: Potential, xi_set, n_max: int,
                      comparison_pairs: int = 20,
                      covariance_scales=(0.5, 2.0), seed: int = 7) -> ScalingLawReport:
    """Two-sided bands for the eigenvalue growth law and its xi-derivative.

    Also checks form-comparison monotonicity (V <= c W pointwise implies
    E_n^V <= c E_n^W against the matching pure power) and the exact scaling
    covariance: the eigenvalues of t^2 V(t x) are t^2 times those of V.
    """
    d = V.d
    cfg = SolverConfig(validate=False)
    records = []  # (n, law_ratio, derivative_ratio, energy)
    energies = {}
    for xi in xi_set:
        for n in range(1, n_max + 1):
            p = solve_eigen(V, xi, n, cfg)
            law = p.energy * xi ** (-2.0 / (2.0 + d)) * n ** (-2.0 * d / (2.0 + d))
            vv = np.asarray(V.eval_k(p.grid, 0), dtype=float)
            dE = float(simpson(vv * p.psi**2, x=p.grid))
            records.append((n, law, xi * dE / p.energy))
            energies[(float(xi), n)] = p.energy
    laws = [r[1] for r in records]
    drats = [r[2] for r in records]
    laws_half = [r[1] for r in records if r[0] <= n_max // 2]
    drift = max(abs(max(laws) / max(laws_half) - 1.0),
                abs(min(laws) / min(laws_half) - 1.0))

    power = make_potential(PotentialSpec("power", sigma=d / 2.0))
    gr = np.geomspace(1e-3, 1e3, 2001)
    c = float(np.max(V.eval_k(gr, 0) / power.eval_k(gr, 0))) * (1.0 + 1e-9)
    violations = 0
    rng = np.random.default_rng(seed)
    for _ in range(comparison_pairs):
        xi = float(rng.choice(np.asarray(xi_set, dtype=float)))
        n = int(rng.integers(1, n_max + 1))
        ew = solve_eigen(power, xi, n, cfg).energy
        if energies[(xi, n)] > c * ew * (1.0 + 1e-9):
            violations += 1

    cov_err = 0.0
    xi0 = float(xi_set[0])
    for t in covariance_scales:
        vt = rescale(V, t)
        for n in (1, max(2, n_max // 2)):
            base = energies[(xi0, n)]
            scaled = solve_eigen(vt, xi0, n, cfg,
                                 e_hint=t * t * base).energy
            cov_err = max(cov_err, abs(scaled - t * t * base) / (t * t * base))

    return ScalingLawReport(
        energy_band=(min(laws), max(laws)),
        derivative_band=(min(drats), max(drats)),
        drift_on_doubling=drift,
        comparison_violations=violations,
        covariance_max_rel_err=cov_err)
