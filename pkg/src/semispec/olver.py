"""Turning-point frames and certified Airy-type approximation of solutions.

For a normalised potential u (increasing on the positive half-line, u(0)=0,
u(x0)=1 at the turning point) the frame carries the Liouville-Green variable

    zeta(x) = sign(x - x0) * ((3/2) * |integral of sqrt|u-1||)^(2/3),

its derivative, and the Schwarzian-type quantity Phi whose weighted integral
J controls the approximation error.  The recessive solution of

    w'' = alpha^2 (u - 1) w

is then approximated by (zeta')^(-1/2) * Ai(alpha^(2/3) zeta) and certified
against an independently integrated reference solution over a ladder of
alpha values.

Phi is evaluated two ways: an exact closed form in terms of u away from the
turning point, and a local quartic model of zeta(x) near it, where the
closed form loses all its digits to cancellation.  The two are cross-checked
on the overlap ring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.optimize import brentq

from semispec.special import airy_eval, integrate

__all__ = [
    "NormalizedPotential",
    "OlverFrame",
    "JResult",
    "SolutionPair",
    "ConvergenceReport",
    "turning_point",
    "build_frame",
    "j_integral",
    "tail_anchor_masses",
    "numeric_recessive",
    "certify_approximation",
]


class NormalizedPotential:
    """A potential on the positive half-line with derivatives up to order 3."""

    def __init__(self, u, du, d2u=None, d3u=None, d: float = 2.0, label: str = ""):
        self.u = u
        self.du = du
        self.d2u = d2u
        self.d3u = d3u
        self.d = d
        self.label = label

    @classmethod
    def from_potential(cls, V, scale: float = 1.0, label: str = ""):
        """Wrap an even Potential as scale * V restricted to x > 0."""
        return cls(
            u=lambda x: scale * V.eval_k(x, 0),
            du=lambda x: scale * V.eval_k(x, 1),
            d2u=lambda x: scale * V.eval_k(x, 2),
            d3u=lambda x: scale * V.eval_k(x, 3),
            d=V.d, label=label or repr(V),
        )


def turning_point(u: NormalizedPotential, tol: float = 1e-12) -> float:
    """The unique x0 > 0 with u(x0) = 1, found by bracket growth + bisection."""
    t = 1.0
    for _ in range(200):
        if u.u(np.asarray(t)) >= 1.0:
            break
        t *= 2.0
    else:
        raise ValueError("u does not reach 1: not a valid normalized potential")
    lo = t / 2.0 if t > 1.0 else 0.0
    while lo > 0 and u.u(np.asarray(lo)) >= 1.0:
        lo /= 2.0
    probe = np.linspace(max(lo, 1e-8), t, 64)
    vals = np.asarray([float(u.u(np.asarray(p))) for p in probe])
    if np.any(np.diff(vals) <= 0.0):
        raise ValueError("u is not strictly increasing on the sampled bracket")
    x0 = brentq(lambda x: float(u.u(np.asarray(x))) - 1.0, max(lo, 1e-300), t,
                xtol=1e-300, rtol=8.881784197001252e-16, maxiter=300)
    if abs(float(u.u(np.asarray(x0))) - 1.0) > tol:
        raise ValueError("turning point residual above tolerance")
    return float(x0)


@dataclass
class JResult:
    value: float
    quad_part: float
    tail_bound: float
    z_max: float
    tail_coeff: float


class OlverFrame:
    """Tabulated turning-point frame with continuous evaluators."""

    def __init__(self, u: NormalizedPotential, x0: float, b: float,
                 grid: np.ndarray, theta: np.ndarray, x_max: float,
                 z_max: float, delta_phi: float, derivs0: tuple):
        self.u = u
        self.x0 = x0
        self.b = b
        self._grid = grid          # node abscissas, includes x0
        self._theta = theta        # cumulative integral of sqrt|u-1| from x0
        self.x_max = x_max
        self.z_max = z_max
        self.delta_phi = delta_phi
        self.dz0, self.d2z0, self.d3z0 = derivs0
        self._c4 = None
        self._fit_c1 = None
        self.j_result: JResult | None = None
        self._fit_local_model()
        self.x = grid
        self.zeta = self.zeta_eval(grid)
        self.dzeta = self.dzeta_eval(grid)
        self.phi = self.phi_eval(grid)
        self.phi_overlap_dev = self._overlap_check()

    # -- zeta and friends ------------------------------------------------

    def _theta_at(self, x: float) -> float:
        """Integral of sqrt|u-1| between x0 and x, via the nearest node."""
        grid, theta = self._grid, self._theta
        if x >= self.x0:
            # largest node <= x; at least x0 itself, so the panel never
            # crosses the turning point
            i = int(np.clip(np.searchsorted(grid, x, side="right") - 1, 0, grid.size - 1))
        else:
            # smallest node >= x; at most x0 itself
            i = int(np.clip(np.searchsorted(grid, x, side="left"), 0, grid.size - 1))
        node, base = grid[i], theta[i]
        if node == x:
            return float(base)
        return float(base + abs(_theta_increment(self.u, self.x0, node, x)))

    def zeta_eval(self, xs):
        xs_arr = np.atleast_1d(np.asarray(xs, dtype=float))
        out = np.empty_like(xs_arr)
        for k, x in enumerate(xs_arr):
            th = self._theta_at(float(x))
            out[k] = math.copysign((1.5 * th) ** (2.0 / 3.0), x - self.x0)
        return out if np.ndim(xs) else float(out[0])

    def dzeta_eval(self, xs, zetas=None):
        xs_arr = np.atleast_1d(np.asarray(xs, dtype=float))
        z = np.atleast_1d(zetas) if zetas is not None else self.zeta_eval(xs_arr)
        dx = xs_arr - self.x0
        near = np.abs(dx) < 1e-5 * self.x0
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.asarray(self.u.u(xs_arr), dtype=float) - 1.0
            val = np.sqrt(f / z)
        taylor = self.dz0 + self.d2z0 * dx + 0.5 * self.d3z0 * dx * dx
        out = np.where(near, taylor, val)
        return out if np.ndim(xs) else float(out[0])

    def phi_eval(self, xs):
        xs_arr = np.atleast_1d(np.asarray(xs, dtype=float))
        z = self.zeta_eval(xs_arr)
        out = np.empty_like(xs_arr)
        far = np.abs(z) >= self.delta_phi
        if np.any(far):
            xf = xs_arr[far]
            f = np.asarray(self.u.u(xf), dtype=float) - 1.0
            f1 = np.asarray(self.u.du(xf), dtype=float)
            f2 = np.asarray(self.u.d2u(xf), dtype=float)
            zf = z[far]
            out[far] = zf * (4.0 * f * f2 - 5.0 * f1 * f1) / (16.0 * f**3) \
                + 5.0 / (16.0 * zf * zf)
        if np.any(~far):
            out[~far] = self._phi_local(xs_arr[~far])
        return out if np.ndim(xs) else float(out[0])

    def _phi_local(self, xs):
        c1, c2, c3, c4 = self.dz0, 0.5 * self.d2z0, self.d3z0 / 6.0, self._c4
        dx = np.asarray(xs, dtype=float) - self.x0
        zp = c1 + 2 * c2 * dx + 3 * c3 * dx**2 + 4 * c4 * dx**3
        zpp = 2 * c2 + 6 * c3 * dx + 12 * c4 * dx**2
        zppp = 6 * c3 + 24 * c4 * dx
        return 0.5 * zppp / zp**3 - 0.75 * zpp**2 / zp**4

    def _fit_local_model(self):
        """Pin the cubic jet analytically, fit the quartic coefficient."""
        z = self.zeta_eval(self._grid)
        win = np.abs(z) <= 2.2 * self.delta_phi
        dx = self._grid[win] - self.x0
        zw = z[win]
        resid = zw - (self.dz0 * dx + 0.5 * self.d2z0 * dx**2 + self.d3z0 / 6.0 * dx**3)
        denom = float(np.sum(dx**8))
        self._c4 = float(np.sum(resid * dx**4) / denom) if denom > 0 else 0.0
        # free cubic fit of the leading coefficient, kept for certification
        A = np.vstack([dx, dx**2, dx**3, dx**4]).T
        coef, *_ = np.linalg.lstsq(A, zw, rcond=None)
        self._fit_c1 = float(coef[0])

    def _overlap_check(self) -> float:
        """Relative gap between closed-form and local Phi on the overlap ring."""
        z = np.abs(self.zeta)
        ring = (z >= self.delta_phi) & (z <= 2.0 * self.delta_phi)
        if not np.any(ring):
            return math.nan
        far = self.phi[ring]
        loc = self._phi_local(self.x[ring])
        return float(np.max(np.abs(far - loc) / np.max(np.abs(far))))

    @property
    def fitted_dzeta_at_x0(self) -> float:
        return self._fit_c1

    def x_of_zeta(self, z: float) -> float:
        """Inverse of zeta, by bracketed root finding on the evaluator."""
        lo, hi = (self.x0, self.x_max) if z >= 0 else (self._grid[0], self.x0)
        return brentq(lambda x: self.zeta_eval(x) - z, lo, hi, xtol=1e-13)

    def to_csv(self, path):
        data = np.column_stack([self.x, self.zeta, self.dzeta, self.phi])
        np.savetxt(path, data, delimiter=",", header="x,zeta,dzeta,phi", comments="")


def _theta_increment(u: NormalizedPotential, x0: float, a: float, b: float) -> float:
    """Gauss panel of sqrt|u-1| over [a, b]; sqrt substitution if touching x0."""
    from semispec.special import _gauss_nodes, _gauss_weights

    def integrand(x):
        return np.sqrt(np.abs(np.asarray(u.u(x), dtype=float) - 1.0))

    if a == x0 or b == x0:
        other = b if a == x0 else a
        smax = math.sqrt(abs(other - x0))
        sgn = 1.0 if other > x0 else -1.0
        half = 0.5 * smax
        s = half + half * _gauss_nodes
        vals = 2.0 * s * integrand(x0 + sgn * s * s)
        return float(half * np.sum(_gauss_weights * vals))
    mid = 0.5 * (a + b)
    q = 0.25 * (b - a)
    m1, m2 = 0.5 * (a + mid), 0.5 * (mid + b)
    return float(q * np.sum(_gauss_weights * integrand(m1 + q * _gauss_nodes))
                 + q * np.sum(_gauss_weights * integrand(m2 + q * _gauss_nodes)))


def build_frame(u: NormalizedPotential, u_max: float = 25.0, n_points: int = 1200,
                delta_phi_frac: float = 0.1) -> OlverFrame:
    """Construct the turning-point frame for u up to the level u = u_max."""
    x0 = turning_point(u)
    b = (1.5 * integrate(lambda x: np.sqrt(1.0 - np.asarray(u.u(x), dtype=float)),
                         0.0, x0, mode="sqrt_endpoint_b", tol=1e-13)) ** (2.0 / 3.0)
    hi = x0
    while float(u.u(np.asarray(hi))) < u_max:
        hi *= 2.0
    x_max = brentq(lambda x: float(u.u(np.asarray(x))) - u_max, x0, hi, xtol=1e-12)

    n_left = max(n_points // 5, 64)
    n_inner = max(n_points // 3, 128)
    n_right = n_points - n_left - n_inner
    seg1 = np.geomspace(1e-4 * x0, 0.45 * x0, n_left, endpoint=False)
    seg2 = np.linspace(0.45 * x0, min(1.6 * x0, 0.5 * (x0 + x_max)), n_inner, endpoint=False)
    seg3 = np.geomspace(min(1.6 * x0, 0.5 * (x0 + x_max)), x_max, n_right)
    grid = np.unique(np.concatenate([seg1, seg2, seg3, [x0]]))

    # cumulative integral of sqrt|u-1| measured from x0 outward on both sides
    theta = np.zeros(grid.size)
    i0 = int(np.searchsorted(grid, x0))
    for i in range(i0 + 1, grid.size):
        theta[i] = theta[i - 1] + abs(_theta_increment(u, x0, grid[i - 1], grid[i]))
    for i in range(i0 - 1, -1, -1):
        theta[i] = theta[i + 1] + abs(_theta_increment(u, x0, grid[i + 1], grid[i]))

    du0 = float(u.du(np.asarray(x0)))
    d2u0 = float(u.d2u(np.asarray(x0))) if u.d2u is not None else 0.0
    dz0 = du0 ** (1.0 / 3.0)
    d2z0 = d2u0 / (5.0 * dz0 * dz0)
    if u.d3u is not None:
        d3u0 = float(u.d3u(np.asarray(x0)))
        d3z0 = (d3u0 - 12.0 * dz0 * d2z0 * d2z0) / (7.0 * dz0 * dz0)
    else:
        d3z0 = 0.0

    z_max = (1.5 * theta[-1]) ** (2.0 / 3.0)
    return OlverFrame(u, x0, b, grid, theta, float(x_max), float(z_max),
                      delta_phi_frac * b, (dz0, d2z0, d3z0))


class TailFitError(RuntimeError):
    pass


def _zeta_extended(frame: OlverFrame, x: float) -> float:
    """zeta(x) for x possibly beyond the tabulated range, by fresh quadrature."""
    if x <= frame.x_max:
        return float(frame.zeta_eval(x))
    th = frame._theta[-1] + integrate(
        lambda s: np.sqrt(np.asarray(frame.u.u(s), dtype=float) - 1.0),
        frame.x_max, x, tol=1e-11)
    return (1.5 * th) ** (2.0 / 3.0)


def _phi_far(frame: OlverFrame, x: float, z: float) -> float:
    f = float(frame.u.u(np.asarray(x))) - 1.0
    f1 = float(frame.u.du(np.asarray(x)))
    f2 = float(frame.u.d2u(np.asarray(x)))
    return z * (4.0 * f * f2 - 5.0 * f1 * f1) / (16.0 * f**3) + 5.0 / (16.0 * z * z)


def _tail_coeff(frame: OlverFrame) -> float:
    """Bound |Phi| <= C / zeta^2 beyond z_max from a geometric zeta ladder.

    The products |Phi| zeta^2 are probed at z_max * 2^k (extending zeta by
    fresh quadrature past the tabulated range); they must be stable to
    within a modest factor, else the fit is declared unstable.
    """
    prods = []
    for k in range(5):
        z_target = frame.z_max * 2.0**k
        hi = frame.x_max
        while _zeta_extended(frame, hi) < z_target:
            hi *= 2.0
        x = brentq(lambda s: _zeta_extended(frame, s) - z_target,
                   frame.x0 * 1.0001, hi, xtol=1e-10)
        z = _zeta_extended(frame, x)
        prods.append(abs(_phi_far(frame, x, z)) * z * z)
    prods = np.asarray(prods)
    if np.max(prods) > 4.0 * np.min(prods):
        raise TailFitError(
            f"|Phi| zeta^2 drifts by {np.max(prods)/np.min(prods):.2f}x on the tail ladder")
    return float(1.1 * np.max(prods))


def j_integral(frame: OlverFrame, tol: float = 1e-9) -> JResult:
    """J = integral of |Phi| / sqrt|zeta| over (-b, z_max] plus analytic tail."""
    x0, xm = frame.x0, frame.x_max

    def g(xs):
        xs = np.asarray(xs, dtype=float)
        z = frame.zeta_eval(xs)
        dz = frame.dzeta_eval(xs, zetas=z)
        return np.abs(frame.phi_eval(xs)) * dz / np.sqrt(np.abs(z))

    w = 0.05 * x0
    parts = [
        integrate(g, 1e-9 * x0, x0 - w, mode="sqrt_endpoint_a", tol=tol / 4),
        integrate(g, x0 - w, x0, mode="sqrt_endpoint_b", tol=tol / 4),
        integrate(g, x0, x0 + w, mode="sqrt_endpoint_a", tol=tol / 4),
        integrate(g, x0 + w, xm, mode="smooth", tol=tol / 4),
    ]
    quad = float(sum(parts))
    coeff = _tail_coeff(frame)
    tail = (2.0 / 3.0) * coeff * frame.z_max ** (-1.5)
    result = JResult(value=quad + tail, quad_part=quad, tail_bound=tail,
                     z_max=frame.z_max, tail_coeff=coeff)
    frame.j_result = result
    return result


def tail_anchor_masses(frame: OlverFrame, anchors=(20.0, 40.0, 80.0)) -> dict[float, float]:
    """Mass of |Phi| d zeta over [Z, 2Z]; scales like C/(2Z) when |Phi| ~ C zeta^-2."""
    out = {}
    for z_anchor in anchors:
        if 2.0 * z_anchor > frame.z_max:
            raise ValueError(
                f"anchor window [{z_anchor}, {2*z_anchor}] exceeds tabulated z_max={frame.z_max:.3g}; "
                "build the frame with a larger u_max")
        xa = frame.x_of_zeta(float(z_anchor))
        xb = frame.x_of_zeta(2.0 * float(z_anchor))

        def g(xs):
            xs = np.asarray(xs, dtype=float)
            return np.abs(frame.phi_eval(xs)) * frame.dzeta_eval(xs)

        out[float(z_anchor)] = integrate(g, xa, xb, tol=1e-10)
    return out


@dataclass
class RecessiveSolution:
    """Reference recessive solution, L2-normalised on [0, x_top]."""

    alpha: float
    x_top: float
    grid: np.ndarray
    values: np.ndarray
    scale: float
    sol: object  # scipy dense-output solution, unnormalised

    def __call__(self, xs):
        return self.scale * self.sol.sol(np.asarray(xs, dtype=float))[0]


def numeric_recessive(u: NormalizedPotential, alpha: float,
                      x_top: float | None = None, u_top: float = 4.0,
                      rtol: float = 1e-11) -> RecessiveSolution:
    """Integrate w'' = alpha^2 (u-1) w backward from the exponential region.

    Start data follow the decaying WKB branch at x_top (where u >= u_top >= 4
    by default); integrating toward the turning point is the stable direction
    for the recessive solution.  The result is renormalised to unit L2 norm
    on [0, x_top].
    """
    if x_top is None:
        hi = 1.0
        while float(u.u(np.asarray(hi))) < u_top:
            hi *= 2.0
        x_top = brentq(lambda x: float(u.u(np.asarray(x))) - u_top, 1e-8, hi, xtol=1e-12)
    f_top = float(u.u(np.asarray(x_top))) - 1.0
    if f_top < 1.0:
        raise ValueError("x_top is not deep enough in the exponential region")
    df_top = float(u.du(np.asarray(x_top)))
    slope = -alpha * math.sqrt(f_top) - df_top / (4.0 * f_top)

    def rhs(x, y):
        return [y[1], alpha * alpha * (float(u.u(np.asarray(x))) - 1.0) * y[0]]

    sol = solve_ivp(rhs, (x_top, 0.0), [1.0, slope], method="DOP853",
                    rtol=rtol, atol=1e-280, dense_output=True, max_step=0.1)
    if not sol.success:
        raise RuntimeError(f"recessive integration failed: {sol.message}")
    h = 2.0 * math.pi / (alpha * math.sqrt(max(f_top, 3.0)) * 60.0)
    n = max(int(math.ceil(x_top / h)), 800)
    if n % 2 == 1:
        n += 1
    grid = np.linspace(0.0, x_top, n + 1)
    vals = sol.sol(grid)[0]
    norm = math.sqrt(float(simpson(vals * vals, x=grid)))
    return RecessiveSolution(alpha=alpha, x_top=float(x_top), grid=grid,
                             values=vals / norm, scale=1.0 / norm, sol=sol)


@dataclass
class SolutionPair:
    """Airy-frame approximation vs numeric recessive solution at one alpha."""

    alpha: float
    grid: np.ndarray
    approx: np.ndarray          # L2-normalised on the grid
    numeric: np.ndarray         # L2-normalised on the grid
    sup_rel_err: float          # sup gap over the window, relative to window peak
    l2_of_approx: float         # L2 norm of the raw, unnormalised approximation
    window: tuple[float, float]
    trans_ratio: float          # sup psi^2 sqrt|x-x0|
    unif_ratio: float           # sup psi^2 * alpha^(-1/3)
    virial_ratio: float         # int u psi^2 / int psi^2


@dataclass
class ConvergenceReport:
    pairs: list
    err_ratios: list            # sup_rel_err(2a)/sup_rel_err(a)
    l2_band: tuple[float, float]  # range of ||approx||_2^2 * alpha^(1/3)
    trans_const: float
    unif_const: float
    virial_min: float


def certify_approximation(u: NormalizedPotential, alphas=(32.0, 64.0, 128.0),
                          frame: OlverFrame | None = None) -> ConvergenceReport:
    """Compare the Airy-frame approximation with the numeric recessive solution.

    Both members are L2-normalised on [0, x_top] (u(x_top) = 4, common to the
    whole ladder) and compared on the window |zeta| <= b/2 around the turning
    point.  Alongside the sup error the report carries the L2 size of the raw
    approximation against alpha^(-1/3) and the pointwise/virial ratios.
    """
    if frame is None:
        frame = build_frame(u)
    alphas = sorted(float(a) for a in alphas)
    hi = 1.0
    while float(u.u(np.asarray(hi))) < 4.0:
        hi *= 2.0
    x_top = brentq(lambda x: float(u.u(np.asarray(x))) - 4.0, 1e-8, hi, xtol=1e-12)

    pairs = []
    for alpha in alphas:
        ref = numeric_recessive(u, alpha, x_top=x_top)
        grid = ref.grid[1:]  # avoid x = 0 where log-perturbed derivatives degenerate
        z = frame.zeta_eval(grid)
        dz = frame.dzeta_eval(grid, zetas=z)
        ai = np.array([airy_eval(min(a, 999.0)).ai for a in alpha ** (2.0 / 3.0) * z])
        raw = ai / np.sqrt(dz)
        l2_raw = math.sqrt(float(simpson(raw * raw, x=grid)))
        approx = raw / l2_raw
        numeric = ref.values[1:]
        numeric = numeric / math.sqrt(float(simpson(numeric * numeric, x=grid)))
        # fix a common sign (both positive in the decaying region)
        if numeric[-1] < 0:
            numeric = -numeric
        win = np.abs(z) <= 0.5 * frame.b
        peak = float(np.max(np.abs(approx[win])))
        sup_err = float(np.max(np.abs(approx[win] - numeric[win]))) / peak
        xw = grid[win]
        trans_ratio = float(np.max(numeric**2 * np.sqrt(np.abs(grid - frame.x0))))
        unif_ratio = float(np.max(numeric**2)) * alpha ** (-1.0 / 3.0)
        uvals = np.asarray(u.u(grid), dtype=float)
        virial = float(simpson(uvals * numeric**2, x=grid) / simpson(numeric**2, x=grid))
        pairs.append(SolutionPair(
            alpha=alpha, grid=grid, approx=approx, numeric=numeric,
            sup_rel_err=sup_err, l2_of_approx=l2_raw,
            window=(float(xw[0]), float(xw[-1])),
            trans_ratio=trans_ratio, unif_ratio=unif_ratio, virial_ratio=virial))

    ratios = [pairs[i + 1].sup_rel_err / pairs[i].sup_rel_err
              for i in range(len(pairs) - 1)]
    l2_scaled = [p.l2_of_approx**2 * p.alpha ** (1.0 / 3.0) for p in pairs]
    return ConvergenceReport(
        pairs=pairs, err_ratios=ratios,
        l2_band=(min(l2_scaled), max(l2_scaled)),
        trans_const=max(p.trans_ratio for p in pairs),
        unif_const=max(p.unif_ratio for p in pairs),
        virial_min=min(p.virial_ratio for p in pairs))
