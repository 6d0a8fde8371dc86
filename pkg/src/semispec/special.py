"""Airy functions, Olver's auxiliary functions E and M, and adaptive quadrature.

The Airy pair (Ai, Bi) and derivatives are computed from scratch: Maclaurin
series near the origin, optimally-truncated asymptotic expansions far out,
and a Taylor-marching bridge for Ai on the positive midrange where the
Maclaurin series cancels catastrophically but the asymptotic series has not
yet converged.  The marching starts from the asymptotic anchor at x = 12 and
proceeds downward, which is the stable direction for the recessive solution.

The quadrature routine certifies its result by interval halving and knows how
to remove square-root endpoint behaviour by substitution, which is what the
turning-point and Bohr-Sommerfeld integrals need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AiryValue",
    "AuxValue",
    "IntegrationError",
    "airy_eval",
    "airy_root_c",
    "auxiliary_eval",
    "integrate",
]

_SQRT_PI = math.sqrt(math.pi)
_SQRT3 = math.sqrt(3.0)

# Ai(0) = 3^(-2/3)/Gamma(2/3) and -Ai'(0) = 3^(-1/3)/Gamma(1/3).
_C1 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
_C2 = 3.0 ** (-1.0 / 3.0) / math.gamma(1.0 / 3.0)

# Branch switch points.  Below _X_NEG / above _X_FAR the asymptotic series
# reach ~1e-12 at optimal truncation; the Maclaurin series keeps full
# precision for Ai up to ~4.5 (cancellation grows like exp(4/3*x^(3/2)))
# and for Bi on the whole positive midrange (all series terms positive).
_X_NEG = -7.6
_X_POS = 4.5
_X_FAR = 12.0
_MARCH_STEP = 0.75
_X_LIMIT = 1000.0


@dataclass(frozen=True)
class AiryValue:
    """Values and first derivatives of the Airy pair at one abscissa."""

    ai: float
    bi: float
    dai: float
    dbi: float


@dataclass(frozen=True)
class AuxValue:
    """Olver auxiliary values E(x) >= 1 and M(x) > 0 at abscissa ``at``."""

    e: float
    m: float
    at: float


class IntegrationError(RuntimeError):
    """Adaptive quadrature failed to certify the requested tolerance."""

    def __init__(self, message, achieved=None, estimate=None):
        super().__init__(message)
        self.achieved = achieved
        self.estimate = estimate


def _maclaurin(x: float) -> tuple[float, float, float, float]:
    """Maclaurin sums (f, g, f', g') of the standard Airy basis.

    f'' = x f with f(0)=1, f'(0)=0;  g'' = x g with g(0)=0, g'(0)=1.
    """
    x3 = x * x * x
    # f = sum a_k x^(3k),  a_k = a_{k-1} / ((3k)(3k-1))
    # g = sum b_k x^(3k+1), b_k = b_{k-1} / ((3k+1)(3k))
    f = 1.0
    fp = 0.0
    g = x
    gp = 1.0
    term_f = 1.0
    term_g = x
    for k in range(1, 220):
        tk = 3.0 * k
        term_f *= x3 / (tk * (tk - 1.0))
        term_g *= x3 / ((tk + 1.0) * tk)
        f += term_f
        g += term_g
        if x != 0.0:
            fp += term_f * tk / x
        gp += term_g * (tk + 1.0) / x if x != 0.0 else 0.0
        if abs(term_f) < 1e-19 * abs(f) and abs(term_g) < 1e-19 * max(abs(g), 1e-300):
            break
    if x == 0.0:
        fp = 0.0
        gp = 1.0
    return f, g, fp, gp


def _asymptotic_u_v(zeta: float, alternating: bool) -> tuple[float, float]:
    """Optimally truncated sums of u_k/zeta^k and v_k/zeta^k.

    u_{k+1} = u_k (6k+5)(6k+1) / (72(k+1));  v_k = -u_k (6k+1)/(6k-1).
    With ``alternating`` the signs (-1)^k are applied.
    """
    su = 1.0
    sv = 1.0
    u = 1.0
    prev = 1.0
    sign = -1.0 if alternating else 1.0
    for k in range(0, 60):
        u = u * (6.0 * k + 5.0) * (6.0 * k + 1.0) / (72.0 * (k + 1.0))
        term = u / zeta ** (k + 1)
        if abs(term) >= prev:
            break
        v = -u * (6.0 * (k + 1.0) + 1.0) / (6.0 * (k + 1.0) - 1.0)
        s = sign ** (k + 1)
        su += s * term
        sv += s * (v / u) * term
        prev = abs(term)
        if prev < 1e-19:
            break
    return su, sv


def _asymptotic_neg_sums(zeta: float) -> tuple[float, float, float, float]:
    """Even/odd split sums P, Q, R, S for the oscillatory expansions."""
    p = 1.0
    r = 1.0
    q = 0.0
    s = 0.0
    u = 1.0
    prev = math.inf
    for k in range(1, 60):
        u = u * (6.0 * (k - 1.0) + 5.0) * (6.0 * (k - 1.0) + 1.0) / (72.0 * k)
        term = u / zeta**k
        if term >= prev:
            break
        v_ratio = -(6.0 * k + 1.0) / (6.0 * k - 1.0)
        sgn = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:  # odd index -> Q, S
            q += sgn * term
            s += sgn * v_ratio * term
        else:  # even index -> P, R
            p += sgn * term
            r += sgn * v_ratio * term
        prev = term
        if term < 1e-19:
            break
    return p, q, r, s


def _airy_asymptotic_pos(x: float) -> tuple[float, float, float, float]:
    zeta = (2.0 / 3.0) * x**1.5
    su_a, sv_a = _asymptotic_u_v(zeta, alternating=True)
    su_b, sv_b = _asymptotic_u_v(zeta, alternating=False)
    x4 = x**0.25
    try:
        epos = math.exp(zeta)
    except OverflowError:
        epos = math.inf
    eneg = math.exp(-zeta) if zeta < 745.0 else 0.0
    ai = eneg * su_a / (2.0 * _SQRT_PI * x4)
    dai = -x4 * eneg * sv_a / (2.0 * _SQRT_PI)
    bi = epos * su_b / (_SQRT_PI * x4) if math.isfinite(epos) else math.inf
    dbi = x4 * epos * sv_b / _SQRT_PI if math.isfinite(epos) else math.inf
    return ai, bi, dai, dbi


def _airy_asymptotic_neg(x: float) -> tuple[float, float, float, float]:
    t = -x
    zeta = (2.0 / 3.0) * t**1.5
    p, q, r, s = _asymptotic_neg_sums(zeta)
    phi = zeta - 0.25 * math.pi
    c, sn = math.cos(phi), math.sin(phi)
    t4 = t**0.25
    ai = (c * p + sn * q) / (_SQRT_PI * t4)
    bi = (-sn * p + c * q) / (_SQRT_PI * t4)
    dai = (t4 / _SQRT_PI) * (sn * r - c * s)
    dbi = (t4 / _SQRT_PI) * (c * r + sn * s)
    return ai, bi, dai, dbi


def _taylor_step(a: float, y: float, dy: float, h: float) -> tuple[float, float]:
    """One Taylor step for y'' = x y from center ``a`` to ``a + h``."""
    coeffs = [y, dy]
    val = y + dy * h
    dval = dy
    hk = h
    for k in range(0, 48):
        c_km1 = coeffs[k - 1] if k >= 1 else 0.0
        c_next = (a * coeffs[k] + c_km1) / ((k + 1.0) * (k + 2.0))
        coeffs.append(c_next)
        hk *= h
        val += c_next * hk
        dval += c_next * (k + 2.0) * hk / h
        if abs(c_next * hk) < 1e-20 * abs(val):
            break
    return val, dval


_march_anchors: dict[int, tuple[float, float]] = {}


def _ai_march(x: float) -> tuple[float, float]:
    """(Ai, Ai') on the midrange (4.5, 12) by downward Taylor marching."""
    if not _march_anchors:
        a = _X_FAR
        ai, _, dai, _ = _airy_asymptotic_pos(a)
        _march_anchors[0] = (ai, dai)
        idx = 0
        while a - _MARCH_STEP >= _X_POS - 1e-12:
            ai, dai = _taylor_step(a, ai, dai, -_MARCH_STEP)
            a -= _MARCH_STEP
            idx += 1
            _march_anchors[idx] = (ai, dai)
    # nearest anchor at or above x, then one downward step
    idx = int(math.floor((_X_FAR - x) / _MARCH_STEP))
    anchor_x = _X_FAR - idx * _MARCH_STEP
    ai, dai = _march_anchors[idx]
    if anchor_x != x:
        ai, dai = _taylor_step(anchor_x, ai, dai, x - anchor_x)
    return ai, dai


def airy_eval(x: float) -> AiryValue:
    """Evaluate Ai, Bi and their derivatives at a real point.

    Accuracy is ~1e-12 relative to the oscillation envelope for |x| <= 20
    and at least 1e-8 beyond.  Bi overflows for x > ~104; such values are
    flagged as ``inf``.  Arguments beyond |x| = 1000 are rejected.
    """
    x = float(x)
    if not math.isfinite(x) or abs(x) > _X_LIMIT:
        raise ValueError(f"airy_eval: |x| must be finite and <= {_X_LIMIT}, got {x}")
    if x < _X_NEG:
        ai, bi, dai, dbi = _airy_asymptotic_neg(x)
    elif x >= _X_FAR:
        ai, bi, dai, dbi = _airy_asymptotic_pos(x)
    else:
        f, g, fp, gp = _maclaurin(x)
        if x <= _X_POS:
            ai = _C1 * f - _C2 * g
            dai = _C1 * fp - _C2 * gp
        else:
            ai, dai = _ai_march(x)
        bi = _SQRT3 * (_C1 * f + _C2 * g)
        dbi = _SQRT3 * (_C1 * fp + _C2 * gp)
    return AiryValue(ai=ai, bi=bi, dai=dai, dbi=dbi)


_root_c_cache: list[float] = []


def airy_root_c() -> float:
    """The negative root of Ai(x) = Bi(x) of smallest absolute value.

    Computed once by bisection on (-1, 0); never hard-coded.
    """
    if _root_c_cache:
        return _root_c_cache[0]
    lo, hi = -1.0, 0.0  # Ai-Bi > 0 at -1, < 0 at 0

    def diff(x):
        v = airy_eval(x)
        return v.ai - v.bi

    flo = diff(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = diff(mid)
        if flo * fm > 0.0:
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    c = 0.5 * (lo + hi)
    _root_c_cache.append(c)
    return c


def auxiliary_eval(x: float) -> AuxValue:
    """Olver's auxiliary functions E(x) and M(x).

    E = 1 left of the root c of Ai = Bi and sqrt(Bi/Ai) right of it;
    M^2 = Ai^2 + Bi^2 left of c and 2 Ai Bi right of it.  For x >= 12 the
    product form is evaluated from the asymptotic series directly so that M
    stays finite long after Ai underflows and Bi overflows.
    """
    x = float(x)
    c = airy_root_c()
    if x >= _X_FAR:
        zeta = (2.0 / 3.0) * x**1.5
        su_a, _ = _asymptotic_u_v(zeta, alternating=True)
        su_b, _ = _asymptotic_u_v(zeta, alternating=False)
        m = math.sqrt(su_a * su_b / (math.pi * math.sqrt(x)))
        try:
            e = math.exp(zeta) * math.sqrt(su_b / su_a)
        except OverflowError:
            e = math.inf
        return AuxValue(e=e, m=m, at=x)
    v = airy_eval(x)
    if x <= c:
        return AuxValue(e=1.0, m=math.hypot(v.ai, v.bi), at=x)
    return AuxValue(e=math.sqrt(v.bi / v.ai), m=math.sqrt(2.0 * v.ai * v.bi), at=x)


_gauss_nodes, _gauss_weights = np.polynomial.legendre.leggauss(10)


def _gauss_panel(f, lo: float, hi: float) -> float:
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return half * float(np.sum(_gauss_weights * f(mid + half * _gauss_nodes)))


def _adaptive(f, a: float, b: float, tol: float, max_intervals: int) -> float:
    """Adaptive 10-point Gauss with acceptance by interval halving."""
    if a == b:
        return 0.0
    total_len = b - a
    # seed with a modest uniform split so a deceptive first panel cannot
    # terminate the refinement early
    seeds = np.linspace(a, b, 9)
    stack = [(lo, hi, _gauss_panel(f, lo, hi)) for lo, hi in zip(seeds[:-1], seeds[1:])]
    accepted = 0.0
    err_accum = 0.0
    n_intervals = len(stack)
    while stack:
        lo, hi, whole = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _gauss_panel(f, lo, mid)
        right = _gauss_panel(f, mid, hi)
        err = abs(whole - (left + right))
        if err <= tol * (hi - lo) / total_len or (hi - lo) < 1e-15 * total_len:
            accepted += left + right
            err_accum += err
        else:
            stack.append((lo, mid, left))
            stack.append((mid, hi, right))
            n_intervals += 1
            if n_intervals > max_intervals:
                partial = accepted + sum(seg[2] for seg in stack)
                raise IntegrationError(
                    f"quadrature did not converge within {max_intervals} intervals",
                    achieved=err_accum,
                    estimate=partial,
                )
    return accepted


def integrate(f, a: float, b: float, mode: str = "smooth", tol: float = 1e-9,
              max_intervals: int = 200_000) -> float:
    """Integrate ``f`` over (a, b) to absolute tolerance ``tol``.

    ``f`` must accept numpy arrays.  Modes:

    - ``smooth``: plain adaptive Gauss panels.
    - ``sqrt_endpoint_a`` / ``sqrt_endpoint_b``: substitute s^2 = |x - endpoint|
      so integrands behaving like |x-endpoint|^(+-1/2) become smooth.
    - ``sqrt_both``: split at the midpoint and substitute at both ends.

    Raises IntegrationError (carrying the achieved error estimate) if the
    halving refinement does not certify ``tol``.
    """
    a = float(a)
    b = float(b)
    if b < a:
        flipped = {"sqrt_endpoint_a": "sqrt_endpoint_b",
                   "sqrt_endpoint_b": "sqrt_endpoint_a"}.get(mode, mode)
        return -integrate(f, b, a, mode=flipped, tol=tol, max_intervals=max_intervals)
    if b == a:
        return 0.0
    if mode == "smooth":
        return _adaptive(f, a, b, tol, max_intervals)
    if mode == "sqrt_endpoint_a":
        smax = math.sqrt(b - a)
        return _adaptive(lambda s: 2.0 * s * f(a + s * s), 0.0, smax, tol, max_intervals)
    if mode == "sqrt_endpoint_b":
        smax = math.sqrt(b - a)
        return _adaptive(lambda s: 2.0 * s * f(b - s * s), 0.0, smax, tol, max_intervals)
    if mode == "sqrt_both":
        mid = 0.5 * (a + b)
        left = integrate(f, a, mid, mode="sqrt_endpoint_a", tol=0.5 * tol,
                         max_intervals=max_intervals)
        right = integrate(f, mid, b, mode="sqrt_endpoint_b", tol=0.5 * tol,
                          max_intervals=max_intervals)
        return left + right
    raise ValueError(f"unknown quadrature mode {mode!r}")
