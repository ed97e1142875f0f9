"""Scalar special functions used by the sampler, the kernels and the benchmark oracles.

Every routine has a numba-compiled scalar core (``_name``) and, where the
walker or the fixtures need it on arrays, a ``*_vec`` ufunc that returns NaN
instead of raising. The public wrappers validate their arguments and raise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

_TINY = 1e-300
_CF_EPS = 1e-16
_CF_MAXIT = 10_000
_INV_TOL = 1e-14
_INV_MAXIT = 200
_SERIES_TOL = 1e-16
SERIES_TERM_CAP = 100_000


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class ConvergenceError(ArithmeticError):
    """Iteration or series did not reach its stopping criterion."""

    def __init__(self, msg: str, partial: "SpecFunResult | None" = None):
        super().__init__(msg)
        self.partial = partial


@dataclass(frozen=True)
class SpecFunResult:
    value: float
    converged: bool
    terms_used: int


# --------------------------------------------------------------------------
# compiled cores


@nb.njit(cache=True)
def _lnbeta(a, b):
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


@nb.njit(cache=True)
def _betacf(x, a, b):
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        de = d * c
        h *= de
        if abs(de - 1.0) < _CF_EPS:
            return h
    return np.nan


@nb.njit(cache=True)
def _betainc(x, a, b):
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    lbt = a * math.log(x) + b * math.log1p(-x) - _lnbeta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(lbt) * _betacf(x, a, b) / a
    return 1.0 - math.exp(lbt) * _betacf(1.0 - x, b, a) / b


@nb.njit(cache=True)
def _betaincinv_guess(p, a, b):
    if a >= 1.0 and b >= 1.0:
        pp = p if p < 0.5 else 1.0 - p
        t = math.sqrt(-2.0 * math.log(pp))
        x = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t
        if p < 0.5:
            x = -x
        al = (x * x - 3.0) / 6.0
        h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0))
        w = x * math.sqrt(al + h) / h - (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (
            al + 5.0 / 6.0 - 2.0 / (3.0 * h)
        )
        return a / (a + b * math.exp(2.0 * w))
    lna = math.log(a / (a + b))
    lnb = math.log(b / (a + b))
    t = math.exp(a * lna) / a
    u = math.exp(b * lnb) / b
    w = t + u
    if p < t / w:
        return math.pow(a * w * p, 1.0 / a)
    return 1.0 - math.pow(b * w * (1.0 - p), 1.0 / b)


@nb.njit(cache=True)
def _betaincinv_lower(p, a, b):
    # root of I(x;a,b) = p by Newton kept inside a shrinking bracket;
    # steps that leave the bracket fall back to (geometric) bisection
    lnb = _lnbeta(a, b)
    lo = 0.0
    hi = 1.0
    x = _betaincinv_guess(p, a, b)
    if not (x > 1e-300):
        x = 1e-300
    if not (x < 1.0):
        x = 0.5
    a1 = a - 1.0
    b1 = b - 1.0
    lp = math.log(p)
    for _ in range(_INV_MAXIT):
        fx = _betainc(x, a, b)
        if fx != fx:
            return np.nan
        err = fx - p
        done = abs(err) <= _INV_TOL * p
        if err < 0.0:
            lo = x
        else:
            hi = x
        # Newton on log I as a function of log x: exact for the power-law tail I ~ c x^a
        xn = -1.0
        if fx > 0.0:
            slope = math.exp(a * math.log(x) + b1 * math.log1p(-x) - lnb) / fx
            if slope > 0.0 and slope < math.inf:
                xn = x * math.exp(-(math.log(fx) - lp) / slope)
        if done:
            # one last free Newton correction squares the remaining error
            if lo <= xn <= hi:
                return xn
            return x
        if not (lo < xn < hi):
            floor = max(lo, 1e-300)
            if hi > 4.0 * floor:
                xn = math.sqrt(floor * hi)
            else:
                xn = 0.5 * (lo + hi)
        if xn == x or hi - lo <= 4e-16 * hi:
            return xn
        x = xn
    return np.nan


@nb.njit(cache=True)
def _betaincinv(p, a, b):
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    # solve on whichever side of the distribution keeps the root below 1/2
    if _betaincinv_guess(p, a, b) > 0.5:
        y = _betaincinv_lower(1.0 - p, b, a)
        return 1.0 - y
    return _betaincinv_lower(p, a, b)


@nb.njit(cache=True)
def _hyp2f1(a, b, c, z):
    s = 1.0
    t = 1.0
    if z == 0.0:
        return s, True, 0
    for k in range(SERIES_TERM_CAP):
        ratio = (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        t *= ratio
        s += t
        if t == 0.0:
            return s, True, k + 1
        if abs(t) < _SERIES_TOL * abs(s) and abs(ratio) < 1.0:
            return s, True, k + 1
    return s, False, SERIES_TERM_CAP


@nb.njit(cache=True)
def _hyp1f1_series(a, b, z):
    s = 1.0
    t = 1.0
    if z == 0.0:
        return s, True, 0
    for k in range(SERIES_TERM_CAP):
        ratio = (a + k) / ((b + k) * (k + 1.0)) * z
        t *= ratio
        s += t
        if t == 0.0:
            return s, True, k + 1
        if abs(t) < _SERIES_TOL * abs(s) and abs(ratio) < 1.0:
            return s, True, k + 1
    return s, False, SERIES_TERM_CAP


@nb.njit(cache=True)
def _hyp1f1(a, b, z):
    if z < 0.0:
        # Kummer transform keeps the series free of cancellation
        s, ok, k = _hyp1f1_series(b - a, b, -z)
        return math.exp(z) * s, ok, k
    return _hyp1f1_series(a, b, z)


@nb.njit(cache=True)
def _jacobi(n, a, b, x):
    if n == 0:
        return 1.0
    p0 = 1.0
    p1 = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0)
    for k in range(2, n + 1):
        s = 2.0 * k + a + b
        c1 = 2.0 * k * (k + a + b) * (s - 2.0)
        c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b)
        c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s
        p0, p1 = p1, (c2 * p1 - c3 * p0) / c1
    return p1


@nb.vectorize(["f8(f8,f8,f8)"], cache=True)
def betainc_vec(x, a, b):
    return _betainc(x, a, b)


@nb.vectorize(["f8(f8,f8,f8)"], cache=True)
def betaincinv_vec(p, a, b):
    return _betaincinv(p, a, b)


@nb.vectorize(["f8(f8,f8,f8,f8)"], cache=True)
def hyp2f1_vec(a, b, c, z):
    s, ok, _ = _hyp2f1(a, b, c, z)
    return s if ok else np.nan


@nb.vectorize(["f8(f8,f8,f8)"], cache=True)
def hyp1f1_vec(a, b, z):
    s, ok, _ = _hyp1f1(a, b, z)
    return s if ok else np.nan


# --------------------------------------------------------------------------
# public scalar API


def _require_positive(**kw):
    for name, v in kw.items():
        if not (v > 0.0):
            raise DomainError(f"{name} must be > 0, got {v!r}")


def ln_gamma(x: float) -> float:
    _require_positive(x=x)
    return math.lgamma(x)


def beta(a: float, b: float) -> float:
    _require_positive(a=a, b=b)
    return math.exp(_lnbeta(float(a), float(b)))


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete Beta ``I(x; a, b)``."""
    _require_positive(a=a, b=b)
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"x must lie in [0, 1], got {x!r}")
    v = _betainc(float(x), float(a), float(b))
    if v != v:
        raise ConvergenceError(f"incomplete beta continued fraction failed at x={x}, a={a}, b={b}")
    return v


def inv_reg_inc_beta(p: float, a: float, b: float) -> float:
    """Return x in [0, 1] with ``I(x; a, b) = p``."""
    _require_positive(a=a, b=b)
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    v = _betaincinv(float(p), float(a), float(b))
    if v != v:
        raise ConvergenceError(f"inverse incomplete beta did not converge for p={p}, a={a}, b={b}")
    return v


def hyp2f1(a: float, b: float, c: float, z: float) -> SpecFunResult:
    """Gauss hypergeometric series for real ``z`` in [0, 1)."""
    _require_positive(c=c)
    if not (0.0 <= z < 1.0):
        raise DomainError(f"z must lie in [0, 1), got {z!r}")
    s, ok, k = _hyp2f1(float(a), float(b), float(c), float(z))
    res = SpecFunResult(s, bool(ok), int(k))
    if not ok:
        raise ConvergenceError(f"2F1({a},{b};{c};{z}) not converged in {k} terms", res)
    return res


def hyp1f1(a: float, b: float, z: float) -> SpecFunResult:
    """Confluent hypergeometric ``1F1(a; b; z)``; negative ``z`` goes through Kummer's transform."""
    _require_positive(b=b)
    s, ok, k = _hyp1f1(float(a), float(b), float(z))
    res = SpecFunResult(s, bool(ok), int(k))
    if not ok:
        raise ConvergenceError(f"1F1({a};{b};{z}) not converged in {k} terms", res)
    return res


def jacobi_p(n: int, a: float, b: float, x: float) -> float:
    if n < 0 or int(n) != n:
        raise DomainError(f"degree must be a nonnegative integer, got {n!r}")
    if not (a > -1.0 and b > -1.0):
        raise DomainError(f"Jacobi parameters must exceed -1, got a={a}, b={b}")
    if not (-1.0 <= x <= 1.0):
        raise DomainError(f"x must lie in [-1, 1], got {x!r}")
    return _jacobi(int(n), float(a), float(b), float(x))


def jacobi_table(n_max: int, a: float, b: float, x: np.ndarray) -> np.ndarray:
    """All ``P_0 .. P_{n_max}`` at the points ``x``; shape ``(n_max + 1, len(x))``."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0)
    for k in range(2, n_max + 1):
        s = 2.0 * k + a + b
        c1 = 2.0 * k * (k + a + b) * (s - 2.0)
        c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s
        out[k] = ((s - 1.0) * (s * (s - 2.0) * x + a * a - b * b) * out[k - 1] - c3 * out[k - 2]) / c1
    return out


def checked(values: np.ndarray, what: str) -> np.ndarray:
    """Raise if a vectorized special-function evaluation produced NaN."""
    if np.isnan(values).any():
        raise ConvergenceError(f"{what}: evaluation failed for {int(np.isnan(values).sum())} inputs")
    return values
