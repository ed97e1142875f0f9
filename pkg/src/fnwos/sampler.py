"""Single-step random quantities and closed-form weights for one inscribed ball.

Everything is in the ball-centred frame: the walker always re-centres on the
current point, so only the centred exit law and source law are needed.

* jump distance J: (r / J)^2 ~ Beta(alpha/2, 1 - alpha/2), drawn by inverse transform
* source radius gamma: (gamma / r)^alpha ~ Uniform(0, 1)
* weight omega_r = r^alpha B((d - alpha)/2, alpha/2) / (alpha 2^(alpha-1) Gamma(alpha/2)^2)
* kernel W = 1 - I(gamma^2 / r^2; (d - alpha)/2, alpha/2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from . import specfun
from .specfun import _betaincinv_guess, _betaincinv_lower
from .geometry import uniform_sphere


def check_admissible(d: int, alpha: float) -> None:
    if not 0.0 < alpha < 2.0:
        raise specfun.DomainError(f"alpha must lie in (0, 2), got {alpha}")
    if not d > alpha:
        raise specfun.DomainError(f"dimension d={d} must exceed alpha={alpha}")


def open_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform draws on the open interval (0, 1)."""
    u = rng.random(n)
    zero = u == 0.0
    while zero.any():
        u[zero] = rng.random(int(zero.sum()))
        zero = u == 0.0
    return u


def sample_direction(d: int, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """Uniform direction(s) on S^{d-1} by normalising Gaussian vectors."""
    if d < 1:
        raise specfun.DomainError("dimension must be positive")
    out = uniform_sphere(1 if n is None else n, d, rng)
    return out[0] if n is None else out


@nb.vectorize(["f8(f8,f8,f8)"], cache=True)
def _jump(xi, r, alpha):
    # J = r / sqrt(x) with x = I^{-1}(1 - xi; a, b). When x is near 1 the root is found
    # as y = 1 - x = I^{-1}(xi; b, a) and J = r + r (1/sqrt(1 - y) - 1), so neither
    # 1 - xi nor 1 - y is rounded and J keeps full relative precision next to r.
    a = 0.5 * alpha
    b = 1.0 - a
    if _betaincinv_guess(1.0 - xi, a, b) > 0.5:
        y = _betaincinv_lower(xi, b, a)
        return r + r * math.expm1(-0.5 * math.log1p(-y))
    x = _betaincinv_lower(1.0 - xi, a, b)
    if x > 0.0:
        # a root that underflows is an arbitrarily long jump; keep positions finite
        return min(r / math.sqrt(x), 1e100 * r)
    if x == 0.0:
        return 1e100 * r
    return np.nan


def jump_distance(r, alpha: float, xi):
    """Exit distance J from the ball of radius r; (r/J)^2 ~ Beta(alpha/2, 1 - alpha/2)."""
    j = _jump(np.asarray(xi, dtype=np.float64), np.asarray(r, dtype=np.float64), float(alpha))
    specfun.checked(np.atleast_1d(j), "jump distance")
    return float(j) if np.ndim(j) == 0 else j


def source_radius(r, alpha: float, xi):
    g = np.power(xi, 1.0 / alpha) * r
    return float(g) if np.ndim(g) == 0 else g


def omega_constant(d: int, alpha: float) -> float:
    """omega_r / r^alpha."""
    check_admissible(d, alpha)
    lnb = specfun.ln_gamma(0.5 * (d - alpha)) + specfun.ln_gamma(0.5 * alpha) - specfun.ln_gamma(0.5 * d)
    return math.exp(lnb - 2.0 * specfun.ln_gamma(0.5 * alpha)) / (alpha * 2.0 ** (alpha - 1.0))


def weight_omega(r, d: int, alpha: float):
    return omega_constant(d, alpha) * np.power(r, alpha)


def kernel_w(gamma, r, d: int, alpha: float):
    check_admissible(d, alpha)
    rho = np.clip(np.square(np.asarray(gamma, dtype=np.float64) / r), 0.0, 1.0)
    w = 1.0 - specfun.betainc_vec(rho, 0.5 * (d - alpha), 0.5 * alpha)
    specfun.checked(np.atleast_1d(w), "kernel W")
    return float(w) if np.ndim(w) == 0 else w


def kernel_w_general(x: np.ndarray, y: np.ndarray, center: np.ndarray, r: float, d: int, alpha: float) -> float:
    """1 - I(rho*(x, y); (d-alpha)/2, alpha/2) for an arbitrary x in the ball (coordinates relative to ``center``)."""
    xr = np.asarray(x) - center
    yr = np.asarray(y) - center
    r2 = r * r
    dxy2 = float(np.sum((xr - yr) ** 2))
    num = r2 * dxy2
    den = (r2 - float(xr @ xr)) * (r2 - float(yr @ yr)) + num
    return 1.0 - specfun.reg_inc_beta(num / den, 0.5 * (d - alpha), 0.5 * alpha)


def green_q(y_minus_x: np.ndarray, r: float, d: int, alpha: float) -> np.ndarray:
    """Normalised source density Q_r(x, y) for the radial offset ``|y - x|`` (array of distances)."""
    log_c = math.log(alpha) + specfun.ln_gamma(0.5 * d) - math.log(2.0) - 0.5 * d * math.log(math.pi) - alpha * math.log(r)
    return math.exp(log_c) * np.power(y_minus_x, alpha - d)


def green_prefactor(y_minus_x: np.ndarray, d: int, alpha: float) -> np.ndarray:
    """C~ |y - x|^{alpha - d}: the ball Green function before its t-integral factor."""
    log_c = specfun.ln_gamma(0.5 * d) - alpha * math.log(2.0) - 0.5 * d * math.log(math.pi) - 2.0 * specfun.ln_gamma(0.5 * alpha)
    return math.exp(log_c) * np.power(y_minus_x, alpha - d)


@dataclass(frozen=True)
class StepSample:
    next_center: np.ndarray
    source_point: np.ndarray
    jump_length: float
    source_radius: float
    ball_radius: float


def make_step(center: np.ndarray, r: float, alpha: float, rng: np.random.Generator) -> StepSample:
    """One ball exit plus one source sample, drawn in the same order the walker uses."""
    center = np.asarray(center, dtype=np.float64)
    d = center.size
    xi_src = open_uniform(rng, 1)[0]
    u_src = sample_direction(d, rng)
    xi_jump = open_uniform(rng, 1)[0]
    u_jump = sample_direction(d, rng)
    gamma = source_radius(r, alpha, xi_src)
    jump = jump_distance(r, alpha, xi_jump)
    return StepSample(center + jump * u_jump, center + gamma * u_src, jump, gamma, float(r))
