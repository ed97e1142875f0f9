"""Benchmark fixtures with closed-form (or series) exact solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import specfun
from .geometry import Domain, blob, build_domain, shell, unit_ball, unit_cube
from .walker import Problem

BENCHMARKS = ("ball_poly", "disk_indicator", "cube_rational", "gaussian_irregular", "constant")

DISK_N_MAX = 60
DISK_L_MAX = 61


@dataclass(frozen=True)
class BenchmarkId:
    id: str
    dimension: int
    alpha: float
    n_max: int = DISK_N_MAX
    l_max: int = DISK_L_MAX
    # gaussian_irregular and constant: "blob", "shell", "ball", "cube", or a domain record for build_domain
    domain: Any = "blob"
    # constant only: f = 0 and g = u = value
    value: float = 1.0

    def __post_init__(self):
        if self.id not in BENCHMARKS:
            raise ValueError(f"unknown benchmark {self.id!r}; expected one of {', '.join(BENCHMARKS)}")
        if self.id == "disk_indicator" and self.dimension != 2:
            raise ValueError("disk_indicator is defined in dimension 2 only")
        if self.n_max < 0 or self.l_max < 0:
            raise ValueError("series truncation bounds must be non-negative")


def _sq(x: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", x, x)


# Problem data are module-level callables (not closures) so problems pickle into worker processes.


class Zero:
    def __call__(self, x):
        return np.zeros(x.shape[0])


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, x):
        return np.full(x.shape[0], self.value)


@dataclass(frozen=True)
class BallPolySource:
    c: float
    k: float

    def __call__(self, x):
        return self.c * (1.0 - self.k * _sq(x))


@dataclass(frozen=True)
class BallPolyExact:
    alpha: float

    def __call__(self, x):
        return np.power(np.clip(1.0 - _sq(x), 0.0, None), 1.0 + 0.5 * self.alpha)


class HalfPlaneIndicator:
    def __call__(self, x):
        return (x[:, 0] > 0.0).astype(np.float64)


@dataclass(frozen=True)
class DiskSeries:
    alpha: float
    n_max: int
    l_max: int

    def __call__(self, x):
        r = np.sqrt(_sq(x))
        theta = np.arctan2(x[:, 1], x[:, 0])
        return exact_disk_series(r, theta, self.alpha, self.n_max, self.l_max)


@dataclass(frozen=True)
class CubeSource:
    c: float
    a: float
    b: float
    cc: float

    def __call__(self, x):
        s = _sq(x)
        z = s / (1.0 + s)
        h = specfun.checked(specfun.hyp2f1_vec(self.a, self.b, self.cc, z), "2F1 in cube source")
        return self.c * np.power(1.0 + s, -self.a) * h


@dataclass(frozen=True)
class CubeExact:
    d: int

    def __call__(self, x):
        return self.d * np.power(1.0 + _sq(x), -1.5)


@dataclass(frozen=True)
class GaussianSource:
    c: float
    a: float
    b: float

    def __call__(self, x):
        return self.c * specfun.checked(specfun.hyp1f1_vec(self.a, self.b, -_sq(x)), "1F1 in gaussian source")


class Gaussian:
    def __call__(self, x):
        return np.exp(-_sq(x))


def _ball_poly(d: int, alpha: float) -> Problem:
    lg = specfun.ln_gamma
    c = math.exp(alpha * math.log(2.0) + lg(0.5 * alpha + 2.0) + lg(0.5 * (alpha + d)) - lg(0.5 * d))
    return Problem(alpha, unit_ball(d), BallPolySource(c, 1.0 + alpha / d), Zero(), BallPolyExact(alpha), name="ball_poly")


def _disk_indicator(alpha: float, n_max: int, l_max: int) -> Problem:
    return Problem(alpha, unit_ball(2), HalfPlaneIndicator(), Zero(), DiskSeries(alpha, n_max, l_max), name="disk_indicator")


def _cube_rational(d: int, alpha: float) -> Problem:
    lg = specfun.ln_gamma
    c = d * math.exp(
        alpha * math.log(2.0) + lg(0.5 * (alpha + d)) + lg(0.5 * (alpha + 3.0)) - lg(1.5) - lg(0.5 * d)
    )
    u = CubeExact(d)
    return Problem(alpha, unit_cube(d), CubeSource(c, 0.5 * (alpha + 3.0), -0.5 * alpha, 0.5 * d), u, u, name="cube_rational")


def _irregular_domain(shape, d: int) -> Domain:
    if isinstance(shape, Domain):
        return shape
    if shape == "blob":
        return blob(d)
    if shape == "shell":
        return shell(d)
    if shape == "ball":
        return unit_ball(d)
    if shape == "cube":
        return unit_cube(d)
    if isinstance(shape, dict):
        return build_domain(shape)
    raise ValueError(f"unknown irregular domain {shape!r}")


def _gaussian_irregular(d: int, alpha: float, domain_desc) -> Problem:
    lg = specfun.ln_gamma
    c = math.exp(alpha * math.log(2.0) + lg(0.5 * (alpha + d)) - lg(0.5 * d))
    dom = _irregular_domain(domain_desc, d)
    if dom.dimension != d:
        raise ValueError(f"domain dimension {dom.dimension} differs from benchmark dimension {d}")
    u = Gaussian()
    return Problem(alpha, dom, GaussianSource(c, 0.5 * (alpha + d), 0.5 * d), u, u, name="gaussian_irregular")


def make_problem(bench: BenchmarkId) -> Problem:
    if bench.id == "ball_poly":
        return _ball_poly(bench.dimension, bench.alpha)
    if bench.id == "disk_indicator":
        return _disk_indicator(bench.alpha, bench.n_max, bench.l_max)
    if bench.id == "cube_rational":
        return _cube_rational(bench.dimension, bench.alpha)
    if bench.id == "constant":
        return constant_problem(_irregular_domain(bench.domain, bench.dimension), bench.alpha, bench.value)
    return _gaussian_irregular(bench.dimension, bench.alpha, bench.domain)


def _ln_binom(a: float, b: float) -> float:
    lg = specfun.ln_gamma
    return lg(a + 1.0) - lg(b + 1.0) - lg(a - b + 1.0)


def exact_disk_series(r, theta, alpha: float, n_max: int = DISK_N_MAX, l_max: int = DISK_L_MAX):
    """Partial sum of the Jacobi double series for the half-disk indicator source.

    Sums n = 0..n_max and odd l = 1..l_max. Accepts scalars or equal-shape arrays.
    """
    if n_max < 0 or l_max < 0:
        raise ValueError("series truncation bounds must be non-negative")
    scalar = np.ndim(r) == 0 and np.ndim(theta) == 0
    r = np.atleast_1d(np.asarray(r, dtype=np.float64))
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    r, theta = np.broadcast_arrays(r, theta)
    h = 0.5 * alpha
    inside = r < 1.0
    rr = np.where(inside, r, 0.0)
    x = 2.0 * rr * rr - 1.0

    total = np.full(r.shape, 0.5)
    for ell in range(1, l_max + 1, 2):
        table = specfun.jacobi_table(n_max, h, float(ell), x.ravel()).reshape((n_max + 1,) + r.shape)
        radial = np.zeros(r.shape)
        for n in range(n_max + 1):
            sign = -1.0 if ((ell + 1) // 2 + n + 1) % 2 else 1.0
            log_den = (
                math.log(math.pi * (n + 0.5 * ell) * (h + 1.0))
                + _ln_binom(n + h + 0.5 * ell + 1.0, n + 0.5 * ell)
                + _ln_binom(h + n, float(n))
            )
            radial += sign * (2 * n + h + ell + 1) * math.exp(-log_den) * table[n]
        total += np.cos(ell * theta) * np.power(rr, ell) * radial

    pref = 2.0 ** (-alpha) * np.power(np.clip(1.0 - rr * rr, 0.0, None), h) / math.gamma(1.0 + h) ** 2
    out = np.where(inside, pref * total, 0.0)
    return float(out[0]) if scalar else out


def constant_problem(domain: Domain, alpha: float, value: float) -> Problem:
    """f = 0, g = u = value: every estimator must return ``value`` exactly."""
    g = Constant(float(value))
    return Problem(alpha, domain, Zero(), g, g, name="constant")
