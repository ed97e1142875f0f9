"""Fractional walk-on-spheres trajectories and the Monte Carlo estimators built on them."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import specfun
from .geometry import Domain, sample_interior, uniform_sphere
from .sampler import check_admissible, jump_distance, omega_constant, open_uniform

ArrayFn = Callable[[np.ndarray], np.ndarray]

# walkers simulated together in one vectorised block
BLOCK_WALKERS = 1 << 15

# stream tags for SeedSequence spawn keys
PHASE_EVAL = 0
PHASE_TRAIN_INIT = 1
PHASE_REFRESH = 2


class MissingExactSolution(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Problem:
    alpha: float
    domain: Domain
    f: ArrayFn
    g: ArrayFn
    exact_u: Optional[ArrayFn] = None
    name: str = ""

    def __post_init__(self):
        check_admissible(self.domain.dimension, self.alpha)

    @property
    def dimension(self) -> int:
        return self.domain.dimension


@dataclass
class WalkOutcome:
    source_sum: float
    terminal: np.ndarray
    steps: int
    exited: bool


@dataclass
class WalkBatch:
    source_sum: np.ndarray
    terminal: np.ndarray
    steps: np.ndarray
    exited: np.ndarray


def walk_batch(problem: Problem, x0: np.ndarray, eps: float, k_cap: int, rng: np.random.Generator) -> WalkBatch:
    """Run independent walks from every row of ``x0`` until the eps-shell, the exterior, or ``k_cap`` steps.

    Random numbers are consumed step by step for the still-active walkers, in the
    order: source radii, source directions, exit radii, exit directions.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    alpha = problem.alpha
    dom = problem.domain
    d = dom.dimension
    x = np.array(x0, dtype=np.float64, copy=True).reshape(-1, d)
    m = x.shape[0]
    w_const = omega_constant(d, alpha)
    a_w, b_w = 0.5 * (d - alpha), 0.5 * alpha
    inv_alpha = 1.0 / alpha

    acc = np.zeros(m)
    steps = np.zeros(m, dtype=np.int64)
    r = dom.dist_to_boundary(x)
    idx = np.flatnonzero(r > eps)
    k = 0
    while idx.size and k < k_cap:
        n = idx.size
        ra = r[idx]
        xa = x[idx]
        xi_src = open_uniform(rng, n)
        u_src = uniform_sphere(n, d, rng)
        xi_jump = open_uniform(rng, n)
        u_jump = uniform_sphere(n, d, rng)

        s = np.power(xi_src, inv_alpha)
        y = xa + (s * ra)[:, None] * u_src
        w = 1.0 - specfun.betainc_vec(s * s, a_w, b_w)
        acc[idx] += w_const * np.power(ra, alpha) * problem.f(y) * w

        jump = jump_distance(ra, alpha, xi_jump)
        xn = xa + jump[:, None] * u_jump
        x[idx] = xn
        steps[idx] += 1
        rn = dom.dist_to_boundary(xn)
        r[idx] = rn
        idx = idx[rn > eps]
        k += 1
    return WalkBatch(acc, x, steps, r <= eps)


def walk(problem: Problem, x0, eps: float, k_cap: int, rng: np.random.Generator) -> WalkOutcome:
    x0 = np.asarray(x0, dtype=np.float64)
    if not problem.domain.contains(x0):
        raise ValueError("walk must start inside the domain")
    b = walk_batch(problem, x0[None, :], eps, k_cap, rng)
    return WalkOutcome(float(b.source_sum[0]), b.terminal[0], int(b.steps[0]), bool(b.exited[0]))


def _complete(problem: Problem, batch: WalkBatch, surrogate) -> np.ndarray:
    """Per-walk value: source sum plus g at exited walks, surrogate (or g when absent) otherwise."""
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        tail = np.empty(batch.source_sum.shape)
        done = batch.exited
        if done.any():
            tail[done] = problem.g(batch.terminal[done])
        if (~done).any():
            rest = batch.terminal[~done]
            tail[~done] = problem.g(rest) if surrogate is None else surrogate(rest)
    return batch.source_sum + tail


def _check_inside(problem: Problem, x: np.ndarray) -> None:
    if not np.all(problem.domain.contains(x)):
        raise ValueError("estimator evaluation point lies outside the domain")


def fwos_estimate(problem: Problem, x, n_traj: int, eps: float, k_cap: int, rng: np.random.Generator) -> float:
    """Plain FWoS mean over ``n_traj`` walks from ``x``; capped walks are completed with g at their last point."""
    x = np.asarray(x, dtype=np.float64)
    _check_inside(problem, x[None, :])
    b = walk_batch(problem, np.repeat(x[None, :], n_traj, axis=0), eps, k_cap, rng)
    return float(_complete(problem, b, None).sum() / n_traj)


def fwos_truncated(
    problem: Problem, x, n_traj: int, k_trunc: int, eps: float, frozen_surrogate, rng: np.random.Generator
) -> float:
    """Walks capped at ``k_trunc`` steps whose unfinished tail is replaced by ``frozen_surrogate``."""
    x = np.asarray(x, dtype=np.float64)
    _check_inside(problem, x[None, :])
    b = walk_batch(problem, np.repeat(x[None, :], n_traj, axis=0), eps, k_trunc, rng)
    return float(_complete(problem, b, frozen_surrogate).sum() / n_traj)


# --------------------------------------------------------------------------
# many-point estimation with deterministic blocking


@dataclass
class EstimateReport:
    values: np.ndarray
    mean_steps: float
    non_exited: int
    n_walks: int

    @property
    def non_exited_rate(self) -> float:
        return self.non_exited / max(self.n_walks, 1)


def block_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent stream for ``key`` = (phase, ..., block index)."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def points_per_block(n_traj: int) -> int:
    return max(1, BLOCK_WALKERS // n_traj)


def _run_block(args):
    problem, pts, n_traj, eps, k_cap, surrogate, seed, key, block = args
    rng = block_rng(seed, *key, block)
    walkers = np.repeat(pts, n_traj, axis=0)
    b = walk_batch(problem, walkers, eps, k_cap, rng)
    vals = _complete(problem, b, surrogate).reshape(pts.shape[0], n_traj).sum(axis=1) / n_traj
    return vals, int(b.steps.sum()), int((~b.exited).sum())


def estimate_points(
    problem: Problem,
    points: np.ndarray,
    n_traj: int,
    eps: float,
    k_cap: int,
    seed: int,
    key: tuple = (PHASE_EVAL,),
    surrogate=None,
    workers: int = 1,
    block_points: int | None = None,
) -> EstimateReport:
    """Estimates at many points.

    Points are cut into fixed blocks whose random streams derive only from
    ``(seed, key, block index)``, so results do not depend on ``workers``.
    With ``surrogate`` given, this is the truncated estimator with cap ``k_cap``.
    """
    points = np.asarray(points, dtype=np.float64)
    _check_inside(problem, points)
    bp = block_points or points_per_block(n_traj)
    starts = range(0, points.shape[0], bp)
    jobs = [(problem, points[s : s + bp], n_traj, eps, k_cap, surrogate, seed, tuple(key), i) for i, s in enumerate(starts)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_block, jobs))
    else:
        results = [_run_block(j) for j in jobs]
    vals = np.concatenate([r[0] for r in results]) if results else np.empty(0)
    n_walks = points.shape[0] * n_traj
    steps = sum(r[1] for r in results)
    return EstimateReport(vals, steps / max(n_walks, 1), sum(r[2] for r in results), n_walks)


def default_workers() -> int:
    return os.cpu_count() or 1


def relative_l2(u_hat: ArrayFn, problem: Problem, n_points: int, rng: np.random.Generator, points: np.ndarray | None = None) -> float:
    """||u_hat - u|| / ||u|| over uniform interior samples (or the given ``points``)."""
    if problem.exact_u is None:
        raise MissingExactSolution(f"problem {problem.name or '?'} has no exact solution")
    if n_points < 1:
        raise ValueError("n_points must be positive")
    pts = sample_interior(problem.domain, n_points, rng) if points is None else points
    u = problem.exact_u(pts)
    return relative_l2_values(np.asarray(u_hat(pts)), u)


def relative_l2_values(approx: np.ndarray, exact: np.ndarray) -> float:
    return float(math.sqrt(np.mean((approx - exact) ** 2)) / math.sqrt(np.mean(exact**2)))
