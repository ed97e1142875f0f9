"""FNWoS and BFNWoS training loops.

FNWoS regresses the surrogate onto fixed FWoS targets. BFNWoS keeps a buffer of
(point, running target, trajectory count) triples, built with truncated walks
completed by a frozen copy of the surrogate, and periodically refines and
replaces entries while training.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import surrogate as sg
from .geometry import Composite, sample_boundary, sample_interior
from .walker import PHASE_REFRESH, PHASE_TRAIN_INIT, Problem, estimate_points

# extra stream tags used only here
_STREAM_POINTS = 10
_STREAM_LOOP = 11
_STREAM_NET = 12
_STREAM_POOL = 13

BOUNDARY_POOL_FACTOR = 50


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class TrainPlan:
    iterations: int
    m: int
    p_boundary: float
    n_traj: int
    k_cap: int
    eps: float
    beta: float
    seed: int = 0
    # BFNWoS only
    warmup: int = 1
    refresh_interval: int = 100
    p_refine: float = 0.6
    n_init: int = 1
    k_init: int = 1000
    replacement: bool = True
    # network and optimiser
    width: int = 256
    depth: int = 6
    lr: float = 1e-3
    workers: int = 1
    log_every: int = 1

    def __post_init__(self):
        if self.iterations < 1 or self.m < 1:
            raise PlanError("iterations and m must be positive")
        if not 0.0 <= self.p_boundary < 1.0 or not 0.0 <= self.p_refine <= 1.0:
            raise PlanError("p_boundary must lie in [0, 1) and p_refine in [0, 1]")
        if min(self.n_traj, self.k_cap, self.n_init, self.k_init) < 1:
            raise PlanError("trajectory counts and step caps must be positive")
        if self.eps <= 0 or self.beta < 0:
            raise PlanError("eps must be positive and beta non-negative")
        if self.refresh_interval < 1 or self.warmup < 0:
            raise PlanError("refresh_interval must be positive and warmup non-negative")
        if self.m_interior < 1:
            raise PlanError("interior batch is empty; lower p_boundary")
        if self.n_refine + self.n_replace > self.buffer_size:
            raise PlanError(f"B1 + B2 = {self.n_refine + self.n_replace} exceeds buffer size {self.buffer_size}")

    @property
    def m_boundary(self) -> int:
        return int(round(2 * self.m * self.p_boundary))

    @property
    def m_interior(self) -> int:
        return 2 * self.m - self.m_boundary

    @property
    def n_refine(self) -> int:
        return int(round(self.m * self.p_refine))

    @property
    def n_replace(self) -> int:
        return self.m - self.n_refine if self.replacement else 0

    @property
    def buffer_size(self) -> int:
        return 10 * self.m


@dataclass
class Buffer:
    points: np.ndarray
    targets: np.ndarray
    counts: np.ndarray
    replaced_total: int = 0
    refreshes: int = 0

    @property
    def size(self) -> int:
        return self.points.shape[0]


@dataclass
class TrainLog:
    iterations: list = field(default_factory=list)  # (k, lr, interior, boundary, total)
    refreshes: list = field(default_factory=list)  # dicts of buffer statistics
    timings: dict = field(default_factory=lambda: {"sampling_s": 0.0, "training_s": 0.0})
    mean_steps: float = float("nan")
    non_exited_rate: float = float("nan")


@dataclass
class TrainResult:
    net: sg.Surrogate
    opt: sg.OptimizerState
    log: TrainLog
    buffer: Optional[Buffer] = None
    targets: Optional[tuple] = None  # FNWoS (points, values)


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=key)))


def _net_seed(seed: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(_STREAM_NET,)).generate_state(1)[0])


def prepare_domain(problem: Problem, plan: TrainPlan) -> Problem:
    """Attach a boundary pool of 50 * m_B points when the domain is a composite."""
    dom = problem.domain
    if isinstance(dom, Composite) and dom.boundary_pool is None and plan.m_boundary > 0:
        size = BOUNDARY_POOL_FACTOR * plan.m_boundary
        dom = dom.with_boundary_pool(size, stream(plan.seed, _STREAM_POOL))
        problem = Problem(problem.alpha, dom, problem.f, problem.g, problem.exact_u, problem.name)
    return problem


def _boundary_batch(problem: Problem, plan: TrainPlan, rng):
    if plan.m_boundary == 0 or plan.beta == 0:
        return None, None
    xb = sample_boundary(problem.domain, plan.m_boundary, rng)
    return xb, problem.g(xb)


def _step(net, opt, log, k, xi, yi, xb, gb, plan):
    lr = opt.lr
    # no boundary batch (m_B = 0) means no boundary term
    parts, grads = sg.loss_and_grad(net, xi, yi, xb, gb, plan.beta if xb is not None else 0.0)
    sg.adam_step(net, opt, grads)
    if not math.isfinite(parts.total):
        raise FloatingPointError(f"non-finite loss at iteration {k}")
    if k % plan.log_every == 0 or k == plan.iterations - 1:
        log.iterations.append((k, lr, parts.interior, parts.boundary, parts.total))


def train_fnwos(problem: Problem, plan: TrainPlan, callback: Callable | None = None) -> TrainResult:
    """Algorithm: fixed FWoS targets at m_I interior points, then T Adam steps."""
    problem = prepare_domain(problem, plan)
    log = TrainLog()
    t0 = time.perf_counter()
    pts = sample_interior(problem.domain, plan.m_interior, stream(plan.seed, _STREAM_POINTS))
    rep = estimate_points(
        problem, pts, plan.n_traj, plan.eps, plan.k_cap, plan.seed, key=(PHASE_TRAIN_INIT,), workers=plan.workers
    )
    targets = rep.values
    log.mean_steps, log.non_exited_rate = rep.mean_steps, rep.non_exited_rate
    log.timings["sampling_s"] = time.perf_counter() - t0

    net = sg.init(problem.dimension, plan.width, plan.depth, _net_seed(plan.seed))
    opt = sg.make_optimizer(net, plan.lr, plan.iterations)
    rng = stream(plan.seed, _STREAM_LOOP)
    t0 = time.perf_counter()
    for k in range(plan.iterations):
        xb, gb = _boundary_batch(problem, plan, rng)
        _step(net, opt, log, k, pts, targets, xb, gb, plan)
        if callback is not None:
            callback(k, net, opt)
    log.timings["training_s"] = time.perf_counter() - t0
    return TrainResult(net, opt, log, targets=(pts, targets))


def init_buffer(problem: Problem, plan: TrainPlan, frozen) -> tuple[Buffer, object]:
    """B = 10m interior points with N_init-trajectory targets at cap K_init."""
    pts = sample_interior(problem.domain, plan.buffer_size, stream(plan.seed, _STREAM_POINTS))
    rep = estimate_points(
        problem, pts, plan.n_init, plan.eps, plan.k_init, plan.seed,
        key=(PHASE_TRAIN_INIT,), surrogate=frozen, workers=plan.workers,
    )
    counts = np.full(plan.buffer_size, plan.n_init, dtype=np.int64)
    return Buffer(pts, rep.values.copy(), counts), rep


def refresh_buffer(buffer: Buffer, problem: Problem, plan: TrainPlan, frozen, index: int) -> dict:
    """Refine B1 entries by weighted averaging and replace B2 others; returns statistics.

    ``index`` numbers the refresh and selects its random streams.
    """
    b1, b2 = plan.n_refine, plan.n_replace
    if b1 + b2 > buffer.size:
        raise PlanError(f"B1 + B2 = {b1 + b2} exceeds buffer size {buffer.size}")
    rng = stream(plan.seed, PHASE_REFRESH, index, 0)
    chosen = rng.choice(buffer.size, size=b1 + b2, replace=False)
    refine, replace = chosen[:b1], chosen[b1:]
    steps = 0.0
    non_exit = 0
    walks = 0
    if b1:
        rep = estimate_points(
            problem, buffer.points[refine], plan.n_traj, plan.eps, plan.k_cap, plan.seed,
            key=(PHASE_REFRESH, index, 1), surrogate=frozen, workers=plan.workers,
        )
        fre = buffer.counts[refine]
        buffer.targets[refine] = (fre * buffer.targets[refine] + plan.n_traj * rep.values) / (fre + plan.n_traj)
        buffer.counts[refine] = fre + plan.n_traj
        steps += rep.mean_steps * rep.n_walks
        non_exit += rep.non_exited
        walks += rep.n_walks
    if b2:
        new_pts = sample_interior(problem.domain, b2, rng)
        rep = estimate_points(
            problem, new_pts, plan.n_traj, plan.eps, plan.k_cap, plan.seed,
            key=(PHASE_REFRESH, index, 2), surrogate=frozen, workers=plan.workers,
        )
        buffer.points[replace] = new_pts
        buffer.targets[replace] = rep.values
        buffer.counts[replace] = plan.n_traj
        buffer.replaced_total += b2
        steps += rep.mean_steps * rep.n_walks
        non_exit += rep.non_exited
        walks += rep.n_walks
    buffer.refreshes += 1
    return {
        "refresh": index,
        "mean_fre": float(buffer.counts.mean()),
        "replaced_total": buffer.replaced_total,
        "mean_steps": steps / max(walks, 1),
        "non_exited_rate": non_exit / max(walks, 1),
    }


def train_bfnwos(problem: Problem, plan: TrainPlan, callback: Callable | None = None) -> TrainResult:
    """Buffered training with truncated, surrogate-completed targets and hard target-network updates."""
    problem = prepare_domain(problem, plan)
    log = TrainLog()
    net = sg.init(problem.dimension, plan.width, plan.depth, _net_seed(plan.seed))
    opt = sg.make_optimizer(net, plan.lr, plan.iterations)
    frozen = net.copy()

    t0 = time.perf_counter()
    buffer, rep = init_buffer(problem, plan, frozen)
    log.mean_steps, log.non_exited_rate = rep.mean_steps, rep.non_exited_rate
    log.timings["sampling_s"] += time.perf_counter() - t0

    rng = stream(plan.seed, _STREAM_LOOP)
    n_refresh = 0
    t_train = 0.0
    for k in range(plan.iterations):
        if k % plan.refresh_interval == 0 and k > plan.warmup:
            t0 = time.perf_counter()
            frozen = net.copy()
            stats = refresh_buffer(buffer, problem, plan, frozen, n_refresh)
            stats["iteration"] = k
            log.refreshes.append(stats)
            n_refresh += 1
            log.timings["sampling_s"] += time.perf_counter() - t0
        t0 = time.perf_counter()
        pick = rng.choice(buffer.size, size=plan.m_interior, replace=False)
        xb, gb = _boundary_batch(problem, plan, rng)
        _step(net, opt, log, k, buffer.points[pick], buffer.targets[pick], xb, gb, plan)
        t_train += time.perf_counter() - t0
        if callback is not None:
            callback(k, net, opt)
    log.timings["training_s"] = t_train
    return TrainResult(net, opt, log, buffer=buffer)


def loss_windows(log: TrainLog, window: int = 100, tolerance: float = 0.2) -> dict:
    """Share of consecutive ``window``-iteration blocks whose mean logged loss went up.

    Flagged when that share exceeds ``tolerance``.
    """
    if not log.iterations:
        return {"windows": 0, "increasing": 0, "fraction": 0.0, "flagged": False}
    k = np.array([row[0] for row in log.iterations])
    total = np.array([row[4] for row in log.iterations])
    groups = k // window
    means = [total[groups == g].mean() for g in np.unique(groups)]
    ups = int(sum(b > a for a, b in zip(means, means[1:])))
    n = max(len(means) - 1, 0)
    frac = ups / n if n else 0.0
    return {"windows": n, "increasing": int(ups), "fraction": float(frac), "flagged": bool(frac > tolerance)}


def plan_dict(plan: TrainPlan) -> dict:
    return asdict(plan)
