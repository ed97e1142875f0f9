"""Run configuration: TOML parsing with line-located validation errors, and serialisation."""

from __future__ import annotations

import dataclasses
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from .problems import BENCHMARKS, DISK_L_MAX, DISK_N_MAX, BenchmarkId
from .trainer import TrainPlan

METHODS = ("fwos", "fnwos", "bfnwos")


class ConfigError(ValueError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path, self.line = path, line
        where = f"{path or '<config>'}:{line}" if line else (path or "<config>")
        super().__init__(f"{where}: {message}")


@dataclass
class BenchmarkSection:
    id: str = "ball_poly"
    dimension: int = 10
    alpha: float = 0.4
    n_max: int = DISK_N_MAX
    l_max: int = DISK_L_MAX
    domain: Any = "blob"
    value: float = 1.0


@dataclass
class SolverSection:
    n_traj: int = 100
    k_cap: int = 1000
    eps: float = 1e-4


@dataclass
class TrainSection:
    iterations: int = 40000
    m: int = 8192
    p_boundary: float = 0.1
    beta: float = 10.0
    width: int = 256
    depth: int = 6
    lr: float = 1e-3
    warmup: int = 1
    refresh_interval: int = 100
    p_refine: float = 0.6
    n_init: int = 1
    k_init: int = 1000
    replacement: bool = True
    log_every: int = 1
    checkpoint_every: int = 1000


@dataclass
class EvalSection:
    n_points: int = 100000
    points_file: str = ""
    n_list: list = field(default_factory=lambda: [100, 1000, 10000])
    seeds: int = 1


@dataclass
class RunConfig:
    method: str = "fwos"
    name: str = ""
    seed: int = 0
    workers: int = 0  # 0: use every available core
    long_running: bool = False
    out: str = "runs"
    benchmark: BenchmarkSection = field(default_factory=BenchmarkSection)
    solver: SolverSection = field(default_factory=SolverSection)
    train: TrainSection = field(default_factory=TrainSection)
    eval: EvalSection = field(default_factory=EvalSection)

    def benchmark_id(self) -> BenchmarkId:
        b = self.benchmark
        return BenchmarkId(b.id, b.dimension, b.alpha, b.n_max, b.l_max, b.domain, b.value)

    def train_plan(self, workers: int = 1, replacement: bool | None = None) -> TrainPlan:
        t, s = self.train, self.solver
        return TrainPlan(
            iterations=t.iterations, m=t.m, p_boundary=t.p_boundary, n_traj=s.n_traj, k_cap=s.k_cap,
            eps=s.eps, beta=t.beta, seed=self.seed, warmup=t.warmup, refresh_interval=t.refresh_interval,
            p_refine=t.p_refine, n_init=t.n_init, k_init=t.k_init,
            replacement=t.replacement if replacement is None else replacement,
            width=t.width, depth=t.depth, lr=t.lr, workers=workers, log_every=t.log_every,
        )


_SECTIONS = {"benchmark": BenchmarkSection, "solver": SolverSection, "train": TrainSection, "eval": EvalSection}


def _key_lines(text: str) -> dict:
    """Map (table, key) -> 1-based line, for error messages."""
    out: dict = {}
    table = ""
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"^\[+\s*([^\]]+?)\s*\]+$", line)
        if m:
            table = m.group(1)
            out.setdefault((table, None), i)
            continue
        m = re.match(r'^"?([A-Za-z0-9_\-]+)"?\s*=', line)
        if m:
            out.setdefault((table, m.group(1)), i)
    return out


def _check_type(value, default, where: str):
    if isinstance(default, bool):
        ok = isinstance(value, bool)
        want = "a boolean"
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
        want = "an integer"
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        want = "a number"
        if ok:
            value = float(value)
    elif isinstance(default, str):
        ok = isinstance(value, str)
        want = "a string"
    elif isinstance(default, list):
        ok = isinstance(value, list)
        want = "an array"
    else:
        ok, want = True, ""
    if not ok:
        raise ValueError(f"{where} must be {want}, got {value!r}")
    return value


def _fill(cls, data: dict, table: str, lines: dict, path):
    obj = cls()
    names = {f.name for f in dataclasses.fields(cls)}
    for key, value in data.items():
        line = lines.get((table, key))
        if key not in names:
            raise ConfigError(f"unknown key '{key}' in [{table}]" if table else f"unknown key '{key}'", path, line)
        try:
            value = _check_type(value, getattr(obj, key), f"{table + '.' if table else ''}{key}")
        except ValueError as exc:
            raise ConfigError(str(exc), path, line) from None
        setattr(obj, key, value)
    return obj


def from_dict(data: dict, path: str | None = None, text: str = "") -> RunConfig:
    lines = _key_lines(text)
    top = {k: v for k, v in data.items() if k not in _SECTIONS}
    for key, value in top.items():
        if isinstance(value, dict):
            raise ConfigError(f"unknown table [{key}]", path, lines.get((key, None)))
    cfg = _fill(RunConfig, top, "", lines, path)
    for name, cls in _SECTIONS.items():
        sub = data.get(name, {})
        setattr(cfg, name, _fill(cls, sub, name, lines, path))
    _validate(cfg, lines, path)
    return cfg


def _validate(cfg: RunConfig, lines: dict, path) -> None:
    def fail(msg, table, key):
        raise ConfigError(msg, path, lines.get((table, key)) or lines.get((table, None)))

    if cfg.method not in METHODS:
        fail(f"method must be one of {', '.join(METHODS)}, got {cfg.method!r}", "", "method")
    if cfg.seed < 0:
        fail("seed must be non-negative", "", "seed")
    if cfg.workers < 0:
        fail("workers must be >= 0", "", "workers")
    b = cfg.benchmark
    if b.id not in BENCHMARKS:
        fail(f"benchmark.id must be one of {', '.join(BENCHMARKS)}, got {b.id!r}", "benchmark", "id")
    if not 0.0 < b.alpha < 2.0:
        fail(f"alpha must lie in (0, 2), got {b.alpha}", "benchmark", "alpha")
    if b.dimension < 2 or b.dimension <= b.alpha:
        fail(f"dimension must be >= 2 and exceed alpha, got {b.dimension}", "benchmark", "dimension")
    if b.id == "disk_indicator" and b.dimension != 2:
        fail("disk_indicator requires dimension = 2", "benchmark", "dimension")
    if not isinstance(b.domain, (str, dict)):
        fail("benchmark.domain must be a string or a table", "benchmark", "domain")
    s = cfg.solver
    for key in ("n_traj", "k_cap"):
        if getattr(s, key) < 1:
            fail(f"solver.{key} must be positive", "solver", key)
    if s.eps <= 0.0:
        fail("solver.eps must be positive", "solver", "eps")
    t = cfg.train
    for key in ("iterations", "m", "width", "refresh_interval", "n_init", "k_init", "log_every", "checkpoint_every"):
        if getattr(t, key) < 1:
            fail(f"train.{key} must be positive", "train", key)
    if t.depth < 0 or t.warmup < 0:
        fail("train.depth and train.warmup must be non-negative", "train", "depth" if t.depth < 0 else "warmup")
    if not 0.0 <= t.p_boundary < 1.0:
        fail("train.p_boundary must lie in [0, 1)", "train", "p_boundary")
    if not 0.0 <= t.p_refine <= 1.0:
        fail("train.p_refine must lie in [0, 1]", "train", "p_refine")
    if t.beta < 0 or t.lr <= 0:
        fail("train.beta must be >= 0 and train.lr > 0", "train", "beta" if t.beta < 0 else "lr")
    e = cfg.eval
    if e.n_points < 1 or e.seeds < 1:
        fail("eval.n_points and eval.seeds must be positive", "eval", "n_points" if e.n_points < 1 else "seeds")
    if any((not isinstance(n, int)) or n < 1 for n in e.n_list) or e.n_list != sorted(e.n_list):
        fail("eval.n_list must be ascending positive integers", "eval", "n_list")


def loads(text: str, path: str | None = None) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"TOML syntax error: {exc}", path, int(m.group(1)) if m else None) from None
    return from_dict(data, path, text)


def load(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(p)) from None
    return loads(text, str(p))


def to_dict(cfg: RunConfig) -> dict:
    return dataclasses.asdict(cfg)


def dumps(cfg: RunConfig) -> str:
    return tomli_w.dumps(to_dict(cfg))
