"""Command-line driver: ``fnwos {solve,train,convergence,ablation,eval-checkpoint}``."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import surrogate as sg
from .geometry import sample_interior
from .problems import make_problem
from .trainer import TrainResult, loss_windows, stream, train_bfnwos, train_fnwos
from .walker import PHASE_EVAL, MissingExactSolution, estimate_points, relative_l2_values

_STREAM_TEST_POINTS = 20

ENV_SEED = "FNWOS_SEED"
ENV_WORKERS = "FNWOS_WORKERS"


class UsageError(ValueError):
    pass


# --------------------------------------------------------------------------
# helpers


def _resolve(args) -> tuple[cfgmod.RunConfig, int]:
    cfg = cfgmod.load(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    elif os.environ.get(ENV_SEED):
        cfg.seed = _env_int(ENV_SEED)
    if args.workers is not None:
        cfg.workers = args.workers
    elif os.environ.get(ENV_WORKERS):
        cfg.workers = _env_int(ENV_WORKERS)
    if args.out is not None:
        cfg.out = args.out
    if cfg.seed < 0 or cfg.workers < 0:
        raise UsageError("seed and workers must be non-negative")
    workers = cfg.workers or (os.cpu_count() or 1)
    return cfg, workers


def _env_int(name: str) -> int:
    try:
        return int(os.environ[name])
    except ValueError:
        raise UsageError(f"environment variable {name} must be an integer") from None


def _require_method(cfg, allowed, command):
    if cfg.method not in allowed:
        raise UsageError(f"'{command}' needs method in {allowed}, config has method = {cfg.method!r}")


def _out_dir(cfg) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _test_points(cfg, problem, offset: int = 0) -> np.ndarray:
    if cfg.eval.points_file:
        pts = np.loadtxt(cfg.eval.points_file, delimiter=",", ndmin=2)
        if pts.shape[1] != problem.dimension:
            raise UsageError(f"points file has {pts.shape[1]} columns, problem dimension is {problem.dimension}")
        return pts
    return sample_interior(problem.domain, cfg.eval.n_points, stream(cfg.seed, _STREAM_TEST_POINTS, offset))


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _summary_base(cfg, workers) -> dict:
    return {
        "config": cfgmod.to_dict(cfg),
        "seed": cfg.seed,
        "workers": workers,
        "adam": {"beta1": sg.ADAM_BETA1, "beta2": sg.ADAM_BETA2, "eps": sg.ADAM_EPS},
        "network": {"block": "h + gelu(W h + b)", "init": "uniform(+-1/sqrt(fan_in)), zero bias"},
    }


def _rel(problem, approx, pts):
    if problem.exact_u is None:
        return None
    return relative_l2_values(approx, problem.exact_u(pts))


def _write_points(path: Path, pts, est, exact) -> None:
    d = pts.shape[1]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i}" for i in range(d)] + ["estimate", "exact", "abs_error"])
        for i in range(pts.shape[0]):
            ex = "" if exact is None else repr(float(exact[i]))
            err = "" if exact is None else repr(abs(float(est[i]) - float(exact[i])))
            w.writerow([repr(float(v)) for v in pts[i]] + [repr(float(est[i])), ex, err])


# --------------------------------------------------------------------------
# commands


def cmd_solve(cfg, workers) -> dict:
    _require_method(cfg, ("fwos",), "solve")
    problem = make_problem(cfg.benchmark_id())
    pts = _test_points(cfg, problem)
    t0 = time.perf_counter()
    s = cfg.solver
    rep = estimate_points(problem, pts, s.n_traj, s.eps, s.k_cap, cfg.seed, key=(PHASE_EVAL,), workers=workers)
    wall = time.perf_counter() - t0
    exact = problem.exact_u(pts) if problem.exact_u is not None else None
    out = _out_dir(cfg)
    _write_points(out / "points.csv", pts, rep.values, exact)
    summary = _summary_base(cfg, workers)
    summary.update(
        command="solve",
        relative_l2=_rel(problem, rep.values, pts),
        mean_steps=rep.mean_steps,
        non_exited=rep.non_exited,
        non_exited_rate=rep.non_exited_rate,
        wall_clock_s=wall,
    )
    _write_json(out / "summary.json", summary)
    return summary


def _train(cfg, workers, problem, replacement=None, ckpt_path: Path | None = None) -> TrainResult:
    plan = cfg.train_plan(workers=workers, replacement=replacement)
    every = cfg.train.checkpoint_every

    def flush(k, net, opt):
        if ckpt_path is not None and (k + 1) % every == 0:
            sg.save_checkpoint(net, opt, ckpt_path)

    fn = train_fnwos if cfg.method == "fnwos" else train_bfnwos
    return fn(problem, plan, callback=flush)


def _write_loss(path: Path, log) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "lr", "interior_loss", "boundary_loss", "total_loss"])
        for row in log.iterations:
            w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


def _write_refresh(path: Path, log) -> None:
    if not log.refreshes:
        return
    keys = list(log.refreshes[0].keys())
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        w.writerows(log.refreshes)


def cmd_train(cfg, workers) -> dict:
    _require_method(cfg, ("fnwos", "bfnwos"), "train")
    problem = make_problem(cfg.benchmark_id())
    out = _out_dir(cfg)
    res = _train(cfg, workers, problem, ckpt_path=out / "checkpoint.partial.json")
    sg.save_checkpoint(res.net, res.opt, out / "checkpoint.json")
    partial = out / "checkpoint.partial.json"
    if partial.exists():
        partial.unlink()
    _write_loss(out / "loss.csv", res.log)
    _write_refresh(out / "refresh.csv", res.log)
    pts = _test_points(cfg, problem)
    summary = _summary_base(cfg, workers)
    summary.update(
        command="train",
        relative_l2=_rel(problem, res.net(pts), pts),
        final_loss=res.log.iterations[-1][4],
        loss_windows=loss_windows(res.log),
        timings=res.log.timings,
        target_mean_steps=res.log.mean_steps,
        target_non_exited_rate=res.log.non_exited_rate,
    )
    if res.buffer is not None:
        summary["buffer"] = {
            "mean_fre": float(res.buffer.counts.mean()),
            "replaced_total": res.buffer.replaced_total,
            "refreshes": res.buffer.refreshes,
        }
    _write_json(out / "summary.json", summary)
    return summary


def fit_slope(n_list, errors) -> float | None:
    errs = np.asarray(errors, dtype=np.float64)
    if np.any(errs <= 1e-14):
        return None
    return float(np.polyfit(np.log(np.asarray(n_list, dtype=np.float64)), np.log(errs), 1)[0])


def cmd_convergence(cfg, workers, n_list=None) -> dict:
    _require_method(cfg, ("fwos",), "convergence")
    n_list = list(n_list or cfg.eval.n_list)
    if len(n_list) < 3 or n_list != sorted(n_list):
        raise UsageError("convergence needs an ascending list of at least 3 trajectory counts")
    problem = make_problem(cfg.benchmark_id())
    if problem.exact_u is None:
        raise MissingExactSolution("convergence needs a benchmark with an exact solution")
    s = cfg.solver
    rows = []
    slopes = []
    for rep_i in range(cfg.eval.seeds):
        pts = _test_points(cfg, problem, offset=rep_i)
        exact = problem.exact_u(pts)
        errs = []
        for j, n in enumerate(n_list):
            r = estimate_points(problem, pts, n, s.eps, s.k_cap, cfg.seed, key=(PHASE_EVAL, rep_i, j), workers=workers)
            e = relative_l2_values(r.values, exact)
            errs.append(e)
            rows.append((rep_i, n, e, r.mean_steps, r.non_exited_rate))
        slopes.append(fit_slope(n_list, errs))
    out = _out_dir(cfg)
    with (out / "convergence.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["replicate", "n_traj", "relative_l2", "mean_steps", "non_exited_rate"])
        for r in rows:
            w.writerow([r[0], r[1], repr(r[2]), repr(r[3]), repr(r[4])])
    mean_err = [float(np.mean([r[2] for r in rows if r[1] == n])) for n in n_list]
    slope = fit_slope(n_list, mean_err)
    summary = _summary_base(cfg, workers)
    summary.update(
        command="convergence",
        n_list=n_list,
        mean_relative_l2=mean_err,
        slope=slope,
        slope_skipped=slope is None,
        replicate_slopes=slopes,
    )
    _write_json(out / "summary.json", summary)
    return summary


def cmd_ablation(cfg, workers) -> dict:
    _require_method(cfg, ("bfnwos",), "ablation")
    problem = make_problem(cfg.benchmark_id())
    pts = _test_points(cfg, problem)
    out = _out_dir(cfg)
    result = {}
    for label, flag in (("with_replacement", True), ("without_replacement", False)):
        res = _train(cfg, workers, problem, replacement=flag)
        result[label] = _rel(problem, res.net(pts), pts)
        sg.save_checkpoint(res.net, res.opt, out / f"checkpoint_{label}.json")
    with (out / "ablation.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "without_replacement", "with_replacement"])
        w.writerow([cfg.benchmark.alpha, repr(result["without_replacement"]), repr(result["with_replacement"])])
    summary = _summary_base(cfg, workers)
    summary.update(command="ablation", **result)
    _write_json(out / "summary.json", summary)
    return summary


def cmd_eval_checkpoint(cfg, workers, checkpoint) -> dict:
    problem = make_problem(cfg.benchmark_id())
    net, _ = sg.load_checkpoint(checkpoint, expect_input_dim=problem.dimension)
    pts = _test_points(cfg, problem)
    est = net(pts)
    exact = problem.exact_u(pts) if problem.exact_u is not None else None
    out = _out_dir(cfg)
    _write_points(out / "points.csv", pts, est, exact)
    summary = _summary_base(cfg, workers)
    summary.update(command="eval-checkpoint", checkpoint=str(checkpoint), relative_l2=_rel(problem, est, pts))
    _write_json(out / "summary.json", summary)
    return summary


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="run configuration (TOML)")
    common.add_argument("--seed", type=int, help=f"override the config seed (env {ENV_SEED})")
    common.add_argument("--workers", type=int, help=f"worker processes, 0 = all cores (env {ENV_WORKERS})")
    common.add_argument("--out", help="output directory")

    parser = argparse.ArgumentParser(prog="fnwos", description="Fractional walk-on-spheres solvers")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="FWoS estimates at test points")
    sub.add_parser("train", parents=[common], help="train an FNWoS or BFNWoS surrogate")
    conv = sub.add_parser("convergence", parents=[common], help="FWoS error versus trajectory count")
    conv.add_argument("--n-list", type=int, nargs="+", help="trajectory counts (ascending)")
    sub.add_parser("ablation", parents=[common], help="BFNWoS with and without buffer replacement")
    ev = sub.add_parser("eval-checkpoint", parents=[common], help="evaluate a saved surrogate")
    ev.add_argument("--checkpoint", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return 0
        _emit_error("UsageError", "invalid command line (see usage above)")
        return 2
    try:
        cfg, workers = _resolve(args)
        if args.command == "solve":
            summary = cmd_solve(cfg, workers)
        elif args.command == "train":
            summary = cmd_train(cfg, workers)
        elif args.command == "convergence":
            summary = cmd_convergence(cfg, workers, args.n_list)
        elif args.command == "ablation":
            summary = cmd_ablation(cfg, workers)
        else:
            summary = cmd_eval_checkpoint(cfg, workers, args.checkpoint)
    except (cfgmod.ConfigError, UsageError) as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 2
    except Exception as exc:  # noqa: BLE001 - surfaced as machine-readable error
        _emit_error(type(exc).__name__, str(exc))
        return 1
    keys = ("relative_l2", "slope", "with_replacement", "without_replacement")
    print(json.dumps({k: summary[k] for k in keys if k in summary} | {"out": str(Path(cfg.out))}))
    return 0


def _emit_error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


if __name__ == "__main__":
    sys.exit(main())
