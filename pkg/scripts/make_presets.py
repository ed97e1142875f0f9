"""Regenerate the preset run configurations under configs/."""

from __future__ import annotations

from pathlib import Path

import tomli_w

ROOT = Path(__file__).resolve().parents[1] / "configs"

NET = {"width": 256, "depth": 6, "lr": 1e-3, "p_refine": 0.6}


def write(name: str, method: str, bench: dict, solver: dict, train: dict | None = None,
          evaluation: dict | None = None, long_running: bool = True) -> None:
    rec = {"method": method, "name": name, "seed": 0, "workers": 0, "long_running": long_running,
           "out": f"runs/{name}", "benchmark": bench, "solver": solver}
    if train:
        rec["train"] = {**NET, **train}
    rec["eval"] = {"n_points": 100000, **(evaluation or {})}
    (ROOT / f"{name}.toml").write_text(tomli_w.dumps(rec))


def fmt(a: float) -> str:
    return f"{a:g}".replace(".", "p")


def ball50(tag: str, alphas, fnwos_c: int, bfnwos_c: int) -> None:
    for a in alphas:
        bench = {"id": "ball_poly", "dimension": 50, "alpha": a}
        write(f"{tag}_fwos_a{fmt(a)}", "fwos", bench, {"n_traj": 400, "k_cap": 10000, "eps": 1e-4})
        write(f"{tag}_fnwos_a{fmt(a)}", "fnwos", bench, {"n_traj": 100, "k_cap": 10000, "eps": 1e-4},
              {"iterations": 40000, "m": 8192, "p_boundary": 0.1, "beta": 10.0, "n_init": 100, "k_init": 10000,
               "refresh_interval": 1000000, "warmup": fnwos_c})
        write(f"{tag}_bfnwos_a{fmt(a)}", "bfnwos", bench, {"n_traj": 100, "k_cap": 1, "eps": 1e-4},
              {"iterations": 40000, "m": 8192, "p_boundary": 0.1, "beta": 10.0, "n_init": 30, "k_init": 10000,
               "refresh_interval": 100, "warmup": bfnwos_c})


def disk2() -> None:
    for a in (0.5, 1.5):
        bench = {"id": "disk_indicator", "dimension": 2, "alpha": a}
        write(f"disk2_fwos_a{fmt(a)}", "fwos", bench, {"n_traj": 10000, "k_cap": 1000, "eps": 1e-20})
        write(f"disk2_fnwos_a{fmt(a)}", "fnwos", bench, {"n_traj": 1000, "k_cap": 1000, "eps": 1e-20},
              {"iterations": 150000, "m": 8192, "p_boundary": 0.1, "beta": 1.0, "n_init": 1000, "k_init": 1000,
               "refresh_interval": 1000000, "warmup": 1})
        write(f"disk2_bfnwos_a{fmt(a)}", "bfnwos", bench, {"n_traj": 100, "k_cap": 1, "eps": 1e-20},
              {"iterations": 150000, "m": 8192, "p_boundary": 0.1, "beta": 1.0, "n_init": 1, "k_init": 1000,
               "refresh_interval": 100, "warmup": 1})


def cube10() -> None:
    for a in (0.4, 0.8, 1.2, 1.9):
        bench = {"id": "cube_rational", "dimension": 10, "alpha": a}
        write(f"cube10_fwos_a{fmt(a)}", "fwos", bench, {"n_traj": 10000, "k_cap": 1000, "eps": 1e-4})
        write(f"cube10_fnwos_a{fmt(a)}", "fnwos", bench, {"n_traj": 300, "k_cap": 1000, "eps": 1e-4},
              {"iterations": 100000, "m": 8192, "p_boundary": 0.1, "beta": 5000.0, "n_init": 300, "k_init": 1000,
               "refresh_interval": 1000000, "warmup": 1})
        write(f"cube10_bfnwos_a{fmt(a)}", "bfnwos", bench, {"n_traj": 100, "k_cap": 1, "eps": 1e-4},
              {"iterations": 100000, "m": 8192, "p_boundary": 0.1, "beta": 5000.0,
               "n_init": 10 if a == 1.9 else 1, "k_init": 1000, "refresh_interval": 100, "warmup": 1})


def cube_scaling() -> None:
    rows = {10: (256, 8192, 1000), 100: (512, 8192, 1000), 500: (512, 16384, 1), 1000: (512, 16384, 1)}
    for d, (width, m, n) in rows.items():
        for a in (0.4, 0.8):
            bench = {"id": "cube_rational", "dimension": d, "alpha": a}
            write(f"cube_scaling_fnwos_d{d}_a{fmt(a)}", "fnwos", bench, {"n_traj": n, "k_cap": 1000, "eps": 1e-4},
                  {"iterations": 100000, "m": m, "p_boundary": 0.1, "beta": 5000.0, "n_init": n, "k_init": 1000,
                   "refresh_interval": 1000000, "warmup": 1, "width": width})
            # width override must survive the NET defaults
            path = ROOT / f"cube_scaling_fnwos_d{d}_a{fmt(a)}.toml"
            assert f"width = {width}" in path.read_text()


def irregular() -> None:
    common = {"iterations": 40000, "m": 4096, "p_boundary": 0.001, "beta": 500.0}
    for shape in ("blob", "shell"):
        for a in (0.4, 0.8, 1.2):
            bench = {"id": "gaussian_irregular", "dimension": 3, "alpha": a, "domain": shape}
            write(f"irregular_fnwos_{shape}_a{fmt(a)}", "fnwos", bench, {"n_traj": 1000, "k_cap": 1000, "eps": 1e-4},
                  {**common, "n_init": 1000, "k_init": 1000, "refresh_interval": 1000000, "warmup": 1})
        bench = {"id": "gaussian_irregular", "dimension": 3, "alpha": 1.6, "domain": shape}
        write(f"irregular_bfnwos_{shape}_a1p6", "bfnwos", bench, {"n_traj": 100, "k_cap": 1, "eps": 1e-4},
              {**common, "n_init": 1, "k_init": 1000, "refresh_interval": 100, "warmup": 1})


def ball10() -> None:
    train = {"iterations": 40000, "m": 8192, "p_boundary": 0.1, "beta": 10.0}
    for a in (0.4, 0.8, 1.2, 1.6):
        bench = {"id": "ball_poly", "dimension": 10, "alpha": a}
        write(f"ball10_convergence_a{fmt(a)}", "fwos", bench, {"n_traj": 10000, "k_cap": 1000, "eps": 1e-4},
              evaluation={"n_list": [10, 100, 1000, 10000]})
    for a in (0.4, 1.2):
        bench = {"id": "ball_poly", "dimension": 10, "alpha": a}
        write(f"ball10_fnwos_a{fmt(a)}", "fnwos", bench, {"n_traj": 100, "k_cap": 1000, "eps": 1e-4},
              {**train, "n_init": 100, "k_init": 1000, "refresh_interval": 1000000, "warmup": 1})
        write(f"ball10_fwos_a{fmt(a)}", "fwos", bench, {"n_traj": 10000, "k_cap": 1000, "eps": 1e-4})
    for a in (1.6, 1.9):
        bench = {"id": "ball_poly", "dimension": 10, "alpha": a}
        for k in (1, 2, 1000):
            write(f"ball10_bfnwos_a{fmt(a)}_K{k}", "bfnwos", bench, {"n_traj": 100, "k_cap": k, "eps": 1e-4},
                  {**train, "n_init": 1, "k_init": 1000, "refresh_interval": 100, "warmup": 1})
        write(f"ball10_fwos_a{fmt(a)}", "fwos", bench, {"n_traj": 10000, "k_cap": 1000, "eps": 1e-4})
    for a in (0.4, 0.8, 1.2, 1.6, 1.8, 1.9):
        bench = {"id": "ball_poly", "dimension": 10, "alpha": a}
        write(f"ball10_ablation_a{fmt(a)}", "bfnwos", bench, {"n_traj": 100, "k_cap": 1, "eps": 1e-4},
              {**train, "n_init": 1, "k_init": 1000, "refresh_interval": 100, "warmup": 1})


if __name__ == "__main__":
    ROOT.mkdir(exist_ok=True)
    ball50("ball50", (0.4, 0.8, 1.2, 1.9), fnwos_c=20000, bfnwos_c=20000)
    ball50("ball50_timing", (1.6, 1.8, 1.9), fnwos_c=1, bfnwos_c=20000)
    disk2()
    cube10()
    cube_scaling()
    irregular()
    ball10()
