from pathlib import Path

import pytest

from fnwos import config as cfgmod
from fnwos.config import ConfigError

CONFIGS = sorted((Path(__file__).resolve().parent.parent / "configs").rglob("*.toml"))


def test_presets_present():
    names = {p.stem for p in CONFIGS}
    for prefix in ("ball10_", "ball50_", "ball50_timing_", "cube10_", "cube_scaling_", "disk2_", "irregular_", "ball10_ablation_"):
        assert any(n.startswith(prefix) for n in names), prefix


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_presets_load_and_round_trip(path):
    cfg = cfgmod.load(path)
    again = cfgmod.loads(cfgmod.dumps(cfg))
    assert again == cfg
    cfg.benchmark_id()
    if cfg.method != "fwos":
        cfg.train_plan()


def test_defaults():
    cfg = cfgmod.loads("")
    assert cfg.method == "fwos" and cfg.eval.n_points == 100_000


def test_unknown_key_line():
    text = 'method = "fwos"\n\n[solver]\nn_traj = 4\nbogus = 1\n'
    with pytest.raises(ConfigError) as err:
        cfgmod.loads(text, "x.toml")
    assert err.value.line == 5 and "bogus" in str(err.value) and str(err.value).startswith("x.toml:5:")


def test_unknown_table():
    with pytest.raises(ConfigError) as err:
        cfgmod.loads('seed = 1\n[weird]\na = 1\n')
    assert err.value.line == 2


@pytest.mark.parametrize(
    "text, line",
    [
        ('[benchmark]\nalpha = 2.0\n', 2),
        ('[benchmark]\ndimension = "ten"\n', 2),
        ('method = "sgd"\n', 1),
        ('[solver]\neps = 0.0\n', 2),
        ('[train]\nm = 4\np_boundary = 1.5\n', 3),
        ('[eval]\nn_list = [100, 10]\n', 2),
        ('[benchmark]\nid = "disk_indicator"\ndimension = 3\n', 3),
        ('[train]\nreplacement = 1\n', 2),
    ],
)
def test_validation_lines(text, line):
    with pytest.raises(ConfigError) as err:
        cfgmod.loads(text)
    assert err.value.line == line


def test_syntax_error_line():
    with pytest.raises(ConfigError) as err:
        cfgmod.loads('seed = 1\nmethod = \n')
    assert err.value.line == 2


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        cfgmod.load(tmp_path / "nope.toml")


def test_int_accepted_for_float():
    cfg = cfgmod.loads('[benchmark]\nalpha = 1\n')
    assert cfg.benchmark.alpha == 1.0 and isinstance(cfg.benchmark.alpha, float)


def test_domain_table():
    cfg = cfgmod.loads('[benchmark]\nid = "gaussian_irregular"\ndimension = 3\ndomain = "shell"\n')
    assert cfg.benchmark_id().domain == "shell"
