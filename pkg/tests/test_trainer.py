import numpy as np
import pytest

from fnwos import geometry, surrogate as sg, trainer
from fnwos.walker import points_per_block
from fnwos.problems import BenchmarkId, constant_problem, make_problem
from fnwos.trainer import Buffer, PlanError, TrainLog, TrainPlan


def plan(**kw):
    base = dict(iterations=20, m=50, p_boundary=0.1, n_traj=8, k_cap=200, eps=1e-4, beta=1.0, width=8, depth=1)
    base.update(kw)
    return TrainPlan(**base)


def test_batch_arithmetic():
    p = plan(m=100, p_boundary=0.1, p_refine=0.6)
    assert (p.m_boundary, p.m_interior) == (20, 180)
    assert (p.n_refine, p.n_replace, p.buffer_size) == (60, 40, 1000)
    q = plan(m=100, replacement=False)
    assert q.n_replace == 0 and q.n_refine == 60


@pytest.mark.parametrize(
    "bad",
    [
        dict(m=0),
        dict(iterations=0),
        dict(p_boundary=1.0),
        dict(p_refine=1.5),
        dict(n_traj=0),
        dict(eps=0.0),
        dict(beta=-1.0),
        dict(refresh_interval=0),
    ],
)
def test_plan_rejects(bad):
    with pytest.raises(PlanError):
        plan(**bad)


def test_refresh_arithmetic():
    prob = make_problem(BenchmarkId("ball_poly", 3, 1.0))
    pl = plan(m=40, p_refine=0.5, n_traj=16)
    rng = np.random.default_rng(0)
    pts = geometry.sample_interior(prob.domain, pl.buffer_size, rng)
    buf = Buffer(pts.copy(), np.zeros(pl.buffer_size), np.full(pl.buffer_size, 4, dtype=np.int64))
    frozen = sg.init(3, 8, 1, 0)
    stats = trainer.refresh_buffer(buf, prob, pl, frozen, 0)
    refined = buf.counts == 4 + 16
    replaced = ~np.all(buf.points == pts, axis=1)
    assert refined.sum() == pl.n_refine
    assert replaced.sum() == pl.n_replace
    assert not np.any(refined & replaced)
    assert np.all(buf.counts[replaced] == 16)
    assert np.all(buf.counts[~refined & ~replaced] == 4)
    assert buf.replaced_total == pl.n_replace and buf.refreshes == 1
    assert stats["mean_fre"] == pytest.approx(buf.counts.mean())
    # weighted average: 4 zero targets averaged with 16 fresh walks
    fresh = prob.exact_u(buf.points[refined])
    assert np.all(np.abs(buf.targets[refined]) <= np.abs(fresh).max() * 10)


def test_weighted_average_of_constant_targets():
    prob = constant_problem(geometry.unit_ball(2), 1.0, 3.0)
    pl = plan(m=10, p_refine=1.0, n_traj=6, replacement=False)
    pts = geometry.sample_interior(prob.domain, pl.buffer_size, np.random.default_rng(1))
    buf = Buffer(pts, np.full(pl.buffer_size, 1.0), np.full(pl.buffer_size, 2, dtype=np.int64))
    trainer.refresh_buffer(buf, prob, pl, lambda x: np.full(len(x), 3.0), 0)
    hit = buf.counts == 8
    assert hit.sum() == 10
    assert np.allclose(buf.targets[hit], (2 * 1.0 + 6 * 3.0) / 8, rtol=0, atol=1e-15)


def test_refresh_schedule_respects_warmup():
    prob = make_problem(BenchmarkId("ball_poly", 2, 1.0))
    res = trainer.train_bfnwos(prob, plan(iterations=25, m=20, refresh_interval=5, warmup=10, n_traj=4, k_cap=3, k_init=3))
    assert [r["iteration"] for r in res.log.refreshes] == [15, 20]
    assert res.buffer.refreshes == 2


def test_reduction_to_fnwos():
    # L > T and K_init = K large: buffer targets over the FNWoS points equal the FNWoS targets;
    # m_I is a whole number of estimator blocks so both runs see the same block streams
    prob = make_problem(BenchmarkId("ball_poly", 2, 1.0))
    kw = dict(iterations=3, m=512, p_boundary=0.0, n_traj=32, k_cap=100_000, n_init=32, k_init=100_000, refresh_interval=10)
    pl = plan(**kw)
    assert pl.m_interior % (points_per_block(32)) == 0
    f = trainer.train_fnwos(prob, pl)
    b = trainer.train_bfnwos(prob, pl)
    pts, vals = f.targets
    assert not b.log.refreshes
    assert b.buffer.points[: pl.m_interior].tobytes() == pts.tobytes()
    assert b.buffer.targets[: pl.m_interior].tobytes() == vals.tobytes()


def test_fnwos_trace_reproducible():
    prob = make_problem(BenchmarkId("ball_poly", 3, 0.8))
    a = trainer.train_fnwos(prob, plan())
    b = trainer.train_fnwos(prob, plan())
    assert a.log.iterations == b.log.iterations
    assert a.net.flat().tobytes() == b.net.flat().tobytes()
    c = trainer.train_fnwos(prob, plan(seed=1))
    assert a.log.iterations != c.log.iterations


def test_bfnwos_trace_reproducible():
    prob = make_problem(BenchmarkId("ball_poly", 3, 1.6))
    pl = plan(iterations=30, refresh_interval=10, k_cap=2, k_init=2)
    a = trainer.train_bfnwos(prob, pl)
    b = trainer.train_bfnwos(prob, pl)
    assert a.log.iterations == b.log.iterations
    assert a.buffer.targets.tobytes() == b.buffer.targets.tobytes()


def test_boundary_pool_for_composite():
    prob = make_problem(BenchmarkId("gaussian_irregular", 3, 0.8, domain="blob"))
    pl = plan(m=20, p_boundary=0.25)
    out = trainer.prepare_domain(prob, pl)
    assert out.domain.boundary_pool.shape == (trainer.BOUNDARY_POOL_FACTOR * pl.m_boundary, 3)


def test_constant_problem_trains():
    prob = constant_problem(geometry.unit_ball(2), 1.0, 0.5)
    res = trainer.train_fnwos(prob, plan(iterations=1500, m=64, width=32, depth=1, lr=1e-2, beta=0.0))
    x = geometry.sample_interior(prob.domain, 500, np.random.default_rng(0))
    assert np.max(np.abs(res.net(x) - 0.5)) < 1e-2


def test_loss_windows():
    log = TrainLog()
    assert trainer.loss_windows(log)["windows"] == 0
    log.iterations = [(k, 1e-3, 0.0, 0.0, 1.0 / (k + 1)) for k in range(1000)]
    w = trainer.loss_windows(log)
    assert w["windows"] == 9 and w["increasing"] == 0 and not w["flagged"]
    log.iterations = [(k, 1e-3, 0.0, 0.0, float(k)) for k in range(1000)]
    assert trainer.loss_windows(log)["flagged"]
