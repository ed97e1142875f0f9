import math

import numpy as np
import pytest
from scipy import integrate, stats

from fnwos import sampler, specfun
from fnwos.specfun import DomainError

from oracles import exit_cdf, green_quadrature, rounded_ks_pvalue

ALPHAS = (0.4, 1.2, 1.9)


def test_admissibility():
    with pytest.raises(DomainError):
        sampler.check_admissible(2, 2.0)
    with pytest.raises(DomainError):
        sampler.check_admissible(1, 1.5)
    sampler.check_admissible(2, 1.99)


def test_open_uniform_excludes_endpoints():
    u = sampler.open_uniform(np.random.default_rng(0), 10_000)
    assert np.all((u > 0) & (u < 1))


def test_direction_norm():
    u = sampler.sample_direction(7, np.random.default_rng(1), 1000)
    assert np.all(np.abs(np.linalg.norm(u, axis=1) - 1) < 1e-12)
    assert sampler.sample_direction(4, np.random.default_rng(1)).shape == (4,)


def test_direction_d1_balanced():
    u = sampler.sample_direction(1, np.random.default_rng(2), 100_000)[:, 0]
    assert set(np.unique(u)) == {-1.0, 1.0}
    assert stats.binomtest(int((u > 0).sum()), u.size).pvalue > 0.01


def test_direction_d3_marginal():
    u = sampler.sample_direction(3, np.random.default_rng(3), 100_000)
    assert stats.kstest(u[:, 2], stats.uniform(-1, 2).cdf).pvalue > 0.01


def test_jump_distance_values():
    assert sampler.jump_distance(1.0, 1.0, 0.5) == pytest.approx(math.sqrt(2), rel=1e-12)
    assert sampler.jump_distance(1.0, 1.2, 1e-12) == pytest.approx(1.0, abs=1e-6)
    assert sampler.jump_distance(1.0, 1.2, 1e-12) >= 1.0


def test_source_radius_values():
    assert sampler.source_radius(1.0, 1.0, 0.5) == 0.5
    assert sampler.source_radius(2.0, 0.5, 0.25) == pytest.approx(0.125, rel=1e-15)
    assert sampler.source_radius(1.0, 0.7, 1 - 1e-15) == pytest.approx(1.0)


def test_weight_values():
    assert sampler.weight_omega(1.0, 2, 1.0) == pytest.approx(1.0, rel=1e-13)
    assert sampler.weight_omega(2.0, 2, 1.0) == pytest.approx(2.0, rel=1e-13)
    assert sampler.weight_omega(1.0, 3, 1.0) == pytest.approx(2 / math.pi, rel=1e-13)


def test_kernel_endpoints():
    assert sampler.kernel_w(0.0, 1.0, 3, 1.2) == 1.0
    assert sampler.kernel_w(1.0, 1.0, 3, 1.2) == 0.0


def test_kernel_centered_reduction():
    rng = np.random.default_rng(4)
    for _ in range(50):
        d = int(rng.integers(2, 6))
        alpha = rng.uniform(0.1, 1.9)
        r = rng.uniform(0.2, 3.0)
        c = rng.standard_normal(d)
        y = c + rng.uniform(0.01, 0.99) * r * sampler.sample_direction(d, rng)
        full = sampler.kernel_w_general(c, y, c, r, d, alpha)
        assert abs(full - sampler.kernel_w(np.linalg.norm(y - c), r, d, alpha)) < 1e-14


def test_step_invariants():
    rng = np.random.default_rng(5)
    c = np.array([0.3, -0.2, 0.1])
    for _ in range(20_000):
        s = sampler.make_step(c, 0.7, 1.2, rng)
        assert abs(np.linalg.norm(s.next_center - c) - s.jump_length) < 1e-12 * s.jump_length
        assert abs(np.linalg.norm(s.source_point - c) - s.source_radius) < 1e-12
        assert s.jump_length > s.ball_radius > s.source_radius


@pytest.mark.parametrize("alpha", ALPHAS)
def test_exit_law_ks(alpha):
    r = 1.5
    j = sampler.jump_distance(r, alpha, sampler.open_uniform(np.random.default_rng(6), 100_000))
    # J > r exactly, but for alpha near 2 a sizeable share of jumps lie within one ulp
    # of r, so the sample is compared against the law of J rounded to float64
    assert np.all(j >= r)
    assert rounded_ks_pvalue(j, lambda t, dt: exit_cdf(t, dt, r, alpha)) > 0.01


@pytest.mark.parametrize("alpha", ALPHAS)
def test_source_law_ks(alpha):
    r = 0.8
    g = sampler.source_radius(r, alpha, sampler.open_uniform(np.random.default_rng(7), 100_000))
    assert np.all(g < r)
    assert stats.kstest(g / r, lambda t: np.clip(t, 0, 1) ** alpha).pvalue > 0.01


def test_green_decomposition():
    rng = np.random.default_rng(8)
    for _ in range(100):
        d = int(rng.integers(2, 4))
        alpha = rng.uniform(0.05, 1.95)
        r = rng.uniform(0.1, 5.0)
        y = rng.uniform(0.01, 0.99) * r
        ours = sampler.weight_omega(r, d, alpha) * sampler.kernel_w(y, r, d, alpha) * sampler.green_q(np.array([y]), r, d, alpha)[0]
        ref = green_quadrature(y, r, d, alpha)
        assert abs(ours / ref - 1) < 1e-6


@pytest.mark.parametrize("d", [2, 3])
def test_source_density_normalised(d):
    rng = np.random.default_rng(9 + d)
    area = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    for _ in range(10):
        alpha, r = rng.uniform(0.05, 1.95), rng.uniform(0.1, 5.0)
        om = sampler.weight_omega(r, d, alpha)
        # rho = r u^{1/alpha} turns rho^{alpha-1} d rho into a smooth integrand
        val, _ = integrate.quad(
            lambda u: om * sampler.green_q(np.array([r * u ** (1 / alpha)]), r, d, alpha)[0]
            * (r * u ** (1 / alpha)) ** (d - 1) * r / alpha * u ** (1 / alpha - 1),
            0, 1, epsabs=0, epsrel=1e-12,
        )
        assert abs(area * val / om - 1) < 1e-6


def test_prefactor_matches_quadrature_constant():
    # green_prefactor is the C~ |y|^{alpha-d} factor used above
    d, alpha = 3, 0.9
    c = math.gamma(d / 2) / (2**alpha * math.pi ** (d / 2) * math.gamma(alpha / 2) ** 2)
    assert sampler.green_prefactor(np.array([0.5]), d, alpha)[0] == pytest.approx(c * 0.5 ** (alpha - d), rel=1e-13)


def test_omega_matches_beta():
    for d, alpha in [(2, 0.5), (10, 1.2), (1000, 1.9)]:
        ref = specfun.beta((d - alpha) / 2, alpha / 2) / (alpha * 2 ** (alpha - 1) * math.gamma(alpha / 2) ** 2)
        assert sampler.omega_constant(d, alpha) == pytest.approx(ref, rel=1e-12)
