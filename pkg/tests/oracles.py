"""Independent reference computations shared by the test modules."""

import math

import numpy as np
from scipy import integrate, special, stats


def exit_cdf(t, dt, r, alpha):
    """P(J <= t + dt), with 1 - I((r/t')^2; a, b) = I(1 - (r/t')^2; b, a) formed without cancellation."""
    z = ((t - r) + dt) * (t + r + dt) / (t + dt) ** 2
    return special.betainc(1 - alpha / 2, alpha / 2, np.clip(z, 0.0, 1.0))


def rounded_ks_pvalue(sample, cdf):
    """One-sample KS for a continuous law seen through float64 rounding (ties allowed).

    Each distinct value v carries P(X in [v - ulp/2, v + ulp/2]); the kstwo tail
    is conservative for such discrete laws.
    """
    v, counts = np.unique(sample, return_counts=True)
    above = np.cumsum(counts) / sample.size
    below = above - counts / sample.size
    h = np.spacing(v) / 2
    d = max(np.max(np.abs(above - cdf(v, h))), np.max(np.abs(below - cdf(v, -h))))
    return stats.kstwo.sf(d, sample.size)


def green_quadrature(y_norm, r, d, alpha):
    """Ball Green function at centre x = 0 by direct quadrature (t = s^{2/alpha} removes the t^{alpha/2-1} singularity)."""
    rho = (r * r - y_norm**2) / y_norm**2
    upper = rho ** (alpha / 2)
    val, _ = integrate.quad(lambda s: (1 + s ** (2 / alpha)) ** (-d / 2), 0, upper, epsabs=0, epsrel=1e-12, limit=500)
    c = math.gamma(d / 2) / (2**alpha * math.pi ** (d / 2) * math.gamma(alpha / 2) ** 2)
    return c * y_norm ** (alpha - d) * (2 / alpha) * val
