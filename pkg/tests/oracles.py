"""Independent high-precision reference implementations used by the tests."""

import mpmath as mp
import numpy as np

mp.mp.dps = 30


def chi2_cdf(x, k):
    pdf = lambda t: t ** (k / 2 - 1) * mp.exp(-t / 2) / (2 ** (k / 2) * mp.gamma(k / 2))
    if x <= k:
        return mp.quad(pdf, [0, x])
    return 1 - mp.quad(pdf, [x, mp.inf])


def t_cdf(x, nu):
    c = mp.gamma((nu + 1) / 2) / (mp.sqrt(nu * mp.pi) * mp.gamma(nu / 2))
    half = mp.quad(lambda t: c * (1 + t * t / nu) ** (-(nu + 1) / 2), [0, abs(x)])
    return 0.5 + half if x >= 0 else 0.5 - half


def f_cdf(x, d1, d2):
    c = mp.beta(d1 / 2, d2 / 2)
    pdf = lambda t: (mp.sqrt((d1 * t) ** d1 * d2 ** d2 / (d1 * t + d2) ** (d1 + d2)) / (t * c))
    mean = d2 / (d2 - 2) if d2 > 2 else 1
    if x <= mean:
        return mp.quad(pdf, [0, x])
    return 1 - mp.quad(pdf, [x, mp.inf])


def norm_cdf(x):
    pdf = lambda t: mp.exp(-t * t / 2) / mp.sqrt(2 * mp.pi)
    if x <= 0:
        return mp.quad(pdf, [-mp.inf, x])
    return 1 - mp.quad(pdf, [x, mp.inf])


def ols(X, y, dps=50):
    """Normal equations solved by explicit inversion in extended precision."""
    with mp.workdps(dps):
        Xm = mp.matrix(X.tolist())
        ym = mp.matrix(y.tolist())
        xtx_inv = (Xm.T * Xm) ** -1
        beta = xtx_inv * (Xm.T * ym)
        resid = ym - Xm * beta
        n, k = X.shape
        s2 = sum(r ** 2 for r in resid) / (n - k)
        se = [mp.sqrt(s2 * xtx_inv[j, j]) for j in range(k)]
        return np.array([float(b) for b in beta]), np.array([float(v) for v in se])


def mc_regression(mean, cov, target, cond, draws, g):
    """OLS on simulated joint-Normal draws."""
    Z = mean + g.standard_normal((draws, mean.size)) @ np.linalg.cholesky(cov).T
    X = np.column_stack([np.ones(draws), Z[:, cond]])
    b, *_ = np.linalg.lstsq(X, Z[:, target], rcond=None)
    resid = Z[:, target] - X @ b
    return b[0], b[1:], resid @ resid / (draws - X.shape[1])


def random_ols_problem(g):
    n = int(g.integers(20, 200))
    k = int(g.integers(1, 6))
    X = np.column_stack([np.ones(n), g.standard_normal((n, k)) * g.uniform(0.1, 10, k)
                         + g.uniform(-5, 5, k)])
    beta = g.choice([-1, 1], k + 1) * g.uniform(0.5, 3, k + 1)
    y = X @ beta + g.uniform(0.1, 2) * g.standard_normal(n)
    return X, y


def ks_uniform(p):
    """Kolmogorov distance between the empirical CDF of ``p`` and Uniform(0, 1)."""
    p = np.sort(np.asarray(p, dtype=float))
    n = p.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - p), np.max(p - (i - 1) / n)))
