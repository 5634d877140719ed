"""Market generators and independent reference implementations.

The oracles below deliberately avoid the package's kernels: they work one
market at a time with ``math`` and ``scipy.optimize.brentq``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq


def random_market(rng, k=None, t=1, margin=(0.95, 1.15), max_tries=10_000):
    """Decimal odds for one market: Dirichlet probabilities summing to ``t``
    times a margin, with every odd in (1.01, 100).  ``margin`` below 1 gives
    the booksum-below-t regime."""
    for _ in range(max_tries):
        kk = int(rng.integers(2, 6)) if k is None else k
        if t >= kk:
            continue
        p = rng.dirichlet(np.full(kk, 1.5)) * t
        if t > 1 and (p >= 0.97).any():
            continue
        inv = p * rng.uniform(*margin)
        if not ((inv > 0.01) & (inv < 1 / 1.01)).all():
            continue
        if t > 1 and (inv * t / inv.sum() >= 1).any():
            continue
        return 1.0 / inv
    raise RuntimeError("no valid market found")


def random_markets(seed, n, k=None, t=1, margin=(0.95, 1.15)):
    rng = np.random.default_rng(seed)
    return [random_market(rng, k, t, margin) for _ in range(n)]


def fair_market(rng, k, t=1):
    """Odds whose inverses sum to ``t`` (up to rounding)."""
    while True:
        p = rng.dirichlet(np.full(k, 2.0)) * t
        if ((p > 0.01) & (p < 0.99)).all():
            return 1.0 / p


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------


def _shin_closed_form(z, q, s):
    return (math.sqrt(z * z + 4.0 * (1.0 - z) * q * q / s) - z) / (2.0 * (1.0 - z))


def oracle_shin_numerical(odds):
    """Root of ``sum_i y_i(z) = 1`` by Brent's method, then the closed form."""
    q = [1.0 / x for x in odds]
    s = sum(q)

    def excess(z):
        return sum(_shin_closed_form(z, qi, s) for qi in q) - 1.0

    z = brentq(excess, -1.0 + 1e-12, 1.0 - 1e-9, xtol=1e-15, rtol=1e-15, maxiter=500)
    y = [_shin_closed_form(z, qi, s) for qi in q]
    total = sum(y)
    return np.array([v / total for v in y]), z


def oracle_shin_analytical(odds, t=1):
    """Straight transcription of the per-outcome insider-share recipe.

    Returns ``(probs, fallback)``; the fallback is multiplicative.
    """
    q = [1.0 / x for x in odds]
    s = sum(q)
    y = []
    for qi in q:
        c = qi - (s - qi)
        if abs(c * c - 1.0) < 1e-12:
            break
        zi = (s - 1.0) * (c * c - s) / (s * (c * c - 1.0))
        disc = zi * zi + 4.0 * (1.0 - zi) * qi * qi / s
        if zi >= 1.0 or disc < 0.0:
            break
        y.append((math.sqrt(disc) - zi) / (2.0 * (1.0 - zi)))
    if len(y) == len(q):
        t_star = sum(y) / t
        out = [v / t_star for v in y]
        if all(0.0 < v < 1.0 for v in out):
            return np.array(out), False
    return np.array([qi * t / s for qi in q]), True


def oracle_power(odds, t=1):
    q = [1.0 / x for x in odds]
    beta = brentq(lambda b: sum(qi ** b for qi in q) - t, 1e-3, 100.0, xtol=1e-15, rtol=1e-15, maxiter=500)
    return np.array([qi ** beta for qi in q]), beta


def oracle_oo_epc(odds, t=1):
    """Hand arithmetic: equal numbers of standard errors off every outcome."""
    q = [1.0 / x for x in odds]
    sigma = [math.sqrt(qi * (1.0 - qi) / qi) for qi in q]
    z = (sum(q) - t) / sum(sigma)
    if all(z < qi / si for qi, si in zip(q, sigma)):
        out = [qi - z * si for qi, si in zip(q, sigma)]
        if all(v < 1.0 for v in out):
            return np.array(out), False, z
    s = sum(q)
    return np.array([qi * t / s for qi in q]), True, z


def one_hot(labels, k):
    return np.eye(k)[np.asarray(labels)]
