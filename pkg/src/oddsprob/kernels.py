"""Row-batched numeric kernels.

Each kernel exists twice: a loop version compiled with numba, and a numpy
version vectorised across rows.  ``USE_NUMBA`` (see :mod:`oddsprob._accel`)
selects which one the public names below point at.  Both versions take the
same arguments and return the same tuple layout, so callers never branch.

Status codes returned by the iterative kernels:

* ``OK`` (0): solved.
* ``NOT_CONVERGED`` (1): iteration cap hit, or the iterate left the domain.
* ``NOT_BRACKETED`` (2): the root is not inside the search interval.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, njit

OK = 0
NOT_CONVERGED = 1
NOT_BRACKETED = 2

# Insider-share search interval for the bisection branch of the numerical
# Shin solver.  sum(p(z)) - 1 is >= 0 at z = -1 for every k >= 2 and < 0 as
# z -> 1, so the interval always brackets the root.
SHIN_Z_LO = -1.0
SHIN_Z_HI = 1.0 - 1e-9

POWER_BETA_LO = 1e-3
POWER_BETA_HI = 100.0
POWER_TOL = 1e-12

DEGENERATE_C2_TOL = 1e-12

_BISECT_MAX = 200

# numerical Shin solver selection
SOLVER_AUTO = 0
SOLVER_RECURRENCE = 1
SOLVER_BISECTION = 2


# ---------------------------------------------------------------------------
# numerical Shin
# ---------------------------------------------------------------------------


def _shin_numerical_loops(inv, delta, max_iter, mode):
    n, k = inv.shape
    probs = np.empty((n, k))
    z_out = np.empty(n)
    resid = np.empty(n)
    iters = np.zeros(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int8)
    bisected = np.zeros(n, dtype=np.bool_)
    a = np.empty(k)
    for r in range(n):
        s = 0.0
        for j in range(k):
            s += inv[r, j]
        for j in range(k):
            a[j] = inv[r, j] * inv[r, j] / s
        z = 0.0
        need_bisect = True
        if mode != SOLVER_BISECTION and k >= 3 and s >= 1.0:
            need_bisect = False
            converged = False
            for it in range(max_iter):
                acc = 0.0
                for j in range(k):
                    acc += math.sqrt(z * z + 4.0 * (1.0 - z) * a[j])
                zn = (acc - 2.0) / (k - 2)
                iters[r] = it + 1
                if not zn < 1.0:
                    z = zn
                    break
                if abs(zn - z) <= delta:
                    z = zn
                    converged = True
                    break
                z = zn
            if not converged:
                if mode == SOLVER_AUTO:
                    need_bisect = True
                else:
                    status[r] = NOT_CONVERGED
        elif mode == SOLVER_RECURRENCE:
            need_bisect = False
            status[r] = NOT_CONVERGED
        if need_bisect:
            bisected[r] = True
            lo = SHIN_Z_LO
            hi = SHIN_Z_HI
            for it in range(_BISECT_MAX):
                mid = 0.5 * (lo + hi)
                f = -1.0
                for j in range(k):
                    f += (math.sqrt(mid * mid + 4.0 * (1.0 - mid) * a[j]) - mid) / (
                        2.0 * (1.0 - mid)
                    )
                iters[r] += 1
                if f > 0.0:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= delta:
                    break
            z = 0.5 * (lo + hi)
        z_out[r] = z
        total = 0.0
        for j in range(k):
            y = (math.sqrt(z * z + 4.0 * (1.0 - z) * a[j]) - z) / (2.0 * (1.0 - z))
            probs[r, j] = y
            total += y
        resid[r] = total - 1.0
        for j in range(k):
            probs[r, j] /= total
    return probs, z_out, resid, iters, status, bisected


def _shin_closed_form(z, a):
    zc = z[:, None]
    return (np.sqrt(zc * zc + 4.0 * (1.0 - zc) * a) - zc) / (2.0 * (1.0 - zc))


def _shin_numerical_numpy(inv, delta, max_iter, mode):
    n, k = inv.shape
    s = inv.sum(axis=1)
    a = inv * inv / s[:, None]
    z = np.zeros(n)
    iters = np.zeros(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int8)

    eligible = s >= 1.0 if k >= 3 else np.zeros(n, dtype=bool)
    if mode == SOLVER_BISECTION:
        eligible[:] = False
    bisect = ~eligible
    if mode == SOLVER_RECURRENCE:
        status[bisect] = NOT_CONVERGED
        bisect[:] = False
    rows = np.flatnonzero(eligible)
    if rows.size:
        ar = a[rows]
        zr = np.zeros(rows.size)
        active = np.ones(rows.size, dtype=bool)
        converged = np.zeros(rows.size, dtype=bool)
        for it in range(max_iter):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            zc = zr[idx]
            zn = (np.sqrt(zc[:, None] ** 2 + 4.0 * (1.0 - zc[:, None]) * ar[idx]).sum(axis=1) - 2.0) / (k - 2)
            iters[rows[idx]] = it + 1
            bad = ~(zn < 1.0)
            done = ~bad & (np.abs(zn - zc) <= delta)
            zr[idx] = zn
            converged[idx[done]] = True
            active[idx[bad | done]] = False
        z[rows] = zr
        if mode == SOLVER_AUTO:
            bisect[rows[~converged]] = True
        else:
            status[rows[~converged]] = NOT_CONVERGED

    rows = np.flatnonzero(bisect)
    if rows.size:
        ab = a[rows]
        lo = np.full(rows.size, SHIN_Z_LO)
        hi = np.full(rows.size, SHIN_Z_HI)
        active = np.ones(rows.size, dtype=bool)
        for it in range(_BISECT_MAX):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            mid = 0.5 * (lo[idx] + hi[idx])
            f = _shin_closed_form(mid, ab[idx]).sum(axis=1) - 1.0
            iters[rows[idx]] += 1
            up = f > 0.0
            lo[idx[up]] = mid[up]
            hi[idx[~up]] = mid[~up]
            active[idx[hi[idx] - lo[idx] <= delta]] = False
        z[rows] = 0.5 * (lo + hi)

    y = _shin_closed_form(z, a)
    total = y.sum(axis=1)
    return y / total[:, None], z, total - 1.0, iters, status, bisect


# ---------------------------------------------------------------------------
# analytical Shin
# ---------------------------------------------------------------------------


def _shin_analytical_loops(inv, t):
    n, k = inv.shape
    probs = np.empty((n, k))
    zs = np.empty((n, k))
    fallback = np.zeros(n, dtype=np.bool_)
    for r in range(n):
        s = 0.0
        for j in range(k):
            s += inv[r, j]
        bad = False
        total = 0.0
        for j in range(k):
            c = 2.0 * inv[r, j] - s
            c2 = c * c
            if abs(c2 - 1.0) < DEGENERATE_C2_TOL:
                bad = True
                zs[r, j] = np.nan
                probs[r, j] = np.nan
                continue
            zj = (s - 1.0) * (c2 - s) / (s * (c2 - 1.0))
            zs[r, j] = zj
            disc = zj * zj + 4.0 * (1.0 - zj) * inv[r, j] * inv[r, j] / s
            if not zj < 1.0 or not disc >= 0.0:
                bad = True
                probs[r, j] = np.nan
                continue
            y = (math.sqrt(disc) - zj) / (2.0 * (1.0 - zj))
            probs[r, j] = y
            total += y
        if not bad:
            tstar = total / t
            for j in range(k):
                v = probs[r, j] / tstar
                if not (v > 0.0 and v < 1.0):
                    bad = True
                probs[r, j] = v
        if bad:
            fallback[r] = True
            for j in range(k):
                probs[r, j] = inv[r, j] * t / s
    return probs, zs, fallback


def _shin_analytical_numpy(inv, t):
    s = inv.sum(axis=1, keepdims=True)
    c2 = (2.0 * inv - s) ** 2
    near_one = np.abs(c2 - 1.0) < DEGENERATE_C2_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (s - 1.0) * (c2 - s) / (s * (c2 - 1.0))
        z = np.where(near_one, np.nan, z)
        disc = z * z + 4.0 * (1.0 - z) * inv * inv / s
        y = (np.sqrt(disc) - z) / (2.0 * (1.0 - z))
        y = y / (y.sum(axis=1, keepdims=True) / t)
    bad = (
        near_one.any(axis=1)
        | ~(z < 1.0).all(axis=1)
        | ~(disc >= 0.0).all(axis=1)
        | ~((y > 0.0) & (y < 1.0)).all(axis=1)
    )
    probs = np.where(bad[:, None], inv * t / s, y)
    return probs, z, bad


# ---------------------------------------------------------------------------
# power
# ---------------------------------------------------------------------------


def _power_loops(inv, t):
    n, k = inv.shape
    probs = np.empty((n, k))
    betas = np.empty(n)
    status = np.zeros(n, dtype=np.int8)
    logs = np.empty(k)
    for r in range(n):
        for j in range(k):
            logs[j] = math.log(inv[r, j])
        lo = POWER_BETA_LO
        hi = POWER_BETA_HI
        glo = -t
        ghi = -t
        for j in range(k):
            glo += math.exp(lo * logs[j])
            ghi += math.exp(hi * logs[j])
        if not (glo > 0.0 and ghi < 0.0):
            status[r] = NOT_BRACKETED
        else:
            for _ in range(_BISECT_MAX):
                mid = 0.5 * (lo + hi)
                g = -t
                for j in range(k):
                    g += math.exp(mid * logs[j])
                if g > 0.0:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= POWER_TOL:
                    break
        b = 0.5 * (lo + hi)
        betas[r] = b
        for j in range(k):
            probs[r, j] = math.exp(b * logs[j])
    return probs, betas, status


def _power_numpy(inv, t):
    n = inv.shape[0]
    logs = np.log(inv)
    lo = np.full(n, POWER_BETA_LO)
    hi = np.full(n, POWER_BETA_HI)
    glo = np.exp(lo[:, None] * logs).sum(axis=1) - t
    ghi = np.exp(hi[:, None] * logs).sum(axis=1) - t
    ok = (glo > 0.0) & (ghi < 0.0)
    status = np.where(ok, OK, NOT_BRACKETED).astype(np.int8)
    active = ok.copy()
    for _ in range(_BISECT_MAX):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        mid = 0.5 * (lo[idx] + hi[idx])
        g = np.exp(mid[:, None] * logs[idx]).sum(axis=1) - t
        up = g > 0.0
        lo[idx[up]] = mid[up]
        hi[idx[~up]] = mid[~up]
        active[idx[hi[idx] - lo[idx] <= POWER_TOL]] = False
    betas = 0.5 * (lo + hi)
    return np.exp(betas[:, None] * logs), betas, status


# ---------------------------------------------------------------------------
# power-law likelihood (FL-GLM and its two-exponent extension)
# ---------------------------------------------------------------------------


def _powerlaw_loglik_loops(log_inv, outcomes, exponents):
    """Log-likelihood, gradient per column exponent, and sum of normalisers."""
    n, k = log_inv.shape
    ll = 0.0
    grad = np.zeros(k)
    norm_sum = 0.0
    bl = np.empty(k)
    e = np.empty(k)
    for i in range(n):
        m = -np.inf
        for j in range(k):
            bl[j] = exponents[j] * log_inv[i, j]
            if bl[j] > m:
                m = bl[j]
        se = 0.0
        for j in range(k):
            e[j] = math.exp(bl[j] - m)
            se += e[j]
        lse = m + math.log(se)
        norm_sum += math.exp(m) * se
        ysum = 0.0
        for j in range(k):
            ysum += outcomes[i, j]
        log_t = math.log(ysum) if ysum > 0.0 else 0.0
        for j in range(k):
            yij = outcomes[i, j]
            if yij != 0.0:
                ll += yij * (bl[j] - lse + log_t)
            grad[j] += (yij - ysum * e[j] / se) * log_inv[i, j]
    return ll, grad, norm_sum


def _powerlaw_loglik_numpy(log_inv, outcomes, exponents):
    bl = log_inv * exponents[None, :]
    m = bl.max(axis=1, keepdims=True)
    lse = m + np.log(np.exp(bl - m).sum(axis=1, keepdims=True))
    ysum = outcomes.sum(axis=1, keepdims=True)
    log_t = np.log(np.where(ysum > 0.0, ysum, 1.0))
    terms = np.where(outcomes != 0.0, outcomes * (bl - lse + log_t), 0.0)
    w = np.exp(bl - lse)
    grad = ((outcomes - ysum * w) * log_inv).sum(axis=0)
    return float(terms.sum()), grad, float(np.exp(lse).sum())


# ---------------------------------------------------------------------------
# paired bootstrap
# ---------------------------------------------------------------------------


def _resample_sign_counts_loops(diff, idx):
    """Count resampled means that are <= 0 and >= 0."""
    reps, n = idx.shape
    le = 0
    ge = 0
    for r in range(reps):
        acc = 0.0
        for i in range(n):
            acc += diff[idx[r, i]]
        mean = acc / n
        if mean <= 0.0:
            le += 1
        if mean >= 0.0:
            ge += 1
    return le, ge


def _resample_sign_counts_numpy(diff, idx):
    means = diff[idx].sum(axis=1) / idx.shape[1]
    return int((means <= 0.0).sum()), int((means >= 0.0).sum())


_LOOPS = {
    "shin_numerical": _shin_numerical_loops,
    "shin_analytical": _shin_analytical_loops,
    "power": _power_loops,
    "powerlaw_loglik": _powerlaw_loglik_loops,
    "resample_sign_counts": _resample_sign_counts_loops,
}

NUMPY = {
    "shin_numerical": _shin_numerical_numpy,
    "shin_analytical": _shin_analytical_numpy,
    "power": _power_numpy,
    "powerlaw_loglik": _powerlaw_loglik_numpy,
    "resample_sign_counts": _resample_sign_counts_numpy,
}

NUMBA = {name: njit(fn) for name, fn in _LOOPS.items()} if HAVE_NUMBA else {}

BACKEND = "numba" if USE_NUMBA else "numpy"
_ACTIVE = NUMBA if USE_NUMBA else NUMPY

shin_numerical = _ACTIVE["shin_numerical"]
shin_analytical = _ACTIVE["shin_analytical"]
power = _ACTIVE["power"]
powerlaw_loglik = _ACTIVE["powerlaw_loglik"]
resample_sign_counts = _ACTIVE["resample_sign_counts"]
