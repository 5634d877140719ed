"""Scoring and hypothesis tests used to compare conversion methods."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy import stats as sps

from . import kernels
from .errors import OddsDomainError

PROB_CLAMP = 1e-15
DEFAULT_RESAMPLES = 10_000
DEFAULT_SEED = 42
ALPHA = 0.05

# Resamples are drawn in fixed-size chunks, each from its own Philox
# substream spawned from the seed, so results do not depend on how the
# chunks are scheduled.
BOOTSTRAP_CHUNK = 256


@dataclass(frozen=True)
class LossSeries:
    per_match_loss: np.ndarray
    method: str = ""
    bookmaker: str = ""

    @property
    def mean(self) -> float:
        return float(self.per_match_loss.mean())

    def __len__(self) -> int:
        return self.per_match_loss.size


@dataclass(frozen=True)
class TestResult:
    """Outcome of a hypothesis test.

    ``direction`` is ``"a"``/``"b"`` for the side with the lower mean loss in
    a two-sample test, ``"below"``/``"above"`` when an observed count is under
    or over its expectation, ``"positive"``/``"negative"`` for a correlation,
    and ``"none"`` on an exact tie.
    """

    __test__ = False  # not a pytest class

    statistic: float
    p_value: float
    direction: str = "none"

    @property
    def significant_at_005(self) -> bool:
        return self.p_value < ALPHA


def _stack(predictions) -> np.ndarray:
    if isinstance(predictions, np.ndarray):
        return np.asarray(predictions, dtype=np.float64)
    rows = [getattr(p, "probs", p) for p in predictions]
    return np.asarray(rows, dtype=np.float64)


def log_loss(predictions, outcomes, method: str = "", bookmaker: str = "") -> LossSeries:
    """Per-match ``-sum_j y_ij ln p_ij`` with probabilities clamped to
    ``[1e-15, 1 - 1e-15]``.  ``predictions`` is an ``(n, k)`` array or a
    sequence of :class:`~oddsprob.odds_core.ProbabilityVector`.
    """
    P = _stack(predictions)
    Y = np.asarray(outcomes, dtype=np.float64)
    if P.shape != Y.shape or P.ndim != 2:
        raise OddsDomainError(f"shape mismatch: predictions {P.shape} vs outcomes {Y.shape}")
    P = np.clip(P, PROB_CLAMP, 1.0 - PROB_CLAMP)
    loss = -(Y * np.log(P)).sum(axis=1)
    return LossSeries(loss, method, bookmaker)


def _as_losses(x) -> np.ndarray:
    return np.asarray(getattr(x, "per_match_loss", x), dtype=np.float64)


def _check_pair(la: np.ndarray, lb: np.ndarray) -> None:
    if la.shape != lb.shape or la.ndim != 1:
        raise OddsDomainError(f"loss series must be matched 1-d arrays, got {la.shape} and {lb.shape}")
    if la.size < 2:
        raise OddsDomainError(f"bootstrap needs at least 2 matches, got {la.size}")


def bootstrap_paired_test(a, b, resamples: int = DEFAULT_RESAMPLES, seed: int = DEFAULT_SEED) -> TestResult:
    """Two-tailed paired bootstrap on the mean per-match loss difference.

    Matches are resampled with replacement ``resamples`` times; the p-value is
    ``2 * min(P[mean diff <= 0], P[mean diff >= 0])`` clamped to 1.  The
    statistic is the observed mean of ``a - b`` and ``direction`` names the
    series with the lower mean loss.
    """
    return bootstrap_paired_many([a], b, resamples, seed)[0]


def bootstrap_paired_many(series, reference, resamples: int = DEFAULT_RESAMPLES,
                          seed: int = DEFAULT_SEED) -> list[TestResult]:
    """:func:`bootstrap_paired_test` of every entry of ``series`` against
    ``reference``, sharing one set of resampled indices.

    Each result is identical to the corresponding single call.
    """
    lb = _as_losses(reference)
    diffs = []
    for a in series:
        la = _as_losses(a)
        _check_pair(la, lb)
        diffs.append(np.ascontiguousarray(la - lb))
    if resamples < 1:
        raise OddsDomainError("resamples must be positive")
    if not diffs:
        return []
    n = lb.size
    le = np.zeros(len(diffs), dtype=np.int64)
    ge = np.zeros(len(diffs), dtype=np.int64)
    children = np.random.SeedSequence(seed).spawn(-(-resamples // BOOTSTRAP_CHUNK))
    for c, child in enumerate(children):
        size = min(BOOTSTRAP_CHUNK, resamples - c * BOOTSTRAP_CHUNK)
        idx = np.random.Generator(np.random.Philox(child)).integers(0, n, size=(size, n))
        for j, diff in enumerate(diffs):
            c_le, c_ge = kernels.resample_sign_counts(diff, idx)
            le[j] += c_le
            ge[j] += c_ge
    out = []
    for j, diff in enumerate(diffs):
        p = min(1.0, 2.0 * min(int(le[j]), int(ge[j])) / resamples)
        observed = float(diff.mean())
        direction = "a" if observed < 0 else "b" if observed > 0 else "none"
        out.append(TestResult(observed, p, direction))
    return out


def expected_draws(predictions, draw_index: int = 1) -> float:
    P = _stack(predictions)
    if not 0 <= draw_index < P.shape[1]:
        raise OddsDomainError(f"draw_index {draw_index} out of range for {P.shape[1]} outcomes")
    return float(P[:, draw_index].sum())


def poisson_two_tailed_test(expected: float, actual: int) -> TestResult:
    """Exact two-tailed Poisson test of an observed count against its mean.

    ``P[X <= a]`` is the regularised upper incomplete gamma ``Q(a + 1, lam)``
    and ``P[X >= a]`` the regularised lower one ``P(a, lam)``.
    """
    if not expected > 0:
        raise OddsDomainError(f"expected count must be positive, got {expected}")
    if actual < 0 or int(actual) != actual:
        raise OddsDomainError(f"actual count must be a non-negative integer, got {actual}")
    a = int(actual)
    lower_tail = float(special.gammaincc(a + 1, expected))
    upper_tail = 1.0 if a == 0 else float(special.gammainc(a, expected))
    p = min(1.0, 2.0 * min(lower_tail, upper_tail))
    direction = "none" if a == expected else "above" if a > expected else "below"
    return TestResult(float(a - expected), p, direction)


def pearson_correlation(x, y) -> TestResult:
    """Pearson ``r`` with a two-tailed t-test on ``n - 2`` degrees of freedom."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise OddsDomainError("x and y must be 1-d and the same length")
    n = xa.size
    if n < 3:
        raise OddsDomainError(f"correlation needs at least 3 points, got {n}")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise OddsDomainError("correlation undefined: zero variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        p = 0.0
    else:
        tstat = r * math.sqrt((n - 2) / (1.0 - r * r))
        p = float(2.0 * sps.t.sf(abs(tstat), n - 2))
    direction = "positive" if r > 0 else "negative" if r < 0 else "none"
    return TestResult(r, min(1.0, p), direction)
