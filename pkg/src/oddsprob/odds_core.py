"""Odds-only conversions from decimal odds to implied probabilities.

Five methods are provided, each as a single-market function returning a
:class:`ProbabilityVector` and through :func:`convert_batch` for an ``(n, k)``
matrix of markets sharing the same number of winners ``t``:

``multiplicative``
    inverse odds divided by booksum / t.
``shin_numerical``
    Shin's model with one insider share ``z`` for the whole market, solved as
    a fixed point (``t = 1`` only).
``shin_analytical``
    closed-form per-outcome insider shares, then renormalised to ``t``.
``power``
    inverse odds raised to the power that makes them sum to ``t``.
``oo_epc``
    every inverse odd is reduced by the same number ``z`` of its own
    standard errors ``sqrt(1 - 1/x)``; falls back to multiplicative when that
    would push a probability out of range.

Examples
--------
>>> convert_multiplicative(MarketOdds([1.5, 3.0, 6.0])).probs.round(6)
array([0.571429, 0.285714, 0.142857])
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConvergenceError, OddsDomainError, UnsupportedMarketError

MIN_ODDS = 1.0 + 1e-9
DEFAULT_DELTA = 1e-12
SHIN_MAX_ITER = 10_000

METHODS = ("multiplicative", "shin_numerical", "shin_analytical", "power", "oo_epc")

SHIN_SOLVERS = {
    "auto": kernels.SOLVER_AUTO,
    "recurrence": kernels.SOLVER_RECURRENCE,
    "bisection": kernels.SOLVER_BISECTION,
}


def _as_odds_array(odds) -> np.ndarray:
    arr = np.array(odds, dtype=np.float64)
    if arr.ndim != 1:
        raise OddsDomainError(f"odds must be a 1-d sequence, got shape {arr.shape}")
    return arr


def validate_odds_matrix(odds: np.ndarray, t: int) -> np.ndarray:
    """Check an ``(n, k)`` odds matrix and return it as contiguous float64."""
    arr = np.ascontiguousarray(odds, dtype=np.float64)
    if arr.ndim != 2:
        raise OddsDomainError(f"odds matrix must be 2-d, got shape {arr.shape}")
    n, k = arr.shape
    if k < 2:
        raise OddsDomainError(f"a market needs at least 2 outcomes, got {k}")
    if isinstance(t, bool) or int(t) != t or not 1 <= t < k:
        raise OddsDomainError(f"t must be an integer in [1, k), got t={t} with k={k}")
    bad = ~(np.isfinite(arr) & (arr >= MIN_ODDS))
    if bad.any():
        r, c = np.argwhere(bad)[0]
        where = f"index {c}" if n == 1 else f"row {r}, index {c}"
        raise OddsDomainError(
            f"odds at {where} must be finite and > 1.0, got {float(arr[r, c])!r}", index=int(c)
        )
    return arr


@dataclass(frozen=True)
class MarketOdds:
    """Decimal odds for ``k`` mutually exclusive outcomes, ``t`` of which win."""

    odds: np.ndarray
    t: int = 1

    def __post_init__(self):
        arr = _as_odds_array(self.odds)
        validate_odds_matrix(arr[None, :], self.t)
        arr.setflags(write=False)
        object.__setattr__(self, "odds", arr)
        object.__setattr__(self, "t", int(self.t))

    @property
    def k(self) -> int:
        return self.odds.size

    def inverse(self) -> InverseOdds:
        values = 1.0 / self.odds
        raw = float(values.sum())
        return InverseOdds(values=values, raw_booksum=raw, per_target_booksum=raw / self.t)


@dataclass(frozen=True)
class InverseOdds:
    values: np.ndarray
    raw_booksum: float
    per_target_booksum: float


@dataclass(frozen=True)
class ProbabilityVector:
    """Implied probabilities for one market.

    ``diagnostics`` carries method-specific solver output: the insider share
    ``z`` for Shin and OO-EPC, the exponent ``beta`` for power conversion, and
    the pre-normalisation residual for numerical Shin.
    """

    probs: np.ndarray
    method: str
    fallback_used: bool = False
    diagnostics: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    def __len__(self) -> int:
        return self.probs.size


@dataclass
class BatchConversion:
    """Result of converting many markets at once."""

    probs: np.ndarray
    method: str
    fallback: np.ndarray
    parameter: np.ndarray | None = None
    residual: np.ndarray | None = None

    def row(self, i: int) -> ProbabilityVector:
        diag = {}
        if self.parameter is not None:
            diag["beta" if self.method == "power" else "z"] = self.parameter[i]
        if self.residual is not None:
            diag["residual"] = float(self.residual[i])
        return ProbabilityVector(self.probs[i].copy(), self.method, bool(self.fallback[i]), diag)


# ---------------------------------------------------------------------------
# batch implementations on inverse-odds matrices
# ---------------------------------------------------------------------------


def _multiplicative(inv: np.ndarray, t: int) -> np.ndarray:
    return inv / (inv.sum(axis=1, keepdims=True) / t)


def _oo_epc(inv: np.ndarray, t: int):
    sigma = np.sqrt(1.0 - inv)
    z = (inv.sum(axis=1) - t) / sigma.sum(axis=1)
    y = inv - z[:, None] * sigma
    with np.errstate(divide="ignore"):
        ok = (z[:, None] < inv / sigma).all(axis=1) & (y < 1.0).all(axis=1)
    probs = np.where(ok[:, None], y, _multiplicative(inv, t))
    return probs, ~ok, z


def convert_batch(
    odds,
    t: int = 1,
    method: str = "multiplicative",
    delta: float = DEFAULT_DELTA,
    solver: str = "auto",
) -> BatchConversion:
    """Convert an ``(n, k)`` matrix of decimal odds with a shared ``t``.

    Raises
    ------
    OddsDomainError
        Invalid odds (message names row and column), unknown method, or a
        power root outside ``[1e-3, 100]``.
    UnsupportedMarketError
        ``shin_numerical`` with ``t != 1``.
    ConvergenceError
        ``shin_numerical`` with ``solver="recurrence"`` when the recurrence
        does not settle within the cap (or is undefined, k = 2).
    """
    arr = validate_odds_matrix(odds, t)
    inv = 1.0 / arr
    n = arr.shape[0]
    if method == "multiplicative":
        return BatchConversion(_multiplicative(inv, t), method, np.zeros(n, dtype=bool))
    if method == "oo_epc":
        probs, fb, z = _oo_epc(inv, t)
        return BatchConversion(probs, method, fb, parameter=z)
    if method == "shin_numerical":
        if t != 1:
            raise UnsupportedMarketError(f"numerical Shin requires t = 1, got t = {t}")
        if not delta > 0:
            raise OddsDomainError(f"delta must be positive, got {delta}")
        if solver not in SHIN_SOLVERS:
            raise OddsDomainError(f"unknown solver {solver!r}")
        probs, z, resid, _, status, _ = kernels.shin_numerical(
            inv, float(delta), SHIN_MAX_ITER, SHIN_SOLVERS[solver]
        )
        failed = np.flatnonzero(status != kernels.OK)
        if failed.size:
            r = int(failed[0])
            raise ConvergenceError(
                f"numerical Shin did not converge for market {r} within {SHIN_MAX_ITER} iterations",
                last_value=float(z[r]),
            )
        return BatchConversion(probs, method, np.zeros(n, dtype=bool), parameter=z, residual=resid)
    if method == "shin_analytical":
        probs, z, fb = kernels.shin_analytical(inv, float(t))
        return BatchConversion(probs, method, np.asarray(fb, dtype=bool), parameter=z)
    if method == "power":
        probs, beta, status = kernels.power(inv, float(t))
        failed = np.flatnonzero(status != kernels.OK)
        if failed.size:
            raise OddsDomainError(
                f"power exponent for market {int(failed[0])} is not bracketed by "
                f"[{kernels.POWER_BETA_LO}, {kernels.POWER_BETA_HI}]"
            )
        return BatchConversion(probs, method, np.zeros(n, dtype=bool), parameter=beta)
    raise OddsDomainError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")


# ---------------------------------------------------------------------------
# single-market API
# ---------------------------------------------------------------------------


def _single(market: MarketOdds, method: str, **kw) -> ProbabilityVector:
    return convert_batch(market.odds[None, :], market.t, method, **kw).row(0)


def convert_multiplicative(market: MarketOdds) -> ProbabilityVector:
    return _single(market, "multiplicative")


def convert_shin_numerical(
    market: MarketOdds, delta: float = DEFAULT_DELTA, solver: str = "auto"
) -> ProbabilityVector:
    """Numerical Shin conversion.

    The recurrence ``z <- (sum sqrt(z^2 + 4(1-z) p_i^2 / s) - 2) / (k - 2)``
    is iterated from ``z = 0`` when ``k >= 3`` and the booksum is at least 1.
    Its fixed points are exactly the roots of ``sum p_i(z) = 1``; with
    ``solver="auto"`` that root is found by bisection over ``[-1, 1)`` for
    two-outcome markets (zero denominator), for booksums below 1, and when
    the recurrence stalls (k = 3 near fair odds cycles with period 2).
    ``solver="recurrence"`` never falls back and raises
    :class:`ConvergenceError` instead.  The output is renormalised;
    ``diagnostics["residual"]`` keeps the pre-normalisation excess.
    """
    return _single(market, "shin_numerical", delta=delta, solver=solver)


def convert_shin_analytical(market: MarketOdds) -> ProbabilityVector:
    """Analytical Shin conversion with per-outcome insider shares.

    Degenerate markets (``c_i^2`` within 1e-12 of 1, ``z_i >= 1``, negative
    discriminant or an output outside (0, 1)) fall back to multiplicative
    conversion and set ``fallback_used``.
    """
    return _single(market, "shin_analytical")


def convert_power(market: MarketOdds) -> ProbabilityVector:
    return _single(market, "power")


def convert_oo_epc(market: MarketOdds) -> ProbabilityVector:
    return _single(market, "oo_epc")


CONVERTERS = {
    "multiplicative": convert_multiplicative,
    "shin_numerical": convert_shin_numerical,
    "shin_analytical": convert_shin_analytical,
    "power": convert_power,
    "oo_epc": convert_oo_epc,
}


def convert(market: MarketOdds, method: str) -> ProbabilityVector:
    try:
        fn = CONVERTERS[method]
    except KeyError:
        raise OddsDomainError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}") from None
    return fn(market)


def payout_ratio_from_logloss_diff(v):
    """Payout ratio ``u = exp(-v)`` implied by a log-loss difference ``v``."""
    if np.ndim(v) == 0:
        return math.exp(-float(v))
    return np.exp(-np.asarray(v, dtype=np.float64))
