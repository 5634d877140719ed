"""Fitted models: FL-GLM, its draw/decisive two-exponent extension, and the
multinomial and ordered logistic baselines.

FL-GLM predicts ``p_ij = t * q_ij**beta / sum_j q_ij**beta`` from inverse odds
``q``.  The log-likelihood is concave in ``beta`` (its second derivative is
minus a variance), so a golden-section search over ``[0.25, 4]`` finds the
global maximum without a learning rate.  The two-exponent model uses the same
kernel with a per-column exponent vector and a damped Newton iteration.

The logistic baselines use the inverse odds as features.  The multinomial
model adds an intercept and pins class 0 at zero; the ordered model uses
cumulative logits ``P(Y <= j) = sigmoid(theta_j - x @ w)`` with thresholds
kept increasing by an exp-gap parameterisation.  Both carry an L2 penalty of
1e-8 for numerical stability only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import optimize, special

from . import kernels
from .errors import FitError, OddsDomainError
from .odds_core import BatchConversion, MarketOdds, ProbabilityVector, validate_odds_matrix

KINDS = ("fl_glm", "fl_glm_two_beta", "multinomial_logistic", "ordered_logistic")

BETA_BOUNDS = (0.25, 4.0)
GOLDEN_TOL = 1e-9
TWO_BETA_MAX_SWEEPS = 100
L2_PENALTY = 1e-8
FORMAT_VERSION = 1

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TrainingSet:
    """Inverse odds and one-hot outcomes for ``n`` markets of ``k`` outcomes."""

    inverse_odds: np.ndarray
    outcomes: np.ndarray
    draw_index: int | None = None

    def __post_init__(self):
        inv = np.ascontiguousarray(self.inverse_odds, dtype=np.float64)
        out = np.ascontiguousarray(self.outcomes, dtype=np.float64)
        if inv.ndim != 2 or out.ndim != 2:
            raise OddsDomainError("inverse odds and outcomes must be 2-d")
        if inv.shape != out.shape:
            raise OddsDomainError(f"shape mismatch: inverse odds {inv.shape} vs outcomes {out.shape}")
        if inv.shape[0] < 1 or inv.shape[1] < 2:
            raise OddsDomainError(f"need n >= 1 rows and k >= 2 columns, got {inv.shape}")
        if not (np.isfinite(inv).all() and (inv > 0).all() and (inv < 1).all()):
            raise OddsDomainError("inverse odds must lie in (0, 1)")
        if not np.isin(out, (0.0, 1.0)).all():
            raise OddsDomainError("outcomes must be 0/1 indicators")
        counts = out.sum(axis=1)
        if not (counts == counts[0]).all() or counts[0] < 1 or counts[0] >= inv.shape[1]:
            raise OddsDomainError("every outcome row must have the same number t of ones, 1 <= t < k")
        if self.draw_index is not None and not 0 <= self.draw_index < inv.shape[1]:
            raise OddsDomainError(f"draw_index {self.draw_index} out of range")
        object.__setattr__(self, "inverse_odds", inv)
        object.__setattr__(self, "outcomes", out)

    @classmethod
    def from_odds(cls, odds, outcomes, draw_index: int | None = None) -> TrainingSet:
        arr = np.asarray(odds, dtype=np.float64)
        out = np.asarray(outcomes, dtype=np.float64)
        validate_odds_matrix(arr, 1)
        return cls(1.0 / arr, out, draw_index)

    @cached_property
    def log_inverse_odds(self) -> np.ndarray:
        return np.log(self.inverse_odds)

    @property
    def n(self) -> int:
        return self.inverse_odds.shape[0]

    @property
    def k(self) -> int:
        return self.inverse_odds.shape[1]

    @property
    def t(self) -> int:
        return int(self.outcomes[0].sum())

    @property
    def labels(self) -> np.ndarray:
        return self.outcomes.argmax(axis=1)

    def subset(self, rows) -> TrainingSet:
        return TrainingSet(self.inverse_odds[rows], self.outcomes[rows], self.draw_index)


@dataclass
class FittedModel:
    """A fitted model of one of :data:`KINDS`.

    ``params`` holds ``beta`` (fl_glm), ``beta_decisive``/``beta_draw``/
    ``draw_index`` (two-beta), ``coef`` of shape ``(k, k + 1)`` with the
    intercept in column 0 (multinomial), or ``coef`` plus ``thresholds``
    (ordered).
    """

    kind: str
    params: dict
    log_likelihood: float
    n_obs: int
    mean_normaliser: float | None = None
    meta: dict = field(default_factory=dict)

    def predict_inverse(self, inv: np.ndarray, t: int = 1) -> np.ndarray:
        """Probabilities for an ``(n, k)`` matrix of inverse odds."""
        inv = np.atleast_2d(np.asarray(inv, dtype=np.float64))
        if self.kind in ("fl_glm", "fl_glm_two_beta"):
            ex = _exponents(self, inv.shape[1])
            w = np.exp(np.log(inv) * ex[None, :])
            return t * w / w.sum(axis=1, keepdims=True)
        if t != 1:
            raise OddsDomainError(f"{self.kind} models predict single-winner markets only")
        if self.kind == "multinomial_logistic":
            return _softmax_probs(_with_intercept(inv), self.params["coef"])
        if self.kind == "ordered_logistic":
            ordinal = _ordered_probs(inv, self.params["coef"], self.params["thresholds"])
            return ordinal[:, ::-1] if self.params.get("descending", True) else ordinal
        raise OddsDomainError(f"unknown model kind {self.kind!r}")

    def predict(self, odds, t: int = 1) -> BatchConversion:
        arr = validate_odds_matrix(np.atleast_2d(odds), t)
        probs = self.predict_inverse(1.0 / arr, t)
        return BatchConversion(probs, self.kind, np.zeros(arr.shape[0], dtype=bool))

    def predict_market(self, market: MarketOdds) -> ProbabilityVector:
        return self.predict(market.odds[None, :], market.t).row(0)

    # -- plain-text serialisation -------------------------------------------

    def to_text(self) -> str:
        lines = [
            "# oddsprob fitted model",
            f"format_version = {FORMAT_VERSION}",
            f"kind = {self.kind}",
            f"n_obs = {self.n_obs}",
            f"log_likelihood = {self.log_likelihood!r}",
            f"mean_normaliser = {'' if self.mean_normaliser is None else repr(self.mean_normaliser)}",
        ]
        for key in sorted(self.params):
            lines.extend(_encode_value(f"param.{key}", self.params[key]))
        for key in sorted(self.meta):
            lines.extend(_encode_value(f"meta.{key}", self.meta[key]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> FittedModel:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise OddsDomainError(f"line {lineno}: expected 'key = value'")
            raw[key.strip()] = value.strip()
        version = int(raw.pop("format_version", "0"))
        if version != FORMAT_VERSION:
            raise OddsDomainError(f"unsupported model format version {version}")
        kind = raw.pop("kind")
        if kind not in KINDS:
            raise OddsDomainError(f"unknown model kind {kind!r}")
        n_obs = int(raw.pop("n_obs"))
        ll = float(raw.pop("log_likelihood"))
        mn = raw.pop("mean_normaliser", "")
        params, meta = {}, {}
        for key, value in raw.items():
            if key.endswith(".shape"):
                continue
            prefix, _, name = key.partition(".")
            target = params if prefix == "param" else meta if prefix == "meta" else None
            if target is None:
                raise OddsDomainError(f"unexpected key {key!r}")
            target[name] = _decode_value(value, raw.get(key + ".shape"))
        return cls(kind, params, ll, n_obs, float(mn) if mn else None, meta)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> FittedModel:
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def _encode_value(key, value):
    if isinstance(value, np.ndarray):
        flat = ",".join(repr(float(v)) for v in value.ravel())
        return [f"{key}.shape = {','.join(str(d) for d in value.shape)}", f"{key} = array:{flat}"]
    if isinstance(value, bool):
        return [f"{key} = bool:{value}"]
    if isinstance(value, (int, np.integer)):
        return [f"{key} = int:{int(value)}"]
    if isinstance(value, (float, np.floating)):
        return [f"{key} = float:{float(value)!r}"]
    return [f"{key} = str:{value}"]


def _decode_value(value, shape):
    tag, _, body = value.partition(":")
    if tag == "array":
        dims = tuple(int(d) for d in shape.split(",")) if shape else (-1,)
        vals = [float(v) for v in body.split(",")] if body else []
        return np.array(vals, dtype=np.float64).reshape(dims)
    if tag == "bool":
        return body == "True"
    if tag == "int":
        return int(body)
    if tag == "float":
        return float(body)
    return body


# ---------------------------------------------------------------------------
# FL-GLM
# ---------------------------------------------------------------------------


def _exponents(model: FittedModel, k: int) -> np.ndarray:
    if model.kind == "fl_glm":
        return np.full(k, float(model.params["beta"]))
    ex = np.full(k, float(model.params["beta_decisive"]))
    ex[int(model.params["draw_index"])] = float(model.params["beta_draw"])
    return ex


def powerlaw_log_likelihood(data: TrainingSet, exponents) -> tuple[float, np.ndarray, float]:
    """Log-likelihood, per-column gradient and mean normaliser.

    ``exponents`` is a length-``k`` vector; FL-GLM uses a constant vector, so
    its scalar derivative is the sum of the returned gradient.
    """
    ex = np.ascontiguousarray(exponents, dtype=np.float64)
    ll, grad, norm_sum = kernels.powerlaw_loglik(data.log_inverse_odds, data.outcomes, ex)
    return float(ll), np.asarray(grad), float(norm_sum) / data.n


def fl_glm_log_likelihood(data: TrainingSet, beta: float) -> float:
    return powerlaw_log_likelihood(data, np.full(data.k, float(beta)))[0]


def fl_glm_gradient(data: TrainingSet, beta: float) -> float:
    """Analytic d(log-likelihood)/d(beta)."""
    return float(powerlaw_log_likelihood(data, np.full(data.k, float(beta)))[1].sum())


def golden_section_max(f, lo: float, hi: float, tol: float = GOLDEN_TOL) -> tuple[float, int]:
    """Maximise a unimodal ``f`` on ``[lo, hi]``; returns ``(x, evaluations)``."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
        evals += 1
    return 0.5 * (a + b), evals


def _checked(fn):
    def wrapped(x):
        value = fn(x)
        if not math.isfinite(value):
            raise FitError(f"non-finite log-likelihood at beta={x!r}", parameter=x)
        return value

    return wrapped


def fit_fl_glm(
    data: TrainingSet,
    optimizer: str = "golden",
    bounds: tuple[float, float] = BETA_BOUNDS,
    tol: float = GOLDEN_TOL,
    learning_rate: float = 1.0,
    max_iter: int = 10_000,
) -> FittedModel:
    """Maximum-likelihood FL-GLM exponent.

    ``optimizer="gradient"`` runs plain gradient ascent on the per-row mean
    log-likelihood from ``beta = 1`` instead of the golden-section search.
    """
    ll_fn = _checked(lambda b: fl_glm_log_likelihood(data, b))
    if optimizer == "golden":
        beta, evals = golden_section_max(ll_fn, *bounds, tol=tol)
        meta = {"optimizer": "golden", "evaluations": evals}
    elif optimizer == "gradient":
        beta = 1.0
        for it in range(1, max_iter + 1):
            g = fl_glm_gradient(data, beta)
            if not math.isfinite(g):
                raise FitError(f"non-finite gradient at beta={beta!r}", parameter=beta)
            step = learning_rate * g / data.n
            beta += step
            if not bounds[0] <= beta <= bounds[1]:
                raise FitError(f"gradient ascent left {bounds} at beta={beta!r}", parameter=beta)
            if abs(step) < tol:
                break
        else:
            raise FitError(f"gradient ascent did not converge in {max_iter} steps", parameter=beta)
        meta = {"optimizer": "gradient", "evaluations": it}
    else:
        raise OddsDomainError(f"unknown optimizer {optimizer!r}")
    ll, _, mean_norm = powerlaw_log_likelihood(data, np.full(data.k, beta))
    meta["at_bound"] = bool(min(beta - bounds[0], bounds[1] - beta) < 10 * tol)
    return FittedModel("fl_glm", {"beta": beta}, ll, data.n, mean_norm, meta)


def powerlaw_hessian(data: TrainingSet, exponents) -> np.ndarray:
    """``(k, k)`` Hessian of the log-likelihood in the per-column exponents."""
    L = data.log_inverse_odds
    bl = L * np.asarray(exponents, dtype=np.float64)[None, :]
    w = special.softmax(bl, axis=1)
    ysum = data.outcomes.sum(axis=1)
    a = (ysum[:, None] * w * L)
    diag = (a * L).sum(axis=0)
    cross = a.T @ (w * L)
    return -(np.diag(diag) - cross)


def _two_beta_newton(data, draw, bounds, tol, max_iter=100):
    group = np.zeros((data.k, 2))
    group[:, 0] = 1.0
    group[draw] = (0.0, 1.0)

    def expand(x):
        return group @ x

    x = np.array([1.0, 1.0])
    ll, g, _ = powerlaw_log_likelihood(data, expand(x))
    for it in range(1, max_iter + 1):
        grad = group.T @ g
        hess = group.T @ powerlaw_hessian(data, expand(x)) @ group
        step = -np.linalg.solve(hess, grad)
        lam = 1.0
        while True:
            cand = np.clip(x + lam * step, *bounds)
            ll_c, g_c, _ = powerlaw_log_likelihood(data, expand(cand))
            if not math.isfinite(ll_c):
                raise FitError(f"non-finite log-likelihood at betas={cand.tolist()}", parameter=cand)
            if ll_c >= ll or lam < 1e-6:
                break
            lam *= 0.5
        change = float(np.hypot(*(cand - x)))
        x, ll, g = cand, ll_c, g_c
        if change < tol:
            return x, it, True
    return x, max_iter, False


def _two_beta_coordinate(data, draw, bounds, tol, max_sweeps):
    log_inv = data.log_inverse_odds

    def ll_at(b_dec, b_draw):
        ex = np.full(data.k, b_dec)
        ex[draw] = b_draw
        return float(kernels.powerlaw_loglik(log_inv, data.outcomes, ex)[0])

    b_dec, b_draw = 1.0, 1.0
    for sweep in range(1, max_sweeps + 1):
        new_dec, _ = golden_section_max(_checked(lambda b: ll_at(b, b_draw)), *bounds, tol=tol)
        new_draw, _ = golden_section_max(_checked(lambda b: ll_at(new_dec, b)), *bounds, tol=tol)
        change = math.hypot(new_dec - b_dec, new_draw - b_draw)
        b_dec, b_draw = new_dec, new_draw
        if change < tol:
            return np.array([b_dec, b_draw]), sweep, True
    return np.array([b_dec, b_draw]), max_sweeps, False


def fit_fl_glm_two_beta(
    data: TrainingSet,
    optimizer: str = "newton",
    bounds: tuple[float, float] = BETA_BOUNDS,
    tol: float = GOLDEN_TOL,
    max_sweeps: int = TWO_BETA_MAX_SWEEPS,
) -> FittedModel:
    """Separate exponents for the draw column and for every other column.

    The default ``optimizer="newton"`` uses the analytic Hessian (the
    likelihood is jointly concave).  ``optimizer="coordinate"`` alternates
    golden-section searches on each exponent; it converges only linearly
    because the two exponents are strongly correlated.
    """
    if data.draw_index is None:
        raise OddsDomainError("two-beta FL-GLM needs TrainingSet.draw_index")
    draw = data.draw_index
    if optimizer == "newton":
        x, iters, converged = _two_beta_newton(data, draw, bounds, tol)
    elif optimizer == "coordinate":
        x, iters, converged = _two_beta_coordinate(data, draw, bounds, tol, max_sweeps)
    else:
        raise OddsDomainError(f"unknown optimizer {optimizer!r}")
    b_dec, b_draw = float(x[0]), float(x[1])
    ex = np.full(data.k, b_dec)
    ex[draw] = b_draw
    ll, _, mean_norm = powerlaw_log_likelihood(data, ex)
    params = {"beta_decisive": b_dec, "beta_draw": b_draw, "draw_index": int(draw)}
    meta = {"optimizer": optimizer, "iterations": iters, "converged": converged}
    return FittedModel("fl_glm_two_beta", params, ll, data.n, mean_norm, meta)


def predict_fl_glm(model: FittedModel, market: MarketOdds) -> ProbabilityVector:
    if model.kind not in ("fl_glm", "fl_glm_two_beta"):
        raise OddsDomainError(f"expected an FL-GLM model, got {model.kind!r}")
    return model.predict_market(market)


def fl_glm_normaliser(odds, beta: float) -> np.ndarray:
    """Per-market ``sum_j x_j**-beta`` (the adaptive intercept is its inverse)."""
    arr = np.atleast_2d(np.asarray(odds, dtype=np.float64))
    return (arr ** -float(beta)).sum(axis=1)


# ---------------------------------------------------------------------------
# logistic baselines
# ---------------------------------------------------------------------------


def _with_intercept(inv: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(inv.shape[0]), inv])


def _softmax_probs(design: np.ndarray, coef: np.ndarray) -> np.ndarray:
    return special.softmax(design @ coef.T, axis=1)


def multinomial_logistic_mle(
    design: np.ndarray, labels: np.ndarray, n_classes: int, l2: float = L2_PENALTY, max_iter: int = 500
) -> tuple[np.ndarray, float, dict]:
    """Softmax regression with class 0 pinned at zero.

    Returns ``(coef, log_likelihood, info)`` with ``coef`` of shape
    ``(n_classes, d)``.  ``design`` should already contain any intercept.
    """
    X = np.asarray(design, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    n, d = X.shape
    K = n_classes - 1
    Y = np.zeros((n, K))
    free = y > 0
    Y[np.flatnonzero(free), y[free] - 1] = 1.0

    def unpack(w):
        return np.vstack([np.zeros(d), w.reshape(K, d)])

    def probs(w):
        return special.softmax(X @ unpack(w).T, axis=1)

    def fun(w):
        logits = X @ unpack(w).T
        ll = (logits[np.arange(n), y] - special.logsumexp(logits, axis=1)).sum()
        return -ll + 0.5 * l2 * (w @ w)

    def jac(w):
        P = probs(w)[:, 1:]
        return -((Y - P).T @ X).ravel() + l2 * w

    def hess(w):
        P = probs(w)[:, 1:]
        A = np.einsum("ia,ab->iab", P, np.eye(K)) - np.einsum("ia,ib->iab", P, P)
        H = np.einsum("iab,ip,iq->apbq", A, X, X).reshape(K * d, K * d)
        return H + l2 * np.eye(K * d)

    res = optimize.minimize(
        fun, np.zeros(K * d), jac=jac, hess=hess, method="trust-exact",
        options={"gtol": 1e-10, "maxiter": max_iter},
    )
    if not np.all(np.isfinite(res.x)) or (not res.success and np.abs(jac(res.x)).max() > 1e-6 * max(n, 1)):
        raise FitError(f"multinomial logistic fit failed: {res.message}", parameter=res.x)
    coef = unpack(res.x)
    logits = X @ coef.T
    ll = float((logits[np.arange(n), y] - special.logsumexp(logits, axis=1)).sum())
    return coef, ll, {"iterations": int(res.nit), "optimizer": "trust-exact"}


def fit_multinomial_logistic(data: TrainingSet) -> FittedModel:
    if data.t != 1:
        raise OddsDomainError("multinomial logistic regression needs single-winner markets")
    coef, ll, info = multinomial_logistic_mle(_with_intercept(data.inverse_odds), data.labels, data.k)
    return FittedModel("multinomial_logistic", {"coef": coef}, ll, data.n, None, info)


def _ordered_cumulative(eta: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """``(n, m + 2)`` cumulative probabilities padded with 0 and 1."""
    n = eta.shape[0]
    F = special.expit(thresholds[None, :] - eta[:, None])
    return np.column_stack([np.zeros(n), F, np.ones(n)])


def _ordered_probs(features, coef, thresholds) -> np.ndarray:
    eta = np.asarray(features, dtype=np.float64) @ np.asarray(coef, dtype=np.float64)
    F = _ordered_cumulative(eta, np.asarray(thresholds, dtype=np.float64))
    return np.diff(F, axis=1)


def _thresholds_from(raw: np.ndarray) -> np.ndarray:
    return raw[0] + np.concatenate([[0.0], np.cumsum(np.exp(raw[1:]))])


def ordered_logistic_mle(
    features: np.ndarray, labels: np.ndarray, n_classes: int, l2: float = L2_PENALTY, max_iter: int = 2000
) -> tuple[np.ndarray, np.ndarray, float, dict]:
    """Proportional-odds logistic regression.

    ``labels`` are ordinal indices ``0 .. n_classes - 1`` (lowest first).
    Thresholds are parameterised as ``theta_0`` plus cumulative exp-gaps, so
    they stay strictly increasing during the search.  Returns
    ``(coef, thresholds, log_likelihood, info)``.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    n, d = X.shape
    m = n_classes - 1
    rows = np.arange(n)

    def parts(params):
        w, raw = params[:d], params[d:]
        theta = _thresholds_from(raw)
        eta = X @ w
        F = _ordered_cumulative(eta, theta)
        p = F[rows, y + 1] - F[rows, y]
        return w, raw, theta, F, np.maximum(p, 1e-300)

    def fun(params):
        w, _, theta, _, p = parts(params)
        return -np.log(p).sum() + 0.5 * l2 * (w @ w + theta @ theta)

    def jac(params):
        w, raw, theta, F, p = parts(params)
        f = F * (1.0 - F)  # logistic density at each cut, 0 at the padding
        f_hi, f_lo = f[rows, y + 1], f[rows, y]
        d_eta = -(f_hi - f_lo) / p
        g_w = X.T @ d_eta
        d_theta = np.zeros((n, m))
        hi_cut = y < m
        lo_cut = y > 0
        d_theta[rows[hi_cut], y[hi_cut]] += f_hi[hi_cut] / p[hi_cut]
        d_theta[rows[lo_cut], y[lo_cut] - 1] -= f_lo[lo_cut] / p[lo_cut]
        g_theta = d_theta.sum(axis=0)
        # d theta_j / d raw: raw[0] shifts all, raw[i] (i >= 1) shifts theta_j for j >= i
        g_raw = np.empty(m)
        g_raw[0] = g_theta.sum()
        tail = np.cumsum(g_theta[::-1])[::-1]
        g_raw[1:] = tail[1:] * np.exp(raw[1:])
        pen_theta = l2 * theta
        pen_raw = np.empty(m)
        pen_raw[0] = pen_theta.sum()
        pen_tail = np.cumsum(pen_theta[::-1])[::-1]
        pen_raw[1:] = pen_tail[1:] * np.exp(raw[1:])
        return np.concatenate([-g_w + l2 * w, -g_raw + pen_raw])

    # start from the empirical cumulative frequencies
    freq = np.bincount(y, minlength=n_classes).astype(float) + 0.5
    cum = np.cumsum(freq)[:-1] / freq.sum()
    theta0 = special.logit(cum)
    raw0 = np.concatenate([[theta0[0]], np.log(np.maximum(np.diff(theta0), 1e-3))])
    x0 = np.concatenate([np.zeros(d), raw0])
    res = optimize.minimize(fun, x0, jac=jac, method="BFGS", options={"gtol": 1e-9, "maxiter": max_iter})
    if not np.all(np.isfinite(res.x)) or (not res.success and np.abs(jac(res.x)).max() > 1e-5 * max(n, 1)):
        raise FitError(f"ordered logistic fit failed: {res.message}", parameter=res.x)
    w = res.x[:d]
    theta = _thresholds_from(res.x[d:])
    ll = float(np.log(np.maximum(_ordered_probs(X, w, theta)[rows, y], 1e-300)).sum())
    return w, theta, ll, {"iterations": int(res.nit), "optimizer": "BFGS"}


def fit_ordered_logistic(data: TrainingSet, descending: bool = True) -> FittedModel:
    """Ordered logit on inverse-odds features.

    With ``descending=True`` the outcome columns are ordered highest first
    (home > draw > away), so ordinal label = ``k - 1 - column``.
    """
    if data.t != 1:
        raise OddsDomainError("ordered logistic regression needs single-winner markets")
    labels = data.labels
    ordinal = data.k - 1 - labels if descending else labels
    w, theta, ll, info = ordered_logistic_mle(data.inverse_odds, ordinal, data.k)
    params = {"coef": w, "thresholds": theta, "descending": descending}
    return FittedModel("ordered_logistic", params, ll, data.n, None, info)


FITTERS = {
    "fl_glm": fit_fl_glm,
    "fl_glm_two_beta": fit_fl_glm_two_beta,
    "multinomial_logistic": fit_multinomial_logistic,
    "ordered_logistic": fit_ordered_logistic,
}


def fit_model(kind: str, data: TrainingSet) -> FittedModel:
    try:
        fitter = FITTERS[kind]
    except KeyError:
        raise OddsDomainError(f"unknown model kind {kind!r}; expected one of {', '.join(KINDS)}") from None
    return fitter(data)
