"""Seeded synthetic markets and match files for tests and benchmarks."""
from __future__ import annotations

import numpy as np

from .data import BOOKMAKERS


def random_inverse_odds(rng: np.random.Generator, n: int, k: int = 3, margin=(1.02, 1.10),
                        alpha: float = 2.0) -> np.ndarray:
    """``(n, k)`` inverse odds: Dirichlet probabilities times a per-market
    margin, redrawn until every odd lies in (1.01, 100)."""
    out = np.empty((n, k))
    filled = 0
    while filled < n:
        m = n - filled
        base = rng.dirichlet(np.full(k, alpha), size=m)
        inv = base * rng.uniform(*margin, size=(m, 1))
        ok = ((inv > 0.01) & (inv < 1 / 1.01)).all(axis=1)
        take = inv[ok][: n - filled]
        out[filled:filled + take.shape[0]] = take
        filled += take.shape[0]
    return out


def sample_outcomes(rng: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    """One-hot rows drawn from the row-wise categorical ``probs``."""
    u = rng.random(probs.shape[0])
    idx = (probs.cumsum(axis=1) < u[:, None]).sum(axis=1)
    idx = np.minimum(idx, probs.shape[1] - 1)
    return np.eye(probs.shape[1])[idx]


def powerlaw_markets(n: int, exponents, seed: int = 0, margin=(1.02, 1.10)):
    """Odds and outcomes where ``P(i) is proportional to (1/x_i)^beta_i``.

    Returns ``(odds, outcomes)``.
    """
    rng = np.random.default_rng(seed)
    ex = np.asarray(exponents, dtype=np.float64)
    inv = random_inverse_odds(rng, n, ex.size, margin)
    w = inv ** ex[None, :]
    probs = w / w.sum(axis=1, keepdims=True)
    return 1.0 / inv, sample_outcomes(rng, probs)


def football_csv(n_matches: int, season: str, seed: int = 0, beta: float = 1.1,
                 bookmakers=None, division: str = "E0") -> str:
    """A football-data style season file with home/draw/away odds for each
    bookmaker.  Results follow a power-law model of one shared market so that
    bookmakers differ only by margin and noise."""
    rng = np.random.default_rng(seed)
    prefixes = [BOOKMAKERS[b][0] for b in (bookmakers or BOOKMAKERS)]
    start_year = int(season.split("-")[0])
    header = ["Div", "Date", "HomeTeam", "AwayTeam", "FTR"]
    for p in prefixes:
        header += [p + "H", p + "D", p + "A"]
    lines = [",".join(header)]
    truth = rng.dirichlet([4.0, 2.5, 3.0], size=n_matches)
    truth = np.clip(truth, 0.03, None)
    truth /= truth.sum(axis=1, keepdims=True)
    onehot = sample_outcomes(rng, truth)
    letters = np.array(["H", "D", "A"])[onehot.argmax(axis=1)]
    for i in range(n_matches):
        day = 1 + i % 28
        month = 8 + (i // 28) % 5
        date = f"{day:02d}/{month:02d}/{start_year % 100:02d}"
        row = [division, date, f"Team{2 * i % 20}", f"Team{(2 * i + 1) % 20}", letters[i]]
        for _ in prefixes:
            # inverse of the power-law link plus a bookmaker margin
            q = truth[i] ** (1.0 / beta) * np.exp(rng.normal(0.0, 0.02, 3))
            q *= rng.uniform(1.03, 1.08) / q.sum()
            odds = np.round(1.0 / q, 2)
            row += [f"{o:.2f}" for o in np.maximum(odds, 1.01)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
