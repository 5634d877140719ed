"""End-to-end evaluation: conversions and fits per bookmaker, the paired
significance tests, draw counts, the booksum correlation and the fitted
exponent table, assembled into deterministic report blocks.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, stats
from .data import BOOKMAKERS, DRAW_INDEX, Corpus, MarketTable, corpus_to_csv, extract_markets
from .errors import ConfigError
from .glm import TrainingSet, fit_model
from .odds_core import METHODS as ODDS_ONLY
from .odds_core import convert_batch

GLM_KINDS = ("fl_glm", "fl_glm_two_beta", "multinomial_logistic", "ordered_logistic")
ALL_METHODS = ODDS_ONLY + GLM_KINDS
DEFAULT_METHODS = ODDS_ONLY + ("fl_glm", "multinomial_logistic", "ordered_logistic")
ODDS_REFERENCE = "oo_epc"
GLM_REFERENCE = "fl_glm"
PROTOCOLS = ("in-sample", "kfold")
FORMATS = ("table", "csv")
BLOCKS = ("table1", "table2", "draws", "table3", "table4", "provenance")


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a report, plus where to write it."""

    manifest: str | None = None
    corpus: str | None = None
    bookmakers: tuple[str, ...] = tuple(BOOKMAKERS)
    methods: tuple[str, ...] = DEFAULT_METHODS
    resamples: int = stats.DEFAULT_RESAMPLES
    seed: int = stats.DEFAULT_SEED
    protocol: str = "in-sample"
    folds: int = 10
    out: str = "reports"
    fmt: str = "table"
    all_pairs: bool = False

    def validate(self) -> RunConfig:
        if not self.methods:
            raise ConfigError("method selection must not be empty")
        unknown = [m for m in self.methods if m not in ALL_METHODS]
        if unknown:
            raise ConfigError(f"unknown method(s) {', '.join(unknown)}; expected any of {', '.join(ALL_METHODS)}")
        bad_bk = [b for b in self.bookmakers if b not in BOOKMAKERS]
        if bad_bk or not self.bookmakers:
            raise ConfigError(f"unknown bookmaker(s) {', '.join(bad_bk) or '(none)'}")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {', '.join(PROTOCOLS)}, got {self.protocol!r}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}, got {self.fmt!r}")
        if self.resamples < 1:
            raise ConfigError("resamples must be positive")
        if self.folds < 2:
            raise ConfigError("folds must be at least 2")
        return self

    def report_fields(self) -> dict:
        """Fields that change report content; paths and format are excluded."""
        d = asdict(self)
        for key in ("manifest", "corpus", "out", "fmt"):
            d.pop(key)
        d["bookmakers"] = list(self.bookmakers)
        d["methods"] = list(self.methods)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.report_fields(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _looks_numeric(text: str) -> bool:
    if text in ("-", "n/a"):
        return True
    try:
        float(text)
    except ValueError:
        return False
    return True


@dataclass
class Block:
    """One report table, written as ``<name>_<scope>.txt`` and ``.csv``."""

    name: str
    scope: str
    title: str
    columns: tuple[str, ...]
    rows: list[tuple[str, ...]] = field(default_factory=list)

    @property
    def stem(self) -> str:
        return f"{self.name}_{self.scope}"

    def to_text(self, header: list[str]) -> str:
        cells = [self.columns, *self.rows]
        ncol = len(self.columns)
        widths = [max(len(r[i]) for r in cells) for i in range(ncol)]
        numeric = [i > 0 and all(_looks_numeric(r[i]) for r in self.rows) for i in range(ncol)]
        lines = [f"# {h}" for h in header] + [self.title]
        for r in cells:
            parts = [c.rjust(w) if num else c.ljust(w) for c, w, num in zip(r, widths, numeric)]
            lines.append("  ".join(parts).rstrip())
        return "\n".join(lines) + "\n"

    def to_csv(self, header: list[str]) -> str:
        buf = io.StringIO()
        for h in [*header, self.title]:
            buf.write(f"# {h}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        w.writerows(self.rows)
        return buf.getvalue()


@dataclass
class EvalReport:
    """Report blocks plus the unformatted numbers behind them."""

    config: RunConfig
    header: list[str]
    blocks: list[Block]
    mean_loss: dict = field(default_factory=dict)       # (bookmaker, method) -> float
    significance: dict = field(default_factory=dict)    # (bookmaker, method, reference) -> TestResult
    draws: dict = field(default_factory=dict)           # (bookmaker, method) -> (expected, actual, TestResult)
    correlation: dict = field(default_factory=dict)     # method -> (TestResult, n_points)
    exponents: dict = field(default_factory=dict)       # bookmaker -> (beta, mean normaliser)
    fallbacks: dict = field(default_factory=dict)       # (bookmaker, method) -> count
    market_counts: dict = field(default_factory=dict)   # bookmaker -> n markets

    def block(self, stem: str) -> Block:
        for b in self.blocks:
            if b.stem == stem:
                return b
        raise KeyError(stem)

    def render(self, fmt: str = "table") -> str:
        parts = [(b.to_text if fmt == "table" else b.to_csv)(self.header) for b in self.blocks]
        return "\n".join(parts)

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for b in self.blocks:
            for ext, text in (("txt", b.to_text(self.header)), ("csv", b.to_csv(self.header))):
                p = out / f"{b.stem}.{ext}"
                p.write_text(text, encoding="utf-8")
                paths.append(p)
        return paths


# ---------------------------------------------------------------------------
# per-bookmaker evaluation
# ---------------------------------------------------------------------------


def kfold_by_season(seasons: np.ndarray, folds: int) -> np.ndarray:
    """Fold number per row; seasons are sorted and dealt round-robin."""
    unique = sorted(set(seasons.tolist()))
    if len(unique) < 2:
        raise ConfigError("k-fold by season needs at least two seasons")
    nf = min(folds, len(unique))
    fold_of = {s: i % nf for i, s in enumerate(unique)}
    return np.array([fold_of[s] for s in seasons.tolist()], dtype=np.int64)


def predict_glm(table: MarketTable, kind: str, protocol: str = "in-sample", folds: int = 10):
    """Probabilities for every market from a ``kind`` model, plus the
    in-sample fit (``None`` under k-fold)."""
    data = TrainingSet.from_odds(table.odds, table.outcomes, DRAW_INDEX)
    if protocol == "in-sample":
        model = fit_model(kind, data)
        return model.predict_inverse(data.inverse_odds), model
    fold = kfold_by_season(table.seasons, folds)
    probs = np.empty_like(data.inverse_odds)
    for f in np.unique(fold):
        test = fold == f
        model = fit_model(kind, data.subset(~test))
        probs[test] = model.predict_inverse(data.inverse_odds[test])
    return probs, None


@dataclass
class _Cell:
    probs: np.ndarray
    loss: np.ndarray
    fallback: int = 0


def _evaluate_bookmaker(table: MarketTable, config: RunConfig):
    cells: dict[str, _Cell] = {}
    fits = {}
    for m in config.methods:
        if m in ODDS_ONLY:
            conv = convert_batch(table.odds, 1, m)
            probs, fb = conv.probs, int(conv.fallback.sum())
        else:
            probs, model = predict_glm(table, m, config.protocol, config.folds)
            fb = 0
            if model is not None:
                fits[m] = model
        cells[m] = _Cell(probs, stats.log_loss(probs, table.outcomes).per_match_loss, fb)
    return cells, fits


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------


def _f(x: float, digits: int) -> str:
    if x is None or not np.isfinite(x):
        return "n/a"
    text = f"{x:.{digits}f}"
    return text[1:] if text.startswith("-") and float(text) == 0.0 else text


def _p(x: float) -> str:
    return _f(x, 4)


def _verdict(res: stats.TestResult, method: str, ref: str) -> str:
    if not res.significant_at_005:
        return "n.s."
    return f"{method} better" if res.direction == "a" else f"{ref} better"


def _family_block(name, title, family, ref, bk, cells, config, report, n) -> tuple[Block, Block | None]:
    present = [m for m in config.methods if m in family]
    has_ref = ref in present and n >= 2
    others = [m for m in present if m != ref] if has_ref else []
    tests = dict(zip(others, stats.bootstrap_paired_many(
        [cells[m].loss for m in others], cells[ref].loss if has_ref else None,
        config.resamples, config.seed))) if others else {}
    cols = ("method", "mean_logloss", "n", "fallbacks")
    if has_ref:
        cols += (f"diff_vs_{ref}", "p_value", "verdict")
    block = Block(name, bk, f"{title}; bookmaker={bk}; reference={ref if has_ref else 'none'}", cols)
    for m in present:
        mean = float(cells[m].loss.mean())
        report.mean_loss[(bk, m)] = mean
        report.fallbacks[(bk, m)] = cells[m].fallback
        row = (m, _f(mean, 5), str(n), str(cells[m].fallback))
        if m in tests:
            t = tests[m]
            report.significance[(bk, m, ref)] = t
            row += (_f(t.statistic, 5), _p(t.p_value), _verdict(t, m, ref))
        elif has_ref:
            row += ("-", "-", "reference")
        block.rows.append(row)
    pairs = None
    if config.all_pairs and len(present) >= 2 and n >= 2:
        pairs = Block(f"{name}pairs", bk, f"{title}; all pairwise tests; bookmaker={bk}",
                      ("method_a", "method_b", "diff", "p_value", "verdict"))
        for i, a in enumerate(present):
            rest = present[i + 1:]
            for b_name, t in zip(rest, [stats.bootstrap_paired_test(cells[a].loss, cells[b].loss,
                                                                    config.resamples, config.seed)
                                        for b in rest]):
                pairs.rows.append((a, b_name, _f(t.statistic, 5), _p(t.p_value), _verdict(t, a, b_name)))
    return block, pairs


def _draws_block(bk, table, cells, config, report) -> Block:
    actual = int(table.outcomes[:, DRAW_INDEX].sum())
    block = Block("draws", bk, f"Expected vs actual draws (two-tailed Poisson); bookmaker={bk}",
                  ("method", "expected", "actual", "difference", "p_value", "verdict"))
    for m in config.methods:
        expected = stats.expected_draws(cells[m].probs, DRAW_INDEX)
        res = stats.poisson_two_tailed_test(expected, actual)
        report.draws[(bk, m)] = (expected, actual, res)
        verdict = "n.s." if not res.significant_at_005 else (
            "underestimates" if res.direction == "above" else "overestimates")
        block.rows.append((m, _f(expected, 1), str(actual), _f(actual - expected, 1), _p(res.p_value), verdict))
    return block


def _correlation_block(points, config, report) -> Block:
    block = Block("table3", "all", "Correlation of per-(bookmaker, season) mean log-loss with mean booksum",
                  ("method", "r", "p_value", "n_points", "verdict"))
    for m in (m for m in config.methods if m in ODDS_ONLY):
        rows = points.get(m, [])
        x = np.array([b for b, _ in rows])
        y = np.array([loss for _, loss in rows])
        try:
            res = stats.pearson_correlation(x, y)
        except ValueError:
            block.rows.append((m, "n/a", "n/a", str(len(rows)), "undefined"))
            continue
        report.correlation[m] = (res, len(rows))
        block.rows.append((m, _f(res.statistic, 4), _p(res.p_value), str(len(rows)),
                           "significant" if res.significant_at_005 else "n.s."))
    return block


def _provenance_block(corpus, config, report, tables) -> Block:
    block = Block("provenance", "all", "Run provenance", ("key", "value"))
    add = block.rows.append
    add(("version", __version__))
    add(("config_hash", config.config_hash()))
    for k, v in config.report_fields().items():
        add((k, ",".join(map(str, v)) if isinstance(v, list) else str(v)))
    add(("corpus_sha256", hashlib.sha256(corpus_to_csv(corpus).encode()).hexdigest()))
    add(("corpus_records", str(len(corpus))))
    for p in corpus.provenance:
        add((f"file:{p.source}:{p.season}",
             f"rows={p.rows} records={p.records} skipped={p.skipped_rows} invalid_odds={p.invalid_odds_cells}"))
    for bk, table in tables.items():
        add((f"markets:{bk}", f"{len(table)} (excluded {table.excluded})"))
    return block


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def evaluate(corpus: Corpus, config: RunConfig, blocks=BLOCKS) -> EvalReport:
    """Run every requested block on ``corpus``.  Output is a pure function of
    the corpus and the report fields of ``config``."""
    config.validate()
    blocks = set(blocks)
    header = [f"oddsprob {__version__}", f"seed={config.seed}", f"config_hash={config.config_hash()}",
              f"corpus_records={len(corpus)}"]
    report = EvalReport(config, header, [])
    tables = {}
    corr_points: dict[str, list] = {}
    t4 = Block("table4", "all", "FL-GLM fitted exponent and mean normaliser (in-sample)",
               ("bookmaker", "beta", "mean_normaliser", "n", "at_bound"))
    for bk in config.bookmakers:
        table = extract_markets(corpus, bk)
        tables[bk] = table
        report.market_counts[bk] = len(table)
        if len(table) == 0:
            continue
        needs_cells = blocks & {"table1", "table2", "draws", "table3"}
        if needs_cells:
            sub = config
            if blocks.isdisjoint({"table2", "draws"}):
                sub = _replace_methods(config, [m for m in config.methods if m in ODDS_ONLY])
            cells, fits = _evaluate_bookmaker(table, sub)
        else:
            cells, fits = {}, {}
        n = len(table)
        if "table1" in blocks and any(m in ODDS_ONLY for m in config.methods):
            b, pairs = _family_block("table1", "Odds-only mean log-loss", ODDS_ONLY, ODDS_REFERENCE,
                                     bk, cells, config, report, n)
            report.blocks.extend(x for x in (b, pairs) if x is not None)
        if "table2" in blocks and any(m in GLM_KINDS for m in config.methods):
            title = "GLM mean log-loss" + (" (k-fold by season)" if config.protocol == "kfold" else "")
            b, pairs = _family_block("table2", title, GLM_KINDS, GLM_REFERENCE, bk, cells, config, report, n)
            report.blocks.extend(x for x in (b, pairs) if x is not None)
        if "draws" in blocks:
            report.blocks.append(_draws_block(bk, table, cells, config, report))
        if "table3" in blocks:
            booksum = table.booksums
            for season in sorted(set(table.seasons.tolist())):
                mask = table.seasons == season
                for m in config.methods:
                    if m in ODDS_ONLY:
                        corr_points.setdefault(m, []).append(
                            (float(booksum[mask].mean()), float(cells[m].loss[mask].mean())))
        if "table4" in blocks and "fl_glm" in config.methods:
            model = fits.get("fl_glm")
            if model is None:
                model = fit_model("fl_glm", TrainingSet.from_odds(table.odds, table.outcomes, DRAW_INDEX))
            beta = model.params["beta"]
            report.exponents[bk] = (beta, model.mean_normaliser)
            t4.rows.append((bk, _f(beta, 4), _f(model.mean_normaliser, 4), str(model.n_obs),
                            str(model.meta.get("at_bound", False)).lower()))
    if "table3" in blocks and any(m in ODDS_ONLY for m in config.methods):
        report.blocks.append(_correlation_block(corr_points, config, report))
    if "table4" in blocks and "fl_glm" in config.methods:
        report.blocks.append(t4)
    if "provenance" in blocks:
        report.blocks.append(_provenance_block(corpus, config, report, tables))
    return report


def _replace_methods(config: RunConfig, methods) -> RunConfig:
    d = asdict(config)
    d["methods"] = tuple(methods)
    d["bookmakers"] = tuple(config.bookmakers)
    return RunConfig(**d)


__all__ = [
    "ALL_METHODS",
    "BLOCKS",
    "Block",
    "DEFAULT_METHODS",
    "EvalReport",
    "GLM_KINDS",
    "RunConfig",
    "evaluate",
    "kfold_by_season",
    "predict_glm",
]
