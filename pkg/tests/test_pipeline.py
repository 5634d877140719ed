import csv
import io

import numpy as np
import pytest

from oddsprob import data, pipeline
from oddsprob.errors import ConfigError
from oddsprob.pipeline import RunConfig
from oddsprob.synthetic import football_csv


def _corpus(seasons=("2012-13",), n=20, bookmakers=None):
    parts = [data.parse_football_csv(football_csv(n, s, seed=i, bookmakers=bookmakers).encode(), s)
             for i, s in enumerate(seasons)]
    return data.Corpus.concat(parts)


def _p_values(block):
    if "p_value" not in block.columns:
        return []
    j = block.columns.index("p_value")
    return [float(r[j]) for r in block.rows if r[j] not in ("-", "n/a")]


def test_tiny_fixture_has_every_block():
    report = pipeline.evaluate(_corpus(), RunConfig(resamples=500))
    stems = {b.stem for b in report.blocks}
    for bk in data.BOOKMAKERS:
        for name in ("table1", "table2", "draws"):
            assert f"{name}_{bk}" in stems
    assert {"table3_all", "table4_all", "provenance_all"} <= stems
    pvals = [p for b in report.blocks for p in _p_values(b)]
    assert pvals and all(0.0 <= p <= 1.0 for p in pvals)


def test_report_numbers_match_raw_results():
    corpus = _corpus(n=60)
    report = pipeline.evaluate(corpus, RunConfig(resamples=200, bookmakers=("pinnacle",)))
    block = report.block("table1_pinnacle")
    row = next(r for r in block.rows if r[0] == "power")
    assert row[1] == f"{report.mean_loss[('pinnacle', 'power')]:.5f}"
    draws = report.block("draws_pinnacle")
    expected, actual, _ = report.draws[("pinnacle", "oo_epc")]
    assert next(r for r in draws.rows if r[0] == "oo_epc")[1:3] == (f"{expected:.1f}", str(actual))


def test_significance_cells_carry_p_values():
    report = pipeline.evaluate(_corpus(n=60), RunConfig(resamples=200, bookmakers=("bet365",)))
    block = report.block("table1_bet365")
    j = block.columns.index("p_value")
    for r in block.rows:
        if r[0] != "oo_epc":
            assert 0.0 <= float(r[j]) <= 1.0
    assert ("bet365", "power", "oo_epc") in report.significance


def test_single_method_has_no_significance_columns():
    report = pipeline.evaluate(_corpus(), RunConfig(methods=("power",), resamples=100))
    block = report.block("table1_bet365")
    assert block.columns == ("method", "mean_logloss", "n", "fallbacks")
    assert not report.significance
    assert not any(b.name == "table2" for b in report.blocks)


def test_all_pairs_block():
    cfg = RunConfig(methods=("multiplicative", "power", "oo_epc"), resamples=100, all_pairs=True,
                    bookmakers=("bet365",))
    report = pipeline.evaluate(_corpus(), cfg)
    pairs = report.block("table1pairs_bet365")
    assert len(pairs.rows) == 3


def test_determinism_and_files(tmp_path):
    corpus = _corpus(("2012-13", "2013-14"), n=30)
    cfg = RunConfig(resamples=300)
    a = pipeline.evaluate(corpus, cfg).write(tmp_path / "a")
    b = pipeline.evaluate(corpus, cfg).write(tmp_path / "b")
    assert [p.name for p in a] == [p.name for p in b]
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
    names = {p.name for p in a}
    assert "table1_pinnacle.txt" in names and "table1_pinnacle.csv" in names


def test_header_records_seed_and_hash():
    cfg = RunConfig(resamples=100, seed=1234, bookmakers=("bet365",))
    report = pipeline.evaluate(_corpus(), cfg)
    text = report.block("table1_bet365").to_text(report.header)
    assert "# seed=1234" in text
    assert f"# config_hash={cfg.config_hash()}" in text
    assert RunConfig(seed=1).config_hash() != RunConfig(seed=2).config_hash()
    assert RunConfig(out="x").config_hash() == RunConfig(out="y").config_hash()


def test_csv_blocks_parse():
    report = pipeline.evaluate(_corpus(), RunConfig(resamples=100, bookmakers=("bet365",)))
    text = report.block("draws_bet365").to_csv(report.header)
    rows = list(csv.reader(io.StringIO("\n".join(l for l in text.splitlines() if not l.startswith("#")))))
    assert rows[0][0] == "method" and len(rows) == 1 + len(pipeline.DEFAULT_METHODS)


def test_kfold_protocol():
    corpus = _corpus(("2012-13", "2013-14", "2014-15"), n=40)
    cfg = RunConfig(protocol="kfold", resamples=100, bookmakers=("bet365",),
                    methods=("fl_glm", "multinomial_logistic"))
    report = pipeline.evaluate(corpus, cfg)
    assert "k-fold" in report.block("table2_bet365").title
    with pytest.raises(ConfigError):
        pipeline.evaluate(_corpus(), cfg)


def test_kfold_assignment():
    seasons = np.array(["2013-14", "2012-13", "2014-15", "2012-13"], dtype=object)
    np.testing.assert_array_equal(pipeline.kfold_by_season(seasons, 2), [1, 0, 0, 0])
    np.testing.assert_array_equal(pipeline.kfold_by_season(seasons, 10), [1, 0, 2, 0])


def test_missing_bookmaker_is_skipped():
    corpus = _corpus(bookmakers=("bet365", "pinnacle"))
    report = pipeline.evaluate(corpus, RunConfig(resamples=100))
    stems = {b.stem for b in report.blocks}
    assert "table1_pinnacle" in stems and "table1_betwin" not in stems
    assert report.market_counts["betwin"] == 0


def test_correlation_points_per_bookmaker_season():
    corpus = _corpus(("2012-13", "2013-14"), n=30)
    report = pipeline.evaluate(corpus, RunConfig(resamples=100, methods=("multiplicative",)))
    res, n_points = report.correlation["multiplicative"]
    assert n_points == 10 and -1 <= res.statistic <= 1


@pytest.mark.parametrize("kw", [
    {"methods": ()},
    {"methods": ("nope",)},
    {"bookmakers": ("bwin",)},
    {"protocol": "loo"},
    {"resamples": 0},
    {"fmt": "xml"},
])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        RunConfig(**kw).validate()
