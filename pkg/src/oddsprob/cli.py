"""``oddsprob`` command-line driver.

Every flag can also be set through an ``ODDSPROB_<FLAG>`` environment
variable (``ODDSPROB_SEED=7``).  Exit codes: 0 success, 1 usage error,
2 data error, 3 numerical or fitting error.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click

from . import __version__, pipeline
from .data import BOOKMAKERS, extract_markets, load_manifest, read_corpus, write_corpus
from .errors import ConfigError, ConvergenceError, DataFormatError, FitError, OddsDomainError
from .glm import FittedModel, TrainingSet, fit_model
from .odds_core import METHODS, MarketOdds, convert_batch

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


def _csv_list(value):
    if value is None or isinstance(value, tuple):
        return value
    return tuple(v.strip() for v in str(value).split(",") if v.strip())


def _opt(*names, **kw):
    flag = names[0].lstrip("-").replace("-", "_").upper()
    kw.setdefault("envvar", f"ODDSPROB_{flag}")
    kw.setdefault("show_envvar", True)
    return click.option(*names, **kw)


manifest_opt = _opt("--manifest", type=click.Path(dir_okay=False), help="Manifest of season CSV files.")
corpus_opt = _opt("--corpus", type=click.Path(dir_okay=False), help="Normalised corpus file.")
bookmakers_opt = _opt("--bookmakers", default=",".join(BOOKMAKERS), show_default=True,
                      help="Comma-separated bookmaker ids.")
methods_opt = _opt("--methods", default=",".join(pipeline.DEFAULT_METHODS), show_default=True,
                   help="Comma-separated methods and model kinds.")
resamples_opt = _opt("--resamples", type=int, default=10_000, show_default=True, help="Bootstrap resamples.")
seed_opt = _opt("--seed", type=int, default=42, show_default=True, help="Bootstrap seed.")
protocol_opt = _opt("--protocol", type=click.Choice(pipeline.PROTOCOLS), default="in-sample",
                    show_default=True, help="GLM evaluation protocol.")
folds_opt = _opt("--folds", type=int, default=10, show_default=True, help="Folds for --protocol kfold.")
out_opt = _opt("--out", type=click.Path(file_okay=False), default="reports", show_default=True,
               help="Output directory.")
format_opt = _opt("--format", "fmt", type=click.Choice(pipeline.FORMATS), default="table", show_default=True,
                  help="Format printed to stdout; both are written to --out.")
pairs_opt = _opt("--all-pairs", is_flag=True, default=False, help="Also emit every pairwise test.")


def _report_options(f):
    for dec in reversed((manifest_opt, corpus_opt, bookmakers_opt, methods_opt, resamples_opt, seed_opt,
                         protocol_opt, folds_opt, out_opt, format_opt, pairs_opt)):
        f = dec(f)
    return f


def _config(**kw) -> pipeline.RunConfig:
    kw["bookmakers"] = _csv_list(kw["bookmakers"])
    kw["methods"] = _csv_list(kw["methods"])
    return pipeline.RunConfig(**kw).validate()


def _load(config: pipeline.RunConfig):
    if config.corpus:
        return read_corpus(config.corpus)
    if config.manifest:
        return load_manifest(config.manifest)
    raise ConfigError("one of --corpus or --manifest is required")


def _run_blocks(config: pipeline.RunConfig, blocks):
    corpus = _load(config)
    report = pipeline.evaluate(corpus, config, blocks)
    paths = report.write(config.out)
    click.echo(report.render(config.fmt), nl=False)
    click.echo(f"# wrote {len(paths)} files to {config.out}", err=True)


@click.group()
@click.version_option(__version__, prog_name="oddsprob")
def cli():
    """Convert bookmaker odds to probabilities and evaluate the conversions."""


@cli.command()
@_opt("--manifest", type=click.Path(dir_okay=False), required=True, help="Manifest of season CSV files.")
@_opt("--corpus", type=click.Path(dir_okay=False), default="corpus.csv", show_default=True,
      help="Where to write the normalised corpus.")
@bookmakers_opt
def ingest(manifest, corpus, bookmakers):
    """Parse the files listed in a manifest into a normalised corpus file."""
    data = load_manifest(manifest)
    write_corpus(data, corpus)
    click.echo("source,season,rows,records,skipped_rows,invalid_odds_cells")
    for p in data.provenance:
        click.echo(f"{p.source},{p.season},{p.rows},{p.records},{p.skipped_rows},{p.invalid_odds_cells}")
    click.echo("bookmaker,markets,excluded")
    for bk in _csv_list(bookmakers):
        if bk not in BOOKMAKERS:
            raise ConfigError(f"unknown bookmaker {bk!r}")
        table = extract_markets(data, bk)
        click.echo(f"{bk},{len(table)},{table.excluded}")
    click.echo(f"records,{len(data)}")
    click.echo(f"# corpus written to {corpus}", err=True)


@cli.command()
@_opt("--odds", required=True, help="Comma-separated decimal odds, e.g. 1.8,2.1.")
@_opt("--t", "t", type=int, default=1, show_default=True, help="Number of winning outcomes.")
@_opt("--method", type=click.Choice(METHODS), default="multiplicative", show_default=True)
@_opt("--model", type=click.Path(dir_okay=False), help="Fitted model file; overrides --method.")
def convert(odds, t, method, model):
    """Convert one market and print its probabilities to 6 decimals."""
    try:
        values = [float(v) for v in _csv_list(odds)]
    except ValueError:
        raise click.UsageError(f"--odds must be comma-separated numbers, got {odds!r}") from None
    market = MarketOdds(values, t)
    if model:
        fitted = FittedModel.load(model)
        pv = fitted.predict_market(market)
    else:
        pv = convert_batch(market.odds[None, :], t, method).row(0)
    click.echo(",".join(f"{p:.6f}" for p in pv.probs))
    click.echo(f"fallback={str(pv.fallback_used).lower()}")
    for key, value in pv.diagnostics.items():
        click.echo(f"{key}={float(value):.10g}")


@cli.command()
@corpus_opt
@manifest_opt
@bookmakers_opt
@_opt("--methods", default="fl_glm", show_default=True, help="Comma-separated model kinds.")
@out_opt
def fit(corpus, manifest, bookmakers, methods, out):
    """Fit models per bookmaker and save them as ``<kind>_<bookmaker>.model``."""
    kinds = _csv_list(methods)
    bad = [k for k in kinds if k not in pipeline.GLM_KINDS]
    if bad or not kinds:
        raise ConfigError(f"--methods for fit must be model kinds from {', '.join(pipeline.GLM_KINDS)}")
    config = pipeline.RunConfig(manifest=manifest, corpus=corpus, bookmakers=_csv_list(bookmakers),
                                methods=kinds, out=out).validate()
    data = _load(config)
    Path(out).mkdir(parents=True, exist_ok=True)
    for bk in config.bookmakers:
        table = extract_markets(data, bk)
        if len(table) == 0:
            click.echo(f"{bk}: no markets, skipped", err=True)
            continue
        ts = TrainingSet.from_odds(table.odds, table.outcomes, 1)
        for kind in kinds:
            model = fit_model(kind, ts)
            path = Path(out) / f"{kind}_{bk}.model"
            model.save(path)
            params = " ".join(f"{k}={v:.6f}" for k, v in model.params.items() if isinstance(v, float))
            click.echo(f"{bk},{kind},n={model.n_obs},loglik={model.log_likelihood:.4f} {params}".rstrip())


@cli.command()
@_report_options
def evaluate(**kw):
    """Write every report block: losses, significance, draws, correlation, exponents, provenance."""
    _run_blocks(_config(**kw), pipeline.BLOCKS)


@cli.command()
@_report_options
def draws(**kw):
    """Expected versus actual draw counts with Poisson verdicts."""
    _run_blocks(_config(**kw), ("draws", "provenance"))


@cli.command()
@_report_options
def correlate(**kw):
    """Correlation of per-(bookmaker, season) log-loss with booksum."""
    _run_blocks(_config(**kw), ("table3", "provenance"))


def main(argv=None) -> int:
    """Console entry point mapping errors to exit codes."""
    try:
        cli.main(args=argv, prog_name="oddsprob", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except DataFormatError as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA
    except OSError as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA
    except (ConfigError, OddsDomainError) as exc:
        click.echo(f"usage error: {exc}", err=True)
        return EXIT_USAGE
    except (ConvergenceError, FitError, ArithmeticError) as exc:
        click.echo(f"numerical error: {exc}", err=True)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
