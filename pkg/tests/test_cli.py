import subprocess
import sys

import numpy as np
import pytest

from helpers import oracle_oo_epc, oracle_power
from oddsprob.cli import main
from oddsprob.synthetic import football_csv


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    for i, season in enumerate(("2012-13", "2013-14")):
        d = tmp_path / season
        d.mkdir()
        (d / "E0.csv").write_text(football_csv(15, season, seed=i))
    (tmp_path / "manifest.txt").write_text("2012-13/E0.csv\n2013-14/E0.csv 2013-14\n")
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_convert_multiplicative(capsys):
    code, out, _ = run(capsys, "convert", "--method", "multiplicative", "--odds", "2.0,2.0")
    assert code == 0
    assert out.splitlines()[0] == "0.500000,0.500000"
    assert "fallback=false" in out


def test_convert_oo_epc(capsys):
    code, out, _ = run(capsys, "convert", "--method", "oo_epc", "--odds", "1.8,2.1")
    probs, _, z = oracle_oo_epc([1.8, 2.1])
    assert out.splitlines()[0] == ",".join(f"{p:.6f}" for p in probs)
    assert float(out.split("z=")[1].split()[0]) == pytest.approx(z, rel=1e-9)


def test_convert_power_prints_beta(capsys):
    code, out, _ = run(capsys, "convert", "--method", "power", "--odds", "1.5,3.0,6.0")
    probs, beta = oracle_power([1.5, 3.0, 6.0])
    assert out.splitlines()[0] == ",".join(f"{p:.6f}" for p in probs)
    assert float(out.split("beta=")[1].split()[0]) == pytest.approx(beta, rel=1e-9)


@pytest.mark.parametrize("args", [
    ("convert", "--odds", "0.9,2.0"),
    ("convert", "--odds", "x,2.0"),
    ("convert", "--method", "shin_numerical", "--t", "2", "--odds", "1.2,1.5,3"),
    ("convert", "--method", "nope", "--odds", "2,2"),
    ("frobnicate",),
])
def test_usage_errors_exit_1(capsys, args):
    code, _, _ = run(capsys, *args)
    assert code == 1


def test_ingest_summary_and_corpus(capsys, workspace):
    code, out, _ = run(capsys, "ingest", "--manifest", "manifest.txt", "--corpus", "corpus.csv")
    assert code == 0
    assert "2012-13/E0.csv,2012-13,15,15,0,0" in out
    assert "pinnacle,30,0" in out and "records,30" in out
    assert (workspace / "corpus.csv").exists()


def test_ingest_missing_file_names_path(capsys, workspace):
    (workspace / "bad.txt").write_text("2020-21/E0.csv\n")
    code, _, err = run(capsys, "ingest", "--manifest", "bad.txt")
    assert code == 2 and "2020-21/E0.csv" in err


def test_evaluate_missing_corpus(capsys, workspace):
    code, _, err = run(capsys, "evaluate", "--corpus", "absent.csv")
    assert code == 2 and "absent.csv" in err


def test_evaluate_empty_methods(capsys, workspace):
    run(capsys, "ingest", "--manifest", "manifest.txt")
    code, _, _ = run(capsys, "evaluate", "--corpus", "corpus.csv", "--methods", "")
    assert code == 1


def test_evaluate_writes_blocks_and_is_deterministic(capsys, workspace):
    run(capsys, "ingest", "--manifest", "manifest.txt")
    for out in ("r1", "r2"):
        code, stdout, _ = run(capsys, "evaluate", "--corpus", "corpus.csv", "--resamples", "200", "--out", out)
        assert code == 0 and "Odds-only mean log-loss" in stdout
    files = sorted(p.name for p in (workspace / "r1").iterdir())
    assert "table3_all.csv" in files and "provenance_all.txt" in files
    for name in files:
        assert (workspace / "r1" / name).read_bytes() == (workspace / "r2" / name).read_bytes()


def test_env_overrides(capsys, workspace, monkeypatch):
    run(capsys, "ingest", "--manifest", "manifest.txt")
    monkeypatch.setenv("ODDSPROB_SEED", "777")
    monkeypatch.setenv("ODDSPROB_RESAMPLES", "50")
    monkeypatch.setenv("ODDSPROB_BOOKMAKERS", "bet365")
    code, out, _ = run(capsys, "draws", "--corpus", "corpus.csv", "--format", "csv")
    assert code == 0
    assert "# seed=777" in out and "resamples,50" in out
    assert "draws_bet365" not in out and "bookmaker=bet365" in out
    assert "bookmaker=pinnacle" not in out


def test_correlate_command(capsys, workspace):
    run(capsys, "ingest", "--manifest", "manifest.txt")
    code, out, _ = run(capsys, "correlate", "--corpus", "corpus.csv", "--methods", "multiplicative,power",
                       "--out", "corr")
    assert code == 0 and "Correlation" in out
    assert (workspace / "corr" / "table3_all.txt").exists()


def test_fit_then_convert_with_model(capsys, workspace):
    run(capsys, "ingest", "--manifest", "manifest.txt")
    code, out, _ = run(capsys, "fit", "--corpus", "corpus.csv", "--bookmakers", "pinnacle", "--out", "models")
    assert code == 0 and out.startswith("pinnacle,fl_glm")
    model = workspace / "models" / "fl_glm_pinnacle.model"
    code, out, _ = run(capsys, "convert", "--model", str(model), "--odds", "1.8,3.5,4.2")
    assert code == 0
    probs = np.array([float(v) for v in out.splitlines()[0].split(",")])
    assert probs.sum() == pytest.approx(1.0, abs=3e-6)


def test_fit_rejects_odds_only_methods(capsys, workspace):
    run(capsys, "ingest", "--manifest", "manifest.txt")
    code, _, _ = run(capsys, "fit", "--corpus", "corpus.csv", "--methods", "power")
    assert code == 1


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "oddsprob.cli", "convert", "--odds", "2.0,2.0"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("0.500000,0.500000")
