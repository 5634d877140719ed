"""football-data.co.uk season CSVs: parsing, normalised corpus files, and
per-bookmaker market extraction.

Only the columns this package needs are read: ``Div``, ``Date``,
``HomeTeam``, ``AwayTeam``, ``FTR`` and the home/draw/away odds of each
bookmaker in :data:`BOOKMAKERS`.  Bad odds cells make that bookmaker's triple
absent for the row; bad result or date cells drop the row.  Both are counted
in the file's :class:`FileProvenance`.
"""
from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
import re
import urllib.error
import urllib.request
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .odds_core import MarketOdds

# bookmaker id -> accepted column prefixes, preferred first
BOOKMAKERS: dict[str, tuple[str, ...]] = {
    "bet365": ("B365",),
    "betwin": ("BW",),
    "interwetten": ("IW",),
    "pinnacle": ("PS", "P"),
    "william_hill": ("WH",),
}
BOOKMAKER_LABELS = {
    "bet365": "Bet365",
    "betwin": "Bet&Win",
    "interwetten": "Interwetten",
    "pinnacle": "Pinnacle",
    "william_hill": "William Hill",
}

RESULTS = ("home", "draw", "away")
_RESULT_CODES = {"H": "home", "D": "draw", "A": "away"}
_RESULT_LETTERS = {v: k for k, v in _RESULT_CODES.items()}
MANDATORY_COLUMNS = ("Div", "Date", "HomeTeam", "AwayTeam", "FTR")
SEASON_COLUMN = "Season"
DRAW_INDEX = 1


@dataclass(frozen=True)
class MatchRecord:
    division: str
    date: dt.date
    home_team: str
    away_team: str
    full_time_result: str
    odds_by_bookmaker: dict = field(default_factory=dict, hash=False)

    def outcome_one_hot(self) -> tuple[int, int, int]:
        return tuple(int(self.full_time_result == r) for r in RESULTS)


@dataclass
class FileProvenance:
    source: str
    season: str
    rows: int = 0
    records: int = 0
    skipped_rows: int = 0
    invalid_odds_cells: int = 0


@dataclass
class Corpus:
    records: list[MatchRecord]
    seasons: list[str]
    provenance: list[FileProvenance] = field(default_factory=list)

    def __post_init__(self):
        if len(self.records) != len(self.seasons):
            raise DataFormatError("every record needs exactly one season label")

    def __len__(self) -> int:
        return len(self.records)

    def season_of(self, i: int) -> str:
        return self.seasons[i]

    @classmethod
    def concat(cls, parts) -> Corpus:
        records, seasons, prov = [], [], []
        for part in parts:
            records.extend(part.records)
            seasons.extend(part.seasons)
            prov.extend(part.provenance)
        return cls(records, seasons, prov)


# ---------------------------------------------------------------------------
# cell parsing
# ---------------------------------------------------------------------------

_DATE_RE = re.compile(r"^\s*(\d{1,2})/(\d{1,2})/(\d{2}|\d{4})\s*$")


def parse_date(text: str) -> dt.date:
    """``dd/mm/yy`` or ``dd/mm/yyyy``; two-digit years >= 90 are 19xx."""
    m = _DATE_RE.match(text or "")
    if not m:
        raise ValueError(f"unparseable date {text!r}")
    day, month, year = int(m.group(1)), int(m.group(2)), m.group(3)
    y = int(year)
    if len(year) == 2:
        y += 1900 if y >= 90 else 2000
    return dt.date(y, month, day)


def _parse_odds_cell(text: str | None) -> tuple[float | None, bool]:
    """Returns ``(value, invalid)``; blank cells are absent but not invalid."""
    if text is None or not text.strip():
        return None, False
    try:
        value = float(text)
    except ValueError:
        return None, True
    if not math.isfinite(value) or value <= 1.0:
        return None, True
    return value, False


def decode_bytes(content: bytes) -> str:
    try:
        return content.decode("utf-8-sig")
    except UnicodeDecodeError:
        return content.decode("latin-1")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _bookmaker_columns(header, bookmakers):
    cols = {}
    present = set(header)
    for bk, prefixes in bookmakers.items():
        options = [tuple(p + s for s in "HDA") for p in prefixes]
        cols[bk] = [opt for opt in options if all(c in present for c in opt)]
    return cols


def _parse_table(text: str, season_label: str | None, source: str, bookmakers) -> Corpus:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataFormatError(f"{source}: empty file") from None
    header = [h.strip() for h in header]
    if not any(header):
        raise DataFormatError(f"{source}: empty header row")
    need = list(MANDATORY_COLUMNS) + ([SEASON_COLUMN] if season_label is None else [])
    missing = [c for c in need if c not in header]
    if missing:
        raise DataFormatError(f"{source}: missing mandatory column(s) {', '.join(missing)}")
    pos = {name: i for i, name in reversed(list(enumerate(header)))}
    bk_cols = _bookmaker_columns(header, bookmakers)

    def cell(row, name):
        i = pos[name]
        return row[i].strip() if i < len(row) else ""

    records, seasons = [], []
    provs: dict[str, FileProvenance] = {}
    for row in reader:
        if not any(c.strip() for c in row):
            continue
        season = season_label if season_label is not None else cell(row, SEASON_COLUMN)
        prov = provs.get(season)
        if prov is None:
            prov = provs[season] = FileProvenance(source, season)
        prov.rows += 1
        result = _RESULT_CODES.get(cell(row, "FTR"))
        home, away = cell(row, "HomeTeam"), cell(row, "AwayTeam")
        try:
            date = parse_date(cell(row, "Date"))
        except ValueError:
            date = None
        if result is None or date is None or not home or not away or not season:
            prov.skipped_rows += 1
            continue
        odds = {}
        for bk, options in bk_cols.items():
            triple = None
            for cols in options:
                parsed = [_parse_odds_cell(cell(row, c)) for c in cols]
                prov.invalid_odds_cells += sum(bad for _, bad in parsed)
                values = [v for v, _ in parsed]
                if all(v is not None for v in values):
                    triple = tuple(values)
                    break
            odds[bk] = triple
        records.append(MatchRecord(cell(row, "Div"), date, home, away, result, odds))
        seasons.append(season)
        prov.records += 1
    if season_label is not None and not provs:
        provs[season_label] = FileProvenance(source, season_label)
    return Corpus(records, seasons, list(provs.values()))


def parse_football_csv(content, season_label: str, source: str = "<memory>", bookmakers=None) -> Corpus:
    """Parse one season file (bytes or str) into a partial corpus."""
    text = decode_bytes(content) if isinstance(content, (bytes, bytearray)) else content
    if not text.strip():
        raise DataFormatError(f"{source}: empty file")
    return _parse_table(text, season_label, source, bookmakers or BOOKMAKERS)


# ---------------------------------------------------------------------------
# manifests and normalised corpus files
# ---------------------------------------------------------------------------

_SEASON_LONG = re.compile(r"(?<!\d)((?:19|20)\d{2})[-_/]?(\d{2}|\d{4})(?!\d)")
_SEASON_CODE = re.compile(r"(?<!\d)(\d{2})(\d{2})(?!\d)")


def season_from_path(path) -> str:
    """Derive ``"2012-13"`` style labels from names like ``2012-13/E0.csv``
    or the publisher's ``mmz4281/1213/E0.csv``."""
    parts = Path(path).parts
    for part in reversed(parts):
        m = _SEASON_LONG.search(part)
        if m:
            start = int(m.group(1))
            end = int(m.group(2)[-2:])
            if (start + 1) % 100 == end:
                return f"{start}-{end:02d}"
        m = _SEASON_CODE.fullmatch(part)
        if m and (int(m.group(1)) + 1) % 100 == int(m.group(2)):
            first = int(m.group(1))
            century = 1900 if first >= 90 else 2000
            return f"{century + first}-{int(m.group(2)):02d}"
    raise DataFormatError(f"cannot derive a season label from path {str(path)!r}")


def read_manifest(path) -> list[tuple[Path, str]]:
    """Lines of ``relative/path [season]``; ``#`` starts a comment."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot read manifest {path}: {exc.strerror}") from exc
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.replace(",", " ").split()
        rel = fields[0]
        season = fields[1] if len(fields) > 1 else season_from_path(rel)
        entries.append((path.parent / rel, season))
    return entries


def load_manifest(path, bookmakers=None) -> Corpus:
    """Parse every file in a manifest, ordered by (season, file name)."""
    entries = sorted(read_manifest(path), key=lambda e: (e[1], e[0].name, str(e[0])))
    parts = []
    for file_path, season in entries:
        try:
            content = file_path.read_bytes()
        except OSError as exc:
            raise DataFormatError(f"cannot read {file_path}: {exc.strerror}") from exc
        parts.append(parse_football_csv(content, season, str(file_path), bookmakers))
    return Corpus.concat(parts)


def _fmt_odds(v: float | None) -> str:
    return "" if v is None else repr(v)


def corpus_to_csv(corpus: Corpus, bookmakers=None) -> str:
    bookmakers = bookmakers or BOOKMAKERS
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = [SEASON_COLUMN, *MANDATORY_COLUMNS]
    for prefixes in bookmakers.values():
        header.extend(prefixes[0] + s for s in "HDA")
    writer.writerow(header)
    for rec, season in zip(corpus.records, corpus.seasons):
        row = [season, rec.division, rec.date.strftime("%d/%m/%Y"), rec.home_team, rec.away_team,
               _RESULT_LETTERS[rec.full_time_result]]
        for bk in bookmakers:
            triple = rec.odds_by_bookmaker.get(bk)
            row.extend(_fmt_odds(v) for v in (triple or (None, None, None)))
        writer.writerow(row)
    return out.getvalue()


def corpus_from_csv(text: str, source: str = "<corpus>", bookmakers=None) -> Corpus:
    return _parse_table(text, None, source, bookmakers or BOOKMAKERS)


def write_corpus(corpus: Corpus, path) -> None:
    """Write the normalised corpus CSV plus a ``.provenance.json`` sidecar."""
    path = Path(path)
    path.write_text(corpus_to_csv(corpus), encoding="utf-8")
    prov = [asdict(p) for p in corpus.provenance]
    Path(str(path) + ".provenance.json").write_text(json.dumps(prov, indent=2, sort_keys=True) + "\n")


def read_corpus(path) -> Corpus:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot read corpus {path}: {exc.strerror}") from exc
    corpus = corpus_from_csv(text, str(path))
    sidecar = Path(str(path) + ".provenance.json")
    if sidecar.exists():
        corpus.provenance = [FileProvenance(**p) for p in json.loads(sidecar.read_text())]
    return corpus


# ---------------------------------------------------------------------------
# markets
# ---------------------------------------------------------------------------


@dataclass
class MarketTable:
    """Home/draw/away markets of one bookmaker, row-aligned with outcomes."""

    bookmaker: str
    odds: np.ndarray
    outcomes: np.ndarray
    seasons: np.ndarray
    record_index: np.ndarray
    excluded: int = 0

    def __len__(self) -> int:
        return self.odds.shape[0]

    def __iter__(self):
        for row, y in zip(self.odds, self.outcomes):
            yield MarketOdds(row, 1), tuple(int(v) for v in y)

    def subset(self, mask) -> MarketTable:
        return MarketTable(self.bookmaker, self.odds[mask], self.outcomes[mask], self.seasons[mask],
                           self.record_index[mask], 0)

    @property
    def booksums(self) -> np.ndarray:
        return (1.0 / self.odds).sum(axis=1)


def extract_markets(corpus: Corpus, bookmaker: str) -> MarketTable:
    if bookmaker not in BOOKMAKERS and not any(bookmaker in r.odds_by_bookmaker for r in corpus.records[:1]):
        raise DataFormatError(f"unknown bookmaker {bookmaker!r}")
    keep = [i for i, r in enumerate(corpus.records) if r.odds_by_bookmaker.get(bookmaker) is not None]
    odds = np.array([corpus.records[i].odds_by_bookmaker[bookmaker] for i in keep], dtype=np.float64).reshape(-1, 3)
    outcomes = np.array([corpus.records[i].outcome_one_hot() for i in keep], dtype=np.float64).reshape(-1, 3)
    seasons = np.array([corpus.seasons[i] for i in keep], dtype=object)
    return MarketTable(bookmaker, odds, outcomes, seasons, np.array(keep, dtype=np.int64),
                       len(corpus.records) - len(keep))


def group_by_season_bookmaker(corpus: Corpus, bookmakers=None) -> dict[tuple[str, str], MarketTable]:
    """``(bookmaker, season) -> markets``; groups without markets are absent."""
    groups = {}
    for bk in bookmakers or BOOKMAKERS:
        table = extract_markets(corpus, bk)
        for season in sorted(set(table.seasons)):
            groups[(bk, season)] = table.subset(table.seasons == season)
    return groups


# ---------------------------------------------------------------------------
# optional download helper (never used by the evaluation pipeline)
# ---------------------------------------------------------------------------


def season_code(season: str) -> str:
    """``"2012-13"`` -> ``"1213"`` as used in the publisher's URLs."""
    start, end = season.split("-")
    return f"{int(start) % 100:02d}{int(end) % 100:02d}"


def fetch_seasons(url_template: str, seasons, leagues, dest_dir, timeout: float = 30.0,
                  skip_missing: bool = True) -> Path:
    """Download season files and write ``manifest.txt`` next to them.

    ``url_template`` may use ``{season}`` (``2012-13``), ``{code}``
    (``1213``) and ``{league}`` (``E0``).  Files that cannot be fetched are
    left out of the manifest with a warning when ``skip_missing`` is set.
    Returns the manifest path.
    """
    dest = Path(dest_dir)
    lines = []
    for season in seasons:
        for league in leagues:
            url = url_template.format(season=season, code=season_code(season), league=league)
            rel = Path(season) / f"{league}.csv"
            target = dest / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            try:
                with urllib.request.urlopen(url, timeout=timeout) as resp:
                    payload = resp.read()
            except urllib.error.URLError as exc:
                if not skip_missing:
                    raise DataFormatError(f"could not fetch {url}: {exc}") from exc
                warnings.warn(f"skipping {url}: {exc}", stacklevel=2)
                continue
            target.write_bytes(payload)
            lines.append(f"{rel.as_posix()} {season}")
    manifest = dest / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


__all__ = [
    "BOOKMAKERS",
    "Corpus",
    "FileProvenance",
    "MarketTable",
    "MatchRecord",
    "corpus_from_csv",
    "corpus_to_csv",
    "extract_markets",
    "fetch_seasons",
    "group_by_season_bookmaker",
    "load_manifest",
    "parse_football_csv",
    "read_corpus",
    "read_manifest",
    "season_from_path",
    "write_corpus",
]
