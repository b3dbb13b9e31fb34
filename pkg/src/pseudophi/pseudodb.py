"""Gazetteer lists with popularity weights.

A database is a directory of UTF-8 TSV list files, one per list::

    surface<TAB>weight[<TAB>attr=value ...]
    Mary<TAB>3104321<TAB>gender=F
    ...

The first line is the header.  The list name is the file stem, so the usual
layout is ``first_names.tsv``, ``last_names.tsv``, ``hospitals.tsv``,
``companies.tsv``, ``universities.tsv`` and ``states.tsv``.
"""

from __future__ import annotations

import csv
import logging
import math
import re
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from itertools import accumulate
from pathlib import Path
from typing import Callable, Iterable, Mapping, Union

from .rng import RandomStream

logger = logging.getLogger(__name__)

LIST_HEADER = "surface\tweight"
LIST_NAMES = ("first_names", "last_names", "hospitals", "companies", "universities", "states")
DEFAULT_NAME_YEARS = (1960, 2020)

Filter = Union[Mapping[str, str], Callable[["GazetteerEntry"], bool], None]


class GazetteerError(ValueError):
    pass


@dataclass(frozen=True)
class GazetteerEntry:
    surface: str
    weight: float
    attrs: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.surface:
            raise GazetteerError("empty surface")
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise GazetteerError(f"weight must be positive: {self.surface!r} has {self.weight}")

    def matches(self, attrs: Mapping[str, str]) -> bool:
        return all(self.attrs.get(k) == v for k, v in attrs.items())


class _Index:
    __slots__ = ("entries", "cumulative", "total")

    def __init__(self, entries: list[GazetteerEntry]):
        self.entries = entries
        self.cumulative = list(accumulate(e.weight for e in entries))
        self.total = self.cumulative[-1]

    def draw(self, rng: RandomStream) -> GazetteerEntry:
        i = bisect_right(self.cumulative, rng.random() * self.total)
        # guards against u * total rounding up to total
        return self.entries[min(i, len(self.entries) - 1)]


class PseudoDatabase:
    """Named gazetteer lists, immutable after construction."""

    def __init__(self, lists: Mapping[str, Iterable[GazetteerEntry]]):
        self._lists: dict[str, _Index] = {}
        for name, entries in lists.items():
            entries = list(entries)
            if not entries:
                raise GazetteerError(f"list {name!r} is empty")
            self._lists[name] = _Index(entries)
        self._filtered: dict[tuple, _Index | None] = {}

    def __contains__(self, name: str) -> bool:
        return name in self._lists

    def __getitem__(self, name: str) -> list[GazetteerEntry]:
        return self._index(name).entries

    def names(self) -> list[str]:
        return sorted(self._lists)

    def counts(self) -> dict[str, int]:
        return {name: len(self._lists[name].entries) for name in self.names()}

    def cumulative(self, name: str) -> list[float]:
        return self._index(name).cumulative

    def _index(self, name: str) -> _Index:
        try:
            return self._lists[name]
        except KeyError:
            raise KeyError(f"unknown list {name!r}; have {self.names()}") from None

    def sample(self, name: str, rng: RandomStream, where: Filter = None) -> GazetteerEntry:
        """Draw an entry with probability proportional to its weight.

        ``where`` restricts the draw to matching entries, either as an
        ``{attr: value}`` mapping (cached) or as a predicate (not cached).
        """
        index = self._index(name)
        if where:
            if callable(where):
                sub = [e for e in index.entries if where(e)]
                index = _Index(sub) if sub else None
            else:
                key = (name, tuple(sorted(where.items())))
                if key not in self._filtered:
                    sub = [e for e in index.entries if e.matches(where)]
                    self._filtered[key] = _Index(sub) if sub else None
                index = self._filtered[key]
            if index is None:
                raise LookupError(f"no entry of list {name!r} matches {where!r}")
        return index.draw(rng)

    def __getstate__(self):
        return {"_lists": self._lists, "_filtered": {}}


def sample(db: PseudoDatabase, name: str, where: Filter, rng: RandomStream) -> GazetteerEntry:
    return db.sample(name, rng, where)


def _format_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() and abs(w) < 2**53 else repr(float(w))


def parse_list(lines: Iterable[str], source: str = "<list>") -> list[GazetteerEntry]:
    entries = []
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if lineno == 1:
            if not line.startswith(LIST_HEADER):
                raise GazetteerError(f"{source}:1: expected header {LIST_HEADER!r}")
            continue
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) < 2:
            raise GazetteerError(f"{source}:{lineno}: expected surface<TAB>weight")
        surface, weight, *rest = fields
        attrs = {}
        for item in rest:
            key, sep, value = item.partition("=")
            if not sep or not key:
                raise GazetteerError(f"{source}:{lineno}: bad attribute {item!r}")
            attrs[key] = value
        try:
            entries.append(GazetteerEntry(surface, float(weight), attrs))
        except ValueError as exc:
            raise GazetteerError(f"{source}:{lineno}: {exc}") from None
    if not entries:
        raise GazetteerError(f"{source}: list is empty")
    return entries


def format_list(entries: Iterable[GazetteerEntry]) -> str:
    rows = [LIST_HEADER]
    for e in entries:
        rows.append("\t".join([e.surface, _format_weight(e.weight)]
                              + [f"{k}={v}" for k, v in e.attrs.items()]))
    return "\n".join(rows) + "\n"


def load(path: str | Path) -> PseudoDatabase:
    """Load every ``*.tsv`` in ``path`` as a list named after the file stem."""
    path = Path(path)
    files = sorted(path.glob("*.tsv"))
    if not files:
        raise GazetteerError(f"{path}: no list files (*.tsv)")
    lists = {}
    for f in files:
        with open(f, encoding="utf-8") as fh:
            lists[f.stem] = parse_list(fh, str(f))
    db = PseudoDatabase(lists)
    logger.info("loaded pseudo database %s: %s", path, db.counts())
    return db


def dump(db: PseudoDatabase, path: str | Path) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    for name in db.names():
        (path / f"{name}.tsv").write_text(format_list(db[name]), encoding="utf-8")


def sample_db_path() -> Path:
    """Directory of the small bundled fixture lists."""
    return Path(str(resources.files("pseudophi.data").joinpath("sample_db")))


def load_sample() -> PseudoDatabase:
    return load(sample_db_path())


_YEAR_RE = re.compile(r"(1[89]\d\d|20\d\d)")


def ingest_census_names(files: Iterable[str | Path],
                        years: tuple[int, int] = DEFAULT_NAME_YEARS) -> list[GazetteerEntry]:
    """Sum year-partitioned first-name counts into gendered entries.

    Each file holds ``name,gender,count`` rows for a single year taken from
    the file name (``yob1987.txt``).  Files outside ``years`` (inclusive) are
    ignored.  A name used for both genders yields one entry per gender.
    """
    lo, hi = years
    totals: dict[tuple[str, str], int] = defaultdict(int)
    for f in files:
        f = Path(f)
        m = _YEAR_RE.search(f.name)
        if not m:
            raise GazetteerError(f"{f}: no year in file name")
        if not lo <= int(m.group(1)) <= hi:
            continue
        with open(f, encoding="utf-8", newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                if not row:
                    continue
                try:
                    name, gender, count = (c.strip() for c in row)
                    count = int(count)
                except ValueError:
                    raise GazetteerError(f"{f}:{lineno}: expected name,gender,count") from None
                if gender not in ("F", "M") or not name:
                    raise GazetteerError(f"{f}:{lineno}: bad name or gender {row!r}")
                if count > 0:
                    totals[name, gender] += count
    return [GazetteerEntry(name, float(n), {"gender": g})
            for (name, g), n in sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))]


def ingest_census_surnames(path: str | Path) -> list[GazetteerEntry]:
    """Read a surname frequency CSV with ``name`` and ``count`` columns."""
    path = Path(path)
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, 2):
            try:
                name = row["name"].strip()
                count = float(row["count"])
            except (KeyError, TypeError, ValueError):
                raise GazetteerError(f"{path}:{lineno}: expected name and count columns") from None
            if name and count > 0 and name.upper() != "ALL OTHER NAMES":
                out.append(GazetteerEntry(name.title(), count))
    return out
