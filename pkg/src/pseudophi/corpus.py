"""Masked and pseudo corpus files.

A corpus file is UTF-8 text with one sentence per line.  A blank line ends a
note; :func:`normalize` writes one between notes and :func:`synthesize` uses
them to scope entity memoization and random streams, so every note draws from
its own stream ``RandomStream(seed, note_index)``.  Output therefore does not
depend on the worker count or block size.
"""

from __future__ import annotations

import csv
import json
import logging
import sys
from collections import Counter
from dataclasses import dataclass, field, replace
from multiprocessing import get_context
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping

from .generators import SOURCES, GenerationContext, Generator, GeneratorConfig
from .masks import RuleTable, TagKind, default_rule_table, scan_line_partial, splice
from .pseudodb import PseudoDatabase
from .rng import RandomStream
from .segment import SegmenterConfig, segment

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_LINES = 2000
MAX_NOTE_LINES = 100_000


class CorpusError(RuntimeError):
    pass


@dataclass
class NoteRecord:
    note_id: str
    text: str | bytes
    metadata: Mapping[str, str] = field(default_factory=dict)


@dataclass
class Incident:
    line: int
    kind: str
    message: str
    offset: int | None = None
    tag: str | None = None
    note_id: str | None = None

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass
class CorpusCensus:
    lines: int = 0
    tokens: int = 0
    masks: int = 0
    by_tag: Counter = field(default_factory=Counter)
    by_source: Counter = field(default_factory=Counter)
    memo_hits: int = 0
    malformed: int = 0
    incidents: int = 0

    @property
    def mask_fraction(self) -> float:
        """Masks over whitespace tokens, counting each mask as one token."""
        return self.masks / self.tokens if self.tokens else 0.0

    def merge(self, other: "CorpusCensus") -> "CorpusCensus":
        self.lines += other.lines
        self.tokens += other.tokens
        self.masks += other.masks
        self.by_tag.update(other.by_tag)
        self.by_source.update(other.by_source)
        self.memo_hits += other.memo_hits
        self.malformed += other.malformed
        self.incidents += other.incidents
        return self

    def to_json(self) -> dict:
        return {
            "lines": self.lines,
            "tokens": self.tokens,
            "masks": self.masks,
            "mask_fraction": self.mask_fraction,
            "by_tag": {t.value: self.by_tag.get(t.value, 0) for t in TagKind},
            "by_source": {s: self.by_source.get(s, 0) for s in SOURCES},
            "memo_hits": self.memo_hits,
            "malformed": self.malformed,
            "incidents": self.incidents,
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "CorpusCensus":
        return cls(d["lines"], d["tokens"], d["masks"],
                   Counter({k: v for k, v in d["by_tag"].items() if v}),
                   Counter({k: v for k, v in d["by_source"].items() if v}),
                   d.get("memo_hits", 0), d.get("malformed", 0), d.get("incidents", 0))


def _token_count(line: str, tokens) -> int:
    if tokens:
        line = splice(line, tokens, [" M "] * len(tokens))
    return len(line.split())


# normalize ------------------------------------------------------------------

def read_noteevents(path: str | Path) -> Iterator[NoteRecord]:
    """Notes from a ``NOTEEVENTS``-shaped CSV with ``ROW_ID`` and ``TEXT`` columns."""
    csv.field_size_limit(min(sys.maxsize, 2**31 - 1))
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"ROW_ID", "TEXT"} - set(reader.fieldnames or ())
        if missing:
            raise CorpusError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            text = row.pop("TEXT")
            yield NoteRecord(row.pop("ROW_ID"), text, row)


def normalize_notes(notes: Iterable[NoteRecord], config: SegmenterConfig | None = None,
                    strict: bool = False,
                    incidents: list[Incident] | None = None) -> Iterator[str]:
    """Yield output lines: each note's sentences followed by a blank line."""
    config = config or SegmenterConfig()
    for i, note in enumerate(notes):
        text = note.text
        if isinstance(text, bytes):
            try:
                text = text.decode("utf-8")
            except UnicodeDecodeError as exc:
                if strict:
                    raise CorpusError(f"note {note.note_id}: not UTF-8: {exc}") from exc
                logger.warning("skipping note %s: not UTF-8 (%s)", note.note_id, exc)
                if incidents is not None:
                    incidents.append(Incident(i, "undecodable_note", str(exc),
                                              note_id=str(note.note_id)))
                continue
        yield from segment(text, config)
        yield ""


def normalize(notes: Iterable[NoteRecord], out: str | Path | IO[str],
              config: SegmenterConfig | None = None, strict: bool = False) -> list[Incident]:
    """Write the flat sentence-per-line file; returns skipped-note incidents."""
    incidents: list[Incident] = []
    fh = open(out, "w", encoding="utf-8", newline="\n") if isinstance(out, (str, Path)) else out
    try:
        for line in normalize_notes(notes, config, strict, incidents):
            fh.write(line + "\n")
    finally:
        if fh is not out:
            fh.close()
    return incidents


# census / synthesize --------------------------------------------------------

def read_lines(path: str | Path) -> Iterator[str]:
    with open(path, encoding="utf-8", newline="\n") as fh:
        for line in fh:
            yield line[:-1] if line.endswith("\n") else line


def census_lines(lines: Iterable[str], rules: RuleTable | None = None) -> CorpusCensus:
    rules = rules or default_rule_table()
    c = CorpusCensus()
    for line in lines:
        c.lines += 1
        tokens, errors = scan_line_partial(line)
        c.malformed += len(errors)
        c.tokens += _token_count(line, tokens)
        c.masks += len(tokens)
        for tok in tokens:
            c.by_tag[rules.classify(tok).value] += 1
    return c


def census(path: str | Path, rules: RuleTable | None = None) -> CorpusCensus:
    """Count masks per tag in a masked corpus file."""
    return census_lines(read_lines(path), rules)


@dataclass
class _Block:
    first_line: int
    first_note: int
    lines: list[str]
    # >0 when the block continues a note cut at MAX_NOTE_LINES
    part: int = 0


def _stream_id(note: int, part: int) -> int:
    return note | (part << 40)


def _blocks(lines: Iterable[str], block_lines: int) -> Iterator[_Block]:
    buf: list[str] = []
    first_line = note = first_note = part = 0
    for n, line in enumerate(lines):
        buf.append(line)
        if not line:
            note += 1
            if len(buf) >= block_lines:
                yield _Block(first_line, first_note, buf, part)
                buf, first_line, first_note, part = [], n + 1, note, 0
        elif len(buf) >= MAX_NOTE_LINES:
            # a note this long gets a fresh memo and stream per part
            yield _Block(first_line, first_note, buf, part)
            part = part + 1 if first_note == note else 1
            buf, first_line, first_note = [], n + 1, note
    if buf:
        yield _Block(first_line, first_note, buf, part)


class _Worker:
    def __init__(self, generator: Generator, rules: RuleTable, seed: int, strict: bool):
        self.generator = generator
        self.rules = rules
        self.seed = seed
        self.strict = strict

    def __call__(self, block: _Block):
        c = CorpusCensus()
        incidents: list[Incident] = []
        out: list[str] = []
        note = block.first_note
        rng = RandomStream(self.seed, _stream_id(note, block.part))
        memo: dict = {}
        for k, line in enumerate(block.lines):
            lineno = block.first_line + k
            out.append(self._line(line, lineno, rng, memo, c, incidents))
            if not line:
                note += 1
                rng = RandomStream(self.seed, note)
                memo = {}
        c.lines = len(block.lines)
        c.incidents = len(incidents)
        return out, c, incidents

    def _line(self, line, lineno, rng, memo, c, incidents) -> str:
        tokens, errors = scan_line_partial(line)
        for err in errors:
            if self.strict:
                raise CorpusError(f"line {lineno + 1}: {err}") from err
            c.malformed += 1
            incidents.append(Incident(lineno + 1, "malformed_mask", str(err), err.offset))
        c.tokens += _token_count(line, tokens)
        if not tokens:
            return line
        c.masks += len(tokens)
        parts: list[str] = []
        pos = 0
        for tok in tokens:
            parts.append(line[pos:tok.start])
            pos = tok.end
            tag = self.rules.classify(tok)
            prefix = "".join(parts)
            sentence = prefix + line[tok.start:]
            shifted = replace(tok, span=(len(prefix), len(prefix) + len(tok.raw)))
            g = self.generator.generate(GenerationContext(sentence, shifted, tag, memo), rng)
            parts.append(g.text)
            c.by_tag[tag.value] += 1
            c.by_source[g.source] += 1
            c.memo_hits += g.memo_hit
            if g.error is not None:
                incidents.append(Incident(lineno + 1, "fallback", g.error, tok.start, tag.value))
        parts.append(line[pos:])
        return "".join(parts)


_pool_worker: _Worker | None = None


def _init_pool(worker: _Worker) -> None:
    global _pool_worker
    _pool_worker = worker


def _run_pool_block(block: _Block):
    return _pool_worker(block)


def synthesize_lines(lines: Iterable[str], db: PseudoDatabase, seed: int,
                     rules: RuleTable | None = None, config: GeneratorConfig | None = None,
                     workers: int = 1, block_lines: int = DEFAULT_BLOCK_LINES,
                     generator: Generator | None = None):
    """Yield ``(pseudo_lines, census, incidents)`` per block, in input order."""
    rules = rules or default_rule_table()
    config = config or GeneratorConfig()
    generator = generator or Generator(db, config)
    worker = _Worker(generator, rules, seed, config.strict)
    blocks = _blocks(lines, block_lines)
    if workers <= 1:
        for block in blocks:
            yield worker(block)
        return
    ctx = get_context("fork" if sys.platform.startswith("linux") else "spawn")
    with ctx.Pool(workers, initializer=_init_pool, initargs=(worker,)) as pool:
        yield from pool.imap(_run_pool_block, blocks, chunksize=1)


def synthesize(masked: str | Path | Iterable[str], out: str | Path | IO[str],
               db: PseudoDatabase, seed: int, rules: RuleTable | None = None,
               config: GeneratorConfig | None = None, workers: int = 1,
               report: str | Path | IO[str] | None = None,
               block_lines: int = DEFAULT_BLOCK_LINES,
               generator: Generator | None = None) -> CorpusCensus:
    """Replace every mask in ``masked`` and write the pseudo corpus to ``out``.

    The census describes the input masks and how each was replaced.  Incidents
    (malformed masks, fallbacks after fill-mask failures) go to ``report`` as
    JSON lines, one per incident.
    """
    lines = read_lines(masked) if isinstance(masked, (str, Path)) else masked
    total = CorpusCensus()
    owned = []

    def _open(target):
        if isinstance(target, (str, Path)):
            fh = open(target, "w", encoding="utf-8", newline="\n")
            owned.append(fh)
            return fh
        return target

    fh = _open(out)
    rep = _open(report) if report is not None else None
    try:
        for out_lines, c, incidents in synthesize_lines(lines, db, seed, rules, config,
                                                        workers, block_lines, generator):
            for line in out_lines:
                fh.write(line + "\n")
            if rep is not None:
                for inc in incidents:
                    rep.write(json.dumps(inc.to_json()) + "\n")
            total.merge(c)
    finally:
        for f in owned:
            f.close()
    return total
