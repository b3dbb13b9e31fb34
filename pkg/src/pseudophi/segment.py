"""Rule-based sentence splitting for clinical notes.

Physical lines are first grouped into units: enumerated or itemized list
entries (a line starting with ``1.``, ``2)``, ``-``, ``*`` or ``•``) absorb
their wrapped continuation lines, and other lines are joined into paragraphs
that end at a blank line.  Paragraphs are then split into sentences at
``.``, ``!`` or ``?`` unless the period closes a known abbreviation or an
initial, or falls inside a mask.  List items are kept whole, one per line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .masks import CLOSE, OPEN, scan_line_partial

ITEM_RE = re.compile(r"(?:\d{1,3}[.)]|[-*•])\s")
_WS_RE = re.compile(r"\s+")
_BOUNDARY_RE = re.compile(r"[.!?]+[\"')\]]*(?=\s+\S)")
_SENT_START_RE = re.compile(r"\s+([A-Z0-9\[(\"'])")

ABBREVIATIONS = frozenset("""
    dr mr mrs ms prof pt pts sr jr st mt ft vs etc eg e.g ie i.e approx appt apt dept
    hosp inc co corp no nos fig vol ref est max min mins hr hrs yr yrs y.o yo wk wks mo mos
    sec q q.d qd b.i.d bid t.i.d tid q.i.d qid p.o po p.r.n prn h.s hs a.m p.m
    hx dx rx tx sx fx sig disp tab tabs cap caps inj susp soln
    jan feb mar apr jun jul aug sep sept oct nov dec
""".split())

# units longer than this stop waiting for a mask to close
MAX_CARRY_LINES = 10


@dataclass
class SegmenterConfig:
    abbreviations: frozenset = field(default_factory=lambda: ABBREVIATIONS)
    reconstruct_lists: bool = True
    split_sentences: bool = True


def _has_open_mask(text: str) -> bool:
    i = text.rfind(OPEN)
    return i >= 0 and text.find(CLOSE, i + len(OPEN)) < 0


def units(text: str, config: SegmenterConfig | None = None) -> Iterator[tuple[str, bool]]:
    """Yield ``(unit_text, is_list_item)`` with whitespace collapsed."""
    config = config or SegmenterConfig()
    current: list[str] = []
    is_item = False
    carry = ""  # text from an unclosed mask opening onward
    carried = 0

    def flush():
        nonlocal carry, carried
        joined = _WS_RE.sub(" ", " ".join(current)).strip()
        current.clear()
        carry, carried = "", 0
        return joined

    for raw in text.splitlines():
        s = raw.strip()
        pending = bool(carry) and carried < MAX_CARRY_LINES
        if not s:
            if current and not pending:
                yield flush(), is_item
                is_item = False
            continue
        if config.reconstruct_lists and ITEM_RE.match(s) and not pending:
            if current:
                yield flush(), is_item
            is_item = True
        current.append(s)
        combined = f"{carry} {s}" if carry else s
        if _has_open_mask(combined):
            carry = combined[combined.rfind(OPEN):]
            carried += 1
        else:
            carry, carried = "", 0
    if current:
        out = flush()
        if out:
            yield out, is_item


def split_sentences(text: str, abbreviations: frozenset = ABBREVIATIONS) -> list[str]:
    """Split one whitespace-normalized paragraph into sentences."""
    masks = scan_line_partial(text)[0] if OPEN in text else ()
    out = []
    start = 0
    for m in _BOUNDARY_RE.finditer(text):
        end = m.end()
        if masks and any(t.start <= m.start() < t.end for t in masks):
            continue
        nxt = _SENT_START_RE.match(text, end)
        if nxt is None:
            continue
        word_start = max(start, text.rfind(" ", start, m.start()) + 1)
        word = text[word_start:m.start()].lstrip("([\"'").lower()
        if word in abbreviations or (len(word) == 1 and word.isalpha()):
            continue
        if word_start == start and word.isdigit() and text[m.start()] in ".)":
            continue
        sent = text[start:end].strip()
        if sent:
            out.append(sent)
        start = nxt.start(1)
    tail = text[start:].strip()
    if tail:
        out.append(tail)
    return out


def segment(text: str, config: SegmenterConfig | None = None) -> list[str]:
    """One output line per sentence or list item."""
    config = config or SegmenterConfig()
    lines = []
    for unit, is_item in units(text, config):
        if is_item or not config.split_sentences:
            lines.append(unit)
        else:
            lines.extend(split_sentences(unit, config.abbreviations))
    return lines


def segment_all(texts: Iterable[str], config: SegmenterConfig | None = None) -> Iterator[list[str]]:
    for text in texts:
        yield segment(text, config)
