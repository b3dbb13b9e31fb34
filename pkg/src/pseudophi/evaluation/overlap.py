"""How many corpus surfaces also occur in a gazetteer list."""

from __future__ import annotations

import re
from typing import Iterable, NamedTuple

DEFAULT_STRIP_WORDS = ("hospital", "clinic")


class Overlap(NamedTuple):
    shared: int
    fraction: float
    corpus_size: int


def normalizer(strip_words: Iterable[str] = ()):
    """Case- and spacing-insensitive key with whole ``strip_words`` removed."""
    words = [w.lower() for w in strip_words]
    pattern = re.compile(r"\b(?:%s)\b" % "|".join(map(re.escape, words))) if words else None

    def norm(s: str) -> str:
        s = s.lower()
        if pattern is not None:
            s = pattern.sub(" ", s)
        return " ".join(s.split())

    return norm


def gazetteer_overlap(corpus: Iterable[str], gazetteer: Iterable[str],
                      strip_words: Iterable[str] | None = None) -> Overlap:
    """Case-insensitive exact matches between two sets of surfaces.

    Both sides are normalized (and deduplicated) before matching, so
    stripping words can merge corpus names and shrink the denominator.
    """
    norm = normalizer(strip_words or ())
    corpus_set = {n for n in map(norm, corpus) if n}
    gaz_set = {n for n in map(norm, gazetteer) if n}
    if not corpus_set or not gaz_set:
        raise ValueError("both surface sets must be non-empty")
    shared = len(corpus_set & gaz_set)
    return Overlap(shared, shared / len(corpus_set), len(corpus_set))
