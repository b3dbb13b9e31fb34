"""Parsing of redaction mask tokens such as ``[**Last Name (STitle) 2601**]``.

A mask opens with ``[**`` and closes with the first following ``**]``.  The
inner text is either a bare date/number (``2151-7-16``, ``2113``) or a
descriptor with an optional parenthesized type hint and an optional trailing
entity id::

    [**Known lastname 1234**]      descriptor='Known lastname', entity_id=1234
    [**First Name8 (NamePattern2) 77**]
    [**Age over 90 **]             no entity id (trailing space before close)

Tags are assigned by an ordered table of regular expressions that can be
loaded from and written to a small TSV file (see :func:`load_rule_table`).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

OPEN = "[**"
CLOSE = "**]"

_BARE_RE = re.compile(r"\s*\d[\d\-/]*\s*")
# entity id must directly precede the closing delimiter
_ID_RE = re.compile(r"(?<=[\s)])\d+\Z")
_HINT_RE = re.compile(r"\(([^()]*)\)\s*\Z")


class TagKind(str, enum.Enum):
    FIRSTNAME = "FIRSTNAME"
    LASTNAME = "LASTNAME"
    DOCTORFIRSTNAME = "DOCTORFIRSTNAME"
    DOCTORLASTNAME = "DOCTORLASTNAME"
    HOSPITAL = "HOSPITAL"
    COMPANY = "COMPANY"
    UNIVERSITY = "UNIVERSITY"
    STATE = "STATE"
    COUNTRY = "COUNTRY"
    LOCATION = "LOCATION"
    DATE = "DATE"
    YEAR = "YEAR"
    AGE = "AGE"
    PHONE = "PHONE"
    PAGER = "PAGER"
    NUMERICID = "NUMERICID"
    EMAIL = "EMAIL"
    URL = "URL"
    HOLIDAY = "HOLIDAY"
    WARDNAME = "WARDNAME"
    NAME = "NAME"
    UNKNOWN = "UNKNOWN"

    def __str__(self) -> str:
        return self.value


class MaskSyntaxError(ValueError):
    """A malformed mask at ``offset`` in the scanned line.

    ``tokens`` holds the well-formed masks found before the error, so callers
    that choose to skip the bad mask can still process the rest.
    """

    def __init__(self, message: str, offset: int, tokens: Sequence["MaskToken"] = ()):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.tokens = list(tokens)


class UnterminatedMaskError(MaskSyntaxError):
    pass


class EmptyMaskError(MaskSyntaxError):
    pass


@dataclass(frozen=True)
class MaskToken:
    """One parsed mask; ``span`` is a half-open ``(start, end)`` into the line."""

    raw: str
    descriptor: str
    type_hint: str | None
    entity_id: int | None
    span: tuple[int, int]

    @property
    def start(self) -> int:
        return self.span[0]

    @property
    def end(self) -> int:
        return self.span[1]

    @property
    def inner(self) -> str:
        return self.raw[len(OPEN):-len(CLOSE)]

    @property
    def is_bare(self) -> bool:
        """True for bare date/number masks like ``[**2151-7-16**]``."""
        return not self.descriptor

    @property
    def rule_text(self) -> str:
        """The text tag rules are matched against."""
        if self.is_bare:
            return self.inner.strip()
        if self.type_hint is not None:
            return f"{self.descriptor} ({self.type_hint})"
        return self.descriptor


def parse_mask(raw: str, start: int = 0) -> MaskToken:
    """Parse the full surface of a single mask (delimiters included)."""
    if not (raw.startswith(OPEN) and raw.endswith(CLOSE)) or len(raw) < len(OPEN) + len(CLOSE):
        raise MaskSyntaxError("not a mask token", start)
    inner = raw[len(OPEN):-len(CLOSE)]
    span = (start, start + len(raw))
    if not inner.strip():
        raise EmptyMaskError("empty mask", start)
    if _BARE_RE.fullmatch(inner):
        return MaskToken(raw, "", None, None, span)
    rest = inner
    ent = hint = None
    m = _ID_RE.search(rest)
    if m:
        ent, rest = m.group(), rest[:m.start()]
    m = _HINT_RE.search(rest)
    if m:
        hint, rest = m.group(1), rest[:m.start()]
    desc = rest.strip()
    if not desc:
        # e.g. "(3) 12": keep everything as the descriptor
        desc, hint, ent = inner.strip(), None, None
    return MaskToken(raw, desc, hint.strip() if hint is not None else None,
                     int(ent) if ent is not None else None, span)


def _scan(line: str, skip_errors: bool):
    tokens: list[MaskToken] = []
    errors: list[MaskSyntaxError] = []
    pos = 0
    while True:
        start = line.find(OPEN, pos)
        if start < 0:
            break
        close = line.find(CLOSE, start + len(OPEN))
        if close < 0:
            err = UnterminatedMaskError("unterminated mask", start, tokens)
            if not skip_errors:
                raise err
            errors.append(err)
            # nothing to the right can close either
            break
        end = close + len(CLOSE)
        try:
            tokens.append(parse_mask(line[start:end], start))
        except MaskSyntaxError as err:
            err.tokens = list(tokens)
            if not skip_errors:
                raise
            errors.append(err)
        pos = end
    return tokens, errors


def scan_line(line: str) -> list[MaskToken]:
    """Return every mask in ``line`` left to right.

    Raises :class:`MaskSyntaxError` (with the offending offset) on an
    unterminated or empty mask.
    """
    return _scan(line, skip_errors=False)[0]


def scan_line_partial(line: str) -> tuple[list[MaskToken], list[MaskSyntaxError]]:
    """Like :func:`scan_line` but collects malformed masks instead of raising."""
    return _scan(line, skip_errors=True)


def byte_span(line: str, token: MaskToken, encoding: str = "utf-8") -> tuple[int, int]:
    """``token.span`` (code point offsets) converted to byte offsets in ``line``."""
    start = len(line[:token.start].encode(encoding))
    return start, start + len(token.raw.encode(encoding))


def splice(line: str, tokens: Iterable[MaskToken], replacements: Iterable[str]) -> str:
    """Replace each token's span in ``line`` with the matching replacement."""
    parts = []
    pos = 0
    for tok, rep in zip(tokens, replacements):
        parts.append(line[pos:tok.start])
        parts.append(rep)
        pos = tok.end
    parts.append(line[pos:])
    return "".join(parts)


@dataclass(frozen=True)
class TagRule:
    priority: int
    pattern: str
    tag: TagKind

    @property
    def regex(self) -> re.Pattern:
        return _compile(self.pattern)


@lru_cache(maxsize=None)
def _compile(pattern: str) -> re.Pattern:
    return re.compile(pattern, re.IGNORECASE)


class RuleTable:
    """Immutable, priority-ordered tag rules; the last rule must catch all."""

    def __init__(self, rules: Iterable[TagRule]):
        rules = tuple(rules)
        if not rules:
            raise ValueError("rule table is empty")
        for prev, cur in zip(rules, rules[1:]):
            if cur.priority <= prev.priority:
                raise ValueError(
                    f"rule priorities must be strictly increasing: "
                    f"{prev.priority} then {cur.priority}")
        last = rules[-1]
        if last.tag is not TagKind.UNKNOWN or not (
                last.regex.search("") and last.regex.search("any text")):
            raise ValueError("final rule must match anything and yield UNKNOWN")
        self.rules = rules
        self._compiled = [(r.regex, r.tag) for r in rules]
        self._cache: dict[str, TagKind] = {}

    def __iter__(self):
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def classify_text(self, text: str) -> TagKind:
        tag = self._cache.get(text)
        if tag is None:
            for regex, tag in self._compiled:
                if regex.search(text):
                    break
            if len(self._cache) < 100_000:
                self._cache[text] = tag
        return tag

    def classify(self, token: MaskToken) -> TagKind:
        return self.classify_text(token.rule_text)


def classify(token: MaskToken, rules: RuleTable | None = None) -> TagKind:
    """Tag of the first rule matching ``token``."""
    if rules is None:
        rules = default_rule_table()
    return rules.classify(token)


RULES_HEADER = "# priority\tregex\ttag\n"


def parse_rule_table(text: str, source: str = "<string>") -> RuleTable:
    rules = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ValueError(f"{source}:{lineno}: expected 3 tab-separated fields")
        prio, pattern, tag = fields
        try:
            rule = TagRule(int(prio), pattern, TagKind(tag.strip()))
            rule.regex
        except (ValueError, re.error) as exc:
            raise ValueError(f"{source}:{lineno}: {exc}") from None
        rules.append(rule)
    try:
        return RuleTable(rules)
    except ValueError as exc:
        raise ValueError(f"{source}: {exc}") from None


def dump_rule_table(table: RuleTable) -> str:
    return RULES_HEADER + "".join(
        f"{r.priority}\t{r.pattern}\t{r.tag.value}\n" for r in table)


def load_rule_table(path: str | Path) -> RuleTable:
    path = Path(path)
    return parse_rule_table(path.read_text(encoding="utf-8"), str(path))


DEFAULT_RULES_RESOURCE = "default_rules.tsv"


@lru_cache(maxsize=1)
def default_rule_table() -> RuleTable:
    text = resources.files("pseudophi.data").joinpath(DEFAULT_RULES_RESOURCE).read_text(
        encoding="utf-8")
    return parse_rule_table(text, DEFAULT_RULES_RESOURCE)
