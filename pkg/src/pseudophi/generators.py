"""Pseudo text generators, one per tag.

Names and organisations are drawn from the gazetteer lists by popularity;
dates, ages, phone numbers and identifiers are randomized; ambiguous tags
(``NAME``, ``UNKNOWN`` and free-form locations) ask a fill-mask service for a
token that fits the whole sentence.
"""

from __future__ import annotations

import calendar
import datetime
import logging
import re
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .fillmask import (MASK_MARKER, FillMaskClient, FillMaskError, FillMaskProtocolError,
                       FillMaskRequest)
from .masks import CLOSE, OPEN, MaskToken, TagKind
from .pseudodb import PseudoDatabase
from .rng import RandomStream

logger = logging.getLogger(__name__)

GAZETTEER = "gazetteer"
RANDOM = "random"
FILL_MASK = "fill_mask"
FALLBACK = "fallback"
SOURCES = (GAZETTEER, RANDOM, FILL_MASK, FALLBACK)

DEFAULT_FALLBACKS = {
    TagKind.FIRSTNAME: "John",
    TagKind.LASTNAME: "Smith",
    TagKind.DOCTORFIRSTNAME: "John",
    TagKind.DOCTORLASTNAME: "Smith",
    TagKind.HOSPITAL: "General Hospital",
    TagKind.COMPANY: "Acme",
    TagKind.UNIVERSITY: "State University",
    TagKind.STATE: "Massachusetts",
    TagKind.COUNTRY: "Canada",
    TagKind.LOCATION: "Boston",
    TagKind.DATE: "1/1/2010",
    TagKind.YEAR: "2010",
    TagKind.AGE: "50",
    TagKind.PHONE: "617-555-0100",
    TagKind.PAGER: "617-555-0100",
    TagKind.NUMERICID: "1234567",
    TagKind.EMAIL: "jsmith@example.com",
    TagKind.URL: "www.example.com",
    TagKind.HOLIDAY: "Thanksgiving",
    TagKind.WARDNAME: "Ward 4",
    TagKind.NAME: "Smith",
    TagKind.UNKNOWN: "unknown",
}

COUNTRIES = ("Canada", "Mexico", "Brazil", "Ireland", "Italy", "Portugal", "Greece", "China",
             "India", "Vietnam", "Haiti", "Russia", "Germany", "England", "Jamaica")
HOLIDAYS = ("Thanksgiving", "Christmas", "New Year's Day", "Easter", "Memorial Day",
            "Labor Day", "Independence Day", "Halloween", "Valentine's Day")
EMAIL_DOMAINS = ("gmail.com", "yahoo.com", "hotmail.com", "aol.com", "comcast.net")
STREET_SUFFIXES = ("Street", "Avenue", "Road", "Lane", "Drive", "Court", "Way")
MONTHS = calendar.month_name[1:]

DATE_STYLES = ("full", "year-only", "month-day", "month-year", "month")
DEFAULT_AGE_RANGE = (1, 90)
OVER_90_AGE_RANGE = (91, 105)
DEFAULT_DATE_WINDOW = (2000, 2020)
DEFAULT_ID_LENGTH = 7

_FEMALE_RE = re.compile(r"\bfemale\b", re.I)
_MALE_RE = re.compile(r"\bmale\b", re.I)
_OVER_90_RE = re.compile(r"over\s*90", re.I)
_ADDRESS_RE = re.compile(r"address|street|po\s*box", re.I)
_DIRTY_RE = re.compile(r"[\t\r\n]+")


class GenerationError(RuntimeError):
    """Generation failed for the mask ``tag`` at ``span``."""

    def __init__(self, message: str, tag: TagKind, span: tuple[int, int]):
        super().__init__(f"{tag.value} at {span[0]}-{span[1]}: {message}")
        self.tag = tag
        self.span = span


@dataclass
class GeneratorConfig:
    memoize: bool = True
    age_range: tuple[int, int] = DEFAULT_AGE_RANGE
    date_window: tuple[int, int] = DEFAULT_DATE_WINDOW
    fill_mask_endpoint: str | None = None
    fill_mask_timeout: float = 10.0
    fill_mask_max_in_flight: int = 4
    # extra candidates let an unusable top answer fall through to the next
    fill_mask_top_k: int = 5
    retries: int = 3
    retry_delay: float = 0.0
    strict: bool = False
    fallbacks: dict = field(default_factory=lambda: dict(DEFAULT_FALLBACKS))
    # hook for richer renderings ("40's", "49y7.7m"); default is the bare integer
    age_renderer: Callable[[int, RandomStream], str] | None = None


@dataclass
class GenerationContext:
    """A mask in its sentence; ``memo`` is shared by all masks of one note."""

    sentence: str
    token: MaskToken
    tag: TagKind
    memo: dict = field(default_factory=dict)

    def __post_init__(self):
        s, e = self.token.span
        if not (0 <= s < e <= len(self.sentence)):
            raise ValueError(f"token span {self.token.span} outside sentence")

    def masked_text(self, marker: str = MASK_MARKER) -> str:
        s, e = self.token.span
        return self.sentence[:s] + marker + self.sentence[e:]


class Generated(NamedTuple):
    text: str
    source: str
    # set when a fallback replaced a failed generation
    error: str | None = None
    memo_hit: bool = False


def gen_date(style: str, window: tuple[int, int], rng: RandomStream) -> str:
    """A calendar day drawn uniformly from ``window`` (inclusive years)."""
    lo, hi = window
    if hi < lo:
        raise ValueError(f"empty date window {window}")
    if style not in DATE_STYLES:
        raise ValueError(f"unknown date style {style!r}; expected one of {DATE_STYLES}")
    first = datetime.date(lo, 1, 1)
    days = (datetime.date(hi, 12, 31) - first).days + 1
    d = first + datetime.timedelta(days=rng.randbelow(days))
    if style == "full":
        return f"{d.month}/{d.day}/{d.year}"
    if style == "year-only":
        return str(d.year)
    if style == "month-day":
        return f"{d.month}/{d.day}"
    if style == "month-year":
        return f"{d.month}/{d.year}"
    return MONTHS[d.month - 1]


def gen_numeric_id(length: int, rng: RandomStream) -> str:
    if length < 1:
        raise ValueError("id length must be at least 1")
    return rng.digits(length)


def gen_phone(rng: RandomStream) -> str:
    # NANP area and exchange codes never start with 0 or 1
    return (f"{rng.randint(2, 9)}{rng.digits(2)}-{rng.randint(2, 9)}{rng.digits(2)}"
            f"-{rng.digits(4)}")


def gen_age(rng: RandomStream, age_range: tuple[int, int] = DEFAULT_AGE_RANGE) -> str:
    lo, hi = age_range
    if not 0 <= lo <= hi <= 120:
        raise ValueError(f"age range {age_range} not within [0, 120]")
    return str(rng.randint(lo, hi))


def date_style(token: MaskToken, tag: TagKind) -> str:
    """Pick the rendering style that mirrors the masked date's shape."""
    if tag is TagKind.YEAR:
        return "year-only"
    if token.is_bare:
        parts = re.split(r"[-/]", token.inner.strip())
        if len(parts) == 1:
            return "year-only"
        if len(parts) == 2:
            return "month-year" if len(parts[1]) == 4 else "month-day"
        return "full"
    d = token.rule_text.lower()
    if "month" in d and "(only)" in d:
        return "month"
    if "month/day/year" in d or "range" in d:
        return "full"
    if "month/day" in d or "month day" in d or "day month" in d:
        return "month-day"
    if "month/year" in d or "year/month" in d:
        return "month-year"
    return "full"


def token_gender(token: MaskToken) -> str | None:
    text = token.rule_text
    if _FEMALE_RE.search(text):
        return "F"
    if _MALE_RE.search(text):
        return "M"
    return None


def _clean(text: str) -> str:
    text = _DIRTY_RE.sub(" ", text).replace(OPEN, "").replace(CLOSE, "")
    return text.strip()


class Generator:
    """Dispatches masks to the generator registered for their tag."""

    def __init__(self, db: PseudoDatabase, config: GeneratorConfig | None = None,
                 client: FillMaskClient | None = None):
        self.db = db
        self.config = config or GeneratorConfig()
        if client is None and self.config.fill_mask_endpoint:
            client = FillMaskClient(self.config.fill_mask_endpoint,
                                    self.config.fill_mask_timeout,
                                    self.config.fill_mask_max_in_flight)
        self.client = client

    # gazetteer backed ------------------------------------------------------

    def _list(self, name: str, rng: RandomStream, where=None) -> str:
        return self.db.sample(name, rng, where).surface

    def first_name(self, ctx: GenerationContext, rng: RandomStream) -> tuple[str, str]:
        gender = token_gender(ctx.token) or ("F", "M")[rng.randbelow(2)]
        try:
            return self._list("first_names", rng, {"gender": gender}), GAZETTEER
        except LookupError:
            return self._list("first_names", rng), GAZETTEER

    def last_name(self, ctx, rng):
        return self._list("last_names", rng), GAZETTEER

    def hospital(self, ctx, rng):
        return self._list("hospitals", rng), GAZETTEER

    def company(self, ctx, rng):
        return self._list("companies", rng), GAZETTEER

    def university(self, ctx, rng):
        return self._list("universities", rng), GAZETTEER

    def state(self, ctx, rng):
        return self._list("states", rng), GAZETTEER

    def country(self, ctx, rng):
        if "countries" in self.db:
            return self._list("countries", rng), GAZETTEER
        return rng.choice(COUNTRIES), RANDOM

    # randomized ------------------------------------------------------------

    def date(self, ctx, rng):
        return gen_date(date_style(ctx.token, ctx.tag), self.config.date_window, rng), RANDOM

    def age(self, ctx, rng):
        if _OVER_90_RE.search(ctx.token.rule_text):
            lo, hi = OVER_90_AGE_RANGE
        else:
            lo, hi = self.config.age_range
        if self.config.age_renderer is not None:
            return self.config.age_renderer(rng.randint(lo, hi), rng), RANDOM
        return gen_age(rng, (lo, hi)), RANDOM

    def phone(self, ctx, rng):
        return gen_phone(rng), RANDOM

    def numeric_id(self, ctx, rng):
        ent = ctx.token.entity_id
        n = len(str(ent)) if ent is not None else DEFAULT_ID_LENGTH
        return gen_numeric_id(n, rng), RANDOM

    def email(self, ctx, rng):
        first = self._list("first_names", rng)
        last = self._list("last_names", rng)
        user = re.sub(r"[^a-z0-9]", "", (first[0] + last).lower())
        return f"{user}@{rng.choice(EMAIL_DOMAINS)}", RANDOM

    def url(self, ctx, rng):
        name = re.sub(r"[^a-z0-9]", "", self._list("companies", rng).lower()) or "example"
        return f"www.{name}.com", RANDOM

    def holiday(self, ctx, rng):
        return rng.choice(HOLIDAYS), RANDOM

    def ward(self, ctx, rng):
        return f"{rng.choice(('Ward', 'Unit', 'Floor'))} {rng.randint(1, 12)}{'ABCD'[rng.randbelow(4)]}", RANDOM

    def location(self, ctx, rng):
        if _ADDRESS_RE.search(ctx.token.rule_text):
            street = self._list("last_names", rng)
            return f"{rng.randint(1, 999)} {street} {rng.choice(STREET_SUFFIXES)}", RANDOM
        return self.fill(ctx, rng)

    # model backed ----------------------------------------------------------

    def fill(self, ctx: GenerationContext, rng: RandomStream) -> tuple[str, str]:
        if self.client is None:
            raise FillMaskError("no fill-mask endpoint configured")
        req = FillMaskRequest(ctx.masked_text(), top_k=self.config.fill_mask_top_k)
        last_exc: Exception | None = None
        for attempt in range(self.config.retries + 1):
            if attempt and self.config.retry_delay:
                time.sleep(self.config.retry_delay * attempt)
            try:
                resp = self.client.fill(req)
                break
            except FillMaskError as exc:
                last_exc = exc
        else:
            raise last_exc
        for cand, _ in resp.candidates:
            cand = _clean(cand.lstrip("Ġ▁"))
            if cand:
                return cand, FILL_MASK
        raise FillMaskProtocolError("no usable candidate in fill-mask response")

    def generate(self, ctx: GenerationContext, rng: RandomStream) -> Generated:
        key = None
        if self.config.memoize and ctx.token.entity_id is not None:
            key = (ctx.tag, ctx.token.entity_id)
            hit = ctx.memo.get(key)
            if hit is not None:
                return Generated(hit[0], hit[1], None, True)
        error = None
        try:
            text, source = DISPATCH[ctx.tag](self, ctx, rng)
            text = _clean(text)
            if not text:
                raise FillMaskProtocolError("generator produced empty text")
        except (FillMaskError, ValueError, LookupError) as exc:
            if self.config.strict:
                raise GenerationError(str(exc), ctx.tag, ctx.token.span) from exc
            text, source, error = self.config.fallbacks[ctx.tag], FALLBACK, str(exc)
            logger.debug("fallback for %s at %s: %s", ctx.tag, ctx.token.span, exc)
        if key is not None:
            ctx.memo[key] = (text, source)
        return Generated(text, source, error)


DISPATCH: dict[TagKind, Callable[[Generator, GenerationContext, RandomStream], tuple[str, str]]] = {
    TagKind.FIRSTNAME: Generator.first_name,
    TagKind.DOCTORFIRSTNAME: Generator.first_name,
    TagKind.LASTNAME: Generator.last_name,
    TagKind.DOCTORLASTNAME: Generator.last_name,
    TagKind.HOSPITAL: Generator.hospital,
    TagKind.COMPANY: Generator.company,
    TagKind.UNIVERSITY: Generator.university,
    TagKind.STATE: Generator.state,
    TagKind.COUNTRY: Generator.country,
    TagKind.LOCATION: Generator.location,
    TagKind.DATE: Generator.date,
    TagKind.YEAR: Generator.date,
    TagKind.AGE: Generator.age,
    TagKind.PHONE: Generator.phone,
    TagKind.PAGER: Generator.phone,
    TagKind.NUMERICID: Generator.numeric_id,
    TagKind.EMAIL: Generator.email,
    TagKind.URL: Generator.url,
    TagKind.HOLIDAY: Generator.holiday,
    TagKind.WARDNAME: Generator.ward,
    TagKind.NAME: Generator.fill,
    TagKind.UNKNOWN: Generator.fill,
}


def generate(ctx: GenerationContext, db: PseudoDatabase, rng: RandomStream,
             config: GeneratorConfig | None = None, client: FillMaskClient | None = None) -> str:
    """Pseudo text for one mask; see :meth:`Generator.generate`."""
    return Generator(db, config, client).generate(ctx, rng).text
