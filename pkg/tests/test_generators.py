import calendar
import datetime
import re
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from pseudophi.fillmask import (FillMaskClient, FillMaskProtocolError, FillMaskRequest,
                                FillMaskResponse, FillMaskTransportError, StubFillMaskServer,
                                fill_mask)
from pseudophi.generators import (DATE_STYLES, DEFAULT_FALLBACKS, DISPATCH, FALLBACK, FILL_MASK,
                                  GAZETTEER, GenerationContext, GenerationError, Generator,
                                  GeneratorConfig, date_style, gen_age, gen_date, gen_numeric_id,
                                  gen_phone, generate)
from pseudophi.masks import TagKind, classify, scan_line
from pseudophi.rng import RandomStream

from oracles import dead_endpoint


def ctx_for(line, memo=None, i=0):
    tok = scan_line(line)[i]
    return GenerationContext(line, tok, classify(tok), {} if memo is None else memo)


# --- value generators ---

def test_date_singleton_window():
    assert gen_date("year-only", (2000, 2000), RandomStream(1)) == "2000"


@given(st.integers(0, 2**32), st.sampled_from(DATE_STYLES))
def test_dates_are_calendar_valid(seed, style):
    text = gen_date(style, (1999, 2001), RandomStream(seed))
    if style == "full":
        m, d, y = map(int, re.fullmatch(r"(\d{1,2})/(\d{1,2})/(\d{4})", text).groups())
        datetime.date(y, m, d)
    elif style == "month-day":
        m, d = map(int, text.split("/"))
        assert 1 <= d <= calendar.monthrange(2000, m)[1]


def test_date_uniform_over_days():
    # 2000 is a leap year: 366 of 731 days
    rng = RandomStream(11)
    n = 100_000
    years = Counter(gen_date("year-only", (2000, 2001), rng) for _ in range(n))
    expected = [n * 366 / 731, n * 365 / 731]
    assert sps.chisquare([years["2000"], years["2001"]], expected).pvalue > 0.01


def test_date_errors():
    with pytest.raises(ValueError):
        gen_date("full", (2001, 2000), RandomStream(0))
    with pytest.raises(ValueError):
        gen_date("weekday", (2000, 2000), RandomStream(0))


@given(st.integers(1, 30), st.integers(0, 2**32))
def test_numeric_id(length, seed):
    s = gen_numeric_id(length, RandomStream(seed))
    assert len(s) == length and s.isdigit()


@given(st.integers(0, 2**32))
def test_phone_format(seed):
    p = gen_phone(RandomStream(seed))
    assert len(p) == 12 and re.fullmatch(r"[2-9]\d\d-[2-9]\d\d-\d{4}", p)


@given(st.integers(0, 2**32))
def test_age_is_bare_integer(seed):
    a = gen_age(RandomStream(seed))
    assert a.isdigit() and 1 <= int(a) <= 90


def test_age_range_checked():
    with pytest.raises(ValueError):
        gen_age(RandomStream(0), (10, 130))


@pytest.mark.parametrize("inner, style", [
    ("2151-7-16", "full"), ("7-16", "month-day"), ("2113", "year-only"),
    ("1-/2113", "full"), ("3/2113", "month-year"), ("Month (only) 4", "month"),
    ("Month/Day 5", "month-day"), ("Year (4 digits) 6", "year-only"),
])
def test_date_style_mirrors_mask(inner, style):
    tok = scan_line(f"[**{inner}**]")[0]
    assert date_style(tok, classify(tok)) == style


# --- dispatch ---

def test_dispatch_is_total():
    assert set(DISPATCH) == set(TagKind)
    assert set(DEFAULT_FALLBACKS) == set(TagKind)


SAMPLE_MASKS = {
    TagKind.FIRSTNAME: "First Name (Titles) 1", TagKind.LASTNAME: "Known lastname 2",
    TagKind.DOCTORFIRSTNAME: "Doctor First Name 3", TagKind.DOCTORLASTNAME: "Last Name (STitle) 4",
    TagKind.HOSPITAL: "Hospital 5", TagKind.COMPANY: "Company 6", TagKind.UNIVERSITY: "University/College 7",
    TagKind.STATE: "State 8", TagKind.COUNTRY: "Country 9", TagKind.LOCATION: "Street Address(1) 10",
    TagKind.DATE: "2151-7-16", TagKind.YEAR: "2113", TagKind.AGE: "Age over 90 ",
    TagKind.PHONE: "Telephone/Fax (1) 11", TagKind.PAGER: "Pager number 12",
    TagKind.NUMERICID: "Medical Record Number 1234", TagKind.EMAIL: "E-mail address 13",
    TagKind.URL: "URL 14", TagKind.HOLIDAY: "Holiday 15", TagKind.WARDNAME: "Wardname 16",
    TagKind.NAME: "Name (NI) 17", TagKind.UNKNOWN: "Attending Info 18",
}


def test_every_tag_generates_clean_text(sample_db, stub):
    assert set(SAMPLE_MASKS) == set(TagKind)
    gen = Generator(sample_db, GeneratorConfig(fill_mask_endpoint=stub.url))
    for tag, inner in SAMPLE_MASKS.items():
        ctx = ctx_for(f"seen by [**{inner}**] today")
        assert ctx.tag is tag
        for seed in range(20):
            g = gen.generate(ctx, RandomStream(seed))
            assert g.text and g.source != FALLBACK, (tag, g)
            assert not re.search(r"[\t\n\r]|\[\*\*|\*\*\]", g.text)


def test_specific_generator_shapes(sample_db):
    gen = Generator(sample_db)
    rng = RandomStream(5)
    last = {e.surface for e in sample_db["last_names"]}
    g = gen.generate(ctx_for("Dr. [**Last Name (STitle) 4**] Pediatrician"), rng)
    assert g.text in last and g.source == GAZETTEER
    assert len(gen.generate(ctx_for("MRN [**Medical Record Number 1234**]"), rng).text) == 4
    assert len(gen.generate(ctx_for("MRN [**Numeric Identifier**]"), rng).text) == 7
    ages = {int(gen.generate(ctx_for("[**Age over 90 **] yo"), RandomStream(s)).text) for s in range(50)}
    assert min(ages) >= 91


def test_first_name_gender(sample_db):
    gen = Generator(sample_db)
    female = {e.surface for e in sample_db["first_names"] if e.attrs.get("gender") == "F"}
    male = {e.surface for e in sample_db["first_names"] if e.attrs.get("gender") == "M"}
    for seed in range(200):
        assert gen.generate(ctx_for("[**Female First Name (un) 1**]"), RandomStream(seed)).text in female
        assert gen.generate(ctx_for("[**Male First Name (un) 1**]"), RandomStream(seed)).text in male
    # no hint: gender chosen at random, both appear
    seen = {gen.generate(ctx_for("[**Known firstname 1**]"), RandomStream(s)).text for s in range(200)}
    assert seen & female and seen & male


def test_memoization_within_note(sample_db):
    gen = Generator(sample_db)
    memo = {}
    rng = RandomStream(1)
    a = gen.generate(ctx_for("[**Known lastname 2601**] x", memo), rng)
    b = gen.generate(ctx_for("y [**Known lastname 2601**]", memo), rng)
    assert a.text == b.text and b.memo_hit
    # no entity id: never memoized
    c = [gen.generate(ctx_for("[**Hospital1**]", memo), rng).text for _ in range(30)]
    assert len(set(c)) > 1 and not any(k[1] is None for k in memo)


def test_memoization_can_be_disabled(sample_db):
    gen = Generator(sample_db, GeneratorConfig(memoize=False))
    memo = {}
    rng = RandomStream(1)
    outs = {gen.generate(ctx_for("[**Known lastname 2601**]", memo), rng).text for _ in range(30)}
    assert len(outs) > 1 and memo == {}


def test_generate_is_deterministic(sample_db, stub):
    cfg = GeneratorConfig(fill_mask_endpoint=stub.url)
    line = "Dr. [**Name (NI) 1**] saw [**Known firstname 2**] on [**2151-7-16**]"
    def run():
        return [generate(ctx_for(line, i=i), sample_db, RandomStream(42, 0), cfg) for i in range(3)]
    assert run() == run()


# --- fill-mask protocol ---

def test_stub_top_candidate_for_name_and_unknown(sample_db, stub):
    gen = Generator(sample_db, GeneratorConfig(fill_mask_endpoint=stub.url))
    for inner in ("Name (NI) 1", "Attending Info 2"):
        g = gen.generate(ctx_for(f"Delivering OB : Dr. [**{inner}**] Pediatrician"), RandomStream(0))
        assert (g.text, g.source) == ("Jones", FILL_MASK)
    req = stub.requests_seen[-1]
    assert req.text == "Delivering OB : Dr. [MASK] Pediatrician"


def test_client_top_k_and_order(stub):
    resp = FillMaskClient(stub.url).fill(FillMaskRequest("a [MASK] b", top_k=3))
    assert len(resp.candidates) == 3
    scores = [s for _, s in resp.candidates]
    assert scores == sorted(scores, reverse=True)
    assert fill_mask(FillMaskRequest("x [MASK]"), stub.url).top == "Jones"


def test_client_health(stub):
    assert FillMaskClient(stub.url).healthy()
    assert not FillMaskClient(dead_endpoint(), timeout=0.5).healthy()


def test_empty_backend_answer_is_protocol_error():
    with StubFillMaskServer(candidates=[]) as empty:
        with pytest.raises(FillMaskProtocolError):
            FillMaskClient(empty.url).fill(FillMaskRequest("x [MASK]"))


def test_response_validation():
    with pytest.raises(FillMaskProtocolError):
        FillMaskResponse.from_json({"candidates": [{"token": "a", "score": 0.1},
                                                   {"token": "b", "score": 0.9}]})
    with pytest.raises(FillMaskProtocolError):
        FillMaskResponse.from_json({"nope": []})


def test_request_needs_exactly_one_marker():
    with pytest.raises(ValueError):
        FillMaskRequest("no marker")
    with pytest.raises(ValueError):
        FillMaskRequest("[MASK] [MASK]")
    with pytest.raises(ValueError):
        FillMaskRequest("[MASK]", top_k=0)


def test_backend_down_falls_back(sample_db):
    gen = Generator(sample_db, GeneratorConfig(fill_mask_endpoint=dead_endpoint(), fill_mask_timeout=0.5))
    g = gen.generate(ctx_for("[**Name (NI) 1**]"), RandomStream(0))
    assert (g.text, g.source) == (DEFAULT_FALLBACKS[TagKind.NAME], FALLBACK) and g.error


def test_backend_down_strict_raises(sample_db):
    gen = Generator(sample_db, GeneratorConfig(fill_mask_endpoint=dead_endpoint(), strict=True,
                                               fill_mask_timeout=0.5))
    with pytest.raises(GenerationError) as ei:
        gen.generate(ctx_for("ab [**Name (NI) 1**]"), RandomStream(0))
    assert ei.value.tag is TagKind.NAME and ei.value.span == (3, 20)


def test_retries_then_success(sample_db):
    calls = []

    def flaky(text, k):
        calls.append(text)
        return [] if len(calls) < 3 else [("Kim", 1.0)]

    with StubFillMaskServer(responder=flaky) as srv:
        gen = Generator(sample_db, GeneratorConfig(fill_mask_endpoint=srv.url, retries=3))
        assert gen.generate(ctx_for("[**Name 1**]"), RandomStream(0)).text == "Kim"
    assert len(calls) == 3


def test_unusable_candidates_are_skipped(sample_db):
    with StubFillMaskServer(candidates=[("\t", 0.9), ("Ġ[**Lee**]", 0.5)]) as srv:
        gen = Generator(sample_db, GeneratorConfig(fill_mask_endpoint=srv.url))
        assert gen.generate(ctx_for("[**Name 1**]"), RandomStream(0)).text == "Lee"


def test_stub_rejects_bad_requests(stub):
    import requests
    assert requests.post(stub.url + "/fill", data=b"{").status_code == 400
    assert requests.post(stub.url + "/fill", json={"text": "no marker"}).status_code == 400
    assert requests.get(stub.url + "/other").status_code == 404


def test_client_transport_error():
    with pytest.raises(FillMaskTransportError):
        FillMaskClient(dead_endpoint(), timeout=0.5).fill(FillMaskRequest("[MASK]"))


def test_age_renderer_hook(sample_db):
    cfg = GeneratorConfig(age_renderer=lambda age, rng: f"{age // 10 * 10}'s")
    g = Generator(sample_db, cfg).generate(ctx_for("in her [**Age 3**]"), RandomStream(2))
    assert re.fullmatch(r"\d*0's", g.text)
