"""Acceptance criteria, one test per criterion.

Run ``pytest tests/test_acceptance.py`` and read the "acceptance criteria"
section at the end of the report: one PASS or FAIL line per criterion, with
measured numbers in brackets.
"""
import io
import json
import logging
import random
import sys
import time
from collections import Counter

import pytest
from scipy import stats as sps

from pseudophi import corpus
from pseudophi.corpus import NoteRecord
from pseudophi.evaluation import labels as L
from pseudophi.evaluation import overlap, scoring, stats, stratify
from pseudophi.generators import (DEFAULT_FALLBACKS, FALLBACK, FILL_MASK, GenerationContext,
                                  GenerationError, Generator, GeneratorConfig)
from pseudophi.masks import MaskSyntaxError, TagKind, classify, scan_line, scan_line_partial, splice
from pseudophi.pseudodb import GazetteerEntry, PseudoDatabase
from pseudophi.rng import RandomStream

import fixturegen
from oracles import (I2B2, MASK_RE, brute_force_best, chi2_1_tail, dead_endpoint, deviation,
                     f_2_6_tail, frequent_label_docs, locality_pattern, planted_fixture,
                     random_fixture, score_mismatches, seq, stripping_fixture, twelve_docs)


def criterion(number, title):
    return pytest.mark.acceptance(number, title)


@criterion(1, "Parser round trip")
def test_parser_round_trip(masked_fixture, record_property):
    lines, manifest = masked_fixture
    n_masks = sum(map(len, manifest))
    assert len(lines) == 500 and n_masks >= 1000
    assert {e[2] for row in manifest for e in row} == {t.value for t in TagKind}

    t0 = time.perf_counter()
    found = [scan_line(line) for line in lines]
    rebuilt = [splice(line, toks, [t.raw for t in toks]) for line, toks in zip(lines, found)]
    elapsed = time.perf_counter() - t0

    misses = false_pos = wrong_tag = 0
    for toks, row in zip(found, manifest):
        got = {(t.start, t.end) for t in toks}
        want = {(s, e) for s, e, _ in row}
        misses += len(want - got)
        false_pos += len(got - want)
        tags = {(t.start, t.end): classify(t).value for t in toks}
        wrong_tag += sum(tags.get((s, e)) != tag for s, e, tag in row)
    record_property("detail", f"{n_masks} masks, {misses} misses, {false_pos} false positives, "
                              f"scan+splice {elapsed * 1000:.0f} ms")
    assert (misses, false_pos, wrong_tag) == (0, 0, 0)
    assert "\n".join(rebuilt).encode("utf-8") == "\n".join(lines).encode("utf-8")
    assert elapsed < 1.0


@criterion(1, "Parser round trip")
def test_bundled_fixture_is_reproducible(masked_fixture):
    lines, manifest = fixturegen.build_masked_fixture()
    assert (lines, manifest) == (masked_fixture[0], masked_fixture[1])


@criterion(2, "Synthesis completeness and determinism")
def test_synthesis_complete_and_deterministic(masked_fixture, sample_db, stub, record_property):
    lines = masked_fixture[0]
    cfg = GeneratorConfig(fill_mask_endpoint=stub.url)

    def run(seed):
        buf = io.StringIO()
        corpus.synthesize(lines, buf, sample_db, seed, config=cfg)
        return buf.getvalue()

    a, b, c = run(42), run(42), run(43)
    out = a.split("\n")[:-1]
    remaining = corpus.census_lines(out).masks
    record_property("detail", f"{remaining} masks left")
    assert remaining == 0 and len(out) == len(lines)
    assert all(not MASK_RE.search(line) and scan_line_partial(line) == ([], []) for line in out)
    # only mask spans changed
    for src, dst in zip(lines, out):
        spans = [(m.start(), m.end()) for m in MASK_RE.finditer(src)]
        assert locality_pattern(spans, src).fullmatch(dst)
    assert a.encode("utf-8") == b.encode("utf-8")
    assert a != c


@criterion(2, "Synthesis completeness and determinism")
def test_synthesis_throughput_100k(sample_db, stub, record_property):
    lines = fixturegen.synthetic_corpus(100_000)
    buf = io.StringIO()
    t0 = time.perf_counter()
    c = corpus.synthesize(lines, buf, sample_db, 42, config=GeneratorConfig(fill_mask_endpoint=stub.url))
    elapsed = time.perf_counter() - t0
    record_property("detail", f"100k lines, {c.masks} masks in {elapsed:.1f} s")
    assert c.by_source[FALLBACK] == 0
    assert buf.getvalue().count("\n") == len(lines)
    assert elapsed < 60


@criterion(3, "Weighted sampling")
def test_weighted_sampling(sample_db, record_property):
    db = PseudoDatabase({"x": [GazetteerEntry("A", 3), GazetteerEntry("B", 1)]})
    rng = RandomStream(42)
    n = 100_000
    counts = Counter(db.sample("x", rng).surface for _ in range(n))
    p = sps.chisquare([counts["A"], counts["B"]], [0.75 * n, 0.25 * n]).pvalue
    record_property("detail", f"A={counts['A']}, chi-square p={p:.3f}")
    assert p > 0.01

    rng = RandomStream(3)
    draws = [sample_db.sample("first_names", rng, {"gender": "F"}) for _ in range(10_000)]
    assert all(e.attrs["gender"] == "F" for e in draws)


@criterion(4, "Stratification")
def test_stratification(record_property):
    docs = frequent_label_docs(200)
    a = stratify.iterative_stratify(docs, (0.8, 0.2))
    dev = deviation(docs, a, (0.8, 0.2))

    small = twelve_docs()
    optimum = brute_force_best(small, (0.8, 0.2))
    greedy = deviation(small, stratify.iterative_stratify(small, (0.8, 0.2)), (0.8, 0.2))
    record_property("detail", f"200 docs max dev {dev * 100:.2f} pp; 12 docs greedy {greedy:.3f} "
                              f"vs optimum {optimum:.3f}")
    assert dev <= 0.02
    assert greedy <= 1.5 * optimum + 1e-12


@criterion(5, "Scoring oracle equivalence")
def test_scoring_oracle():
    rng = random.Random(2024)
    for _ in range(25):
        seqs = random_fixture(rng)
        assert score_mismatches(scoring.score(seqs), seqs, tol=1e-12) == []


@criterion(6, "Significance tests")
def test_significance(record_property):
    mc = stats.mcnemar(stats.ContingencyTable(0, 20, 10, 0), "corrected")
    assert abs(mc.statistic - 2.7) <= 1e-12
    assert abs(mc.pvalue - chi2_1_tail(2.7)) <= 1e-3

    gold = ["NAME", "O", "DATE", "O", "AGE"]
    pred = ["NAME", "NAME", "O", "O", "AGE"]
    same = stats.mcnemar(stats.ContingencyTable.from_predictions(gold, pred, pred))
    assert same.pvalue == 1.0

    an = stats.anova_oneway([1, 2, 3], [2, 3, 4], [3, 4, 5])
    record_property("detail", f"chi2={mc.statistic:.4f} p={mc.pvalue:.4f}; F={an.statistic!r} p={an.pvalue:.6f}")
    assert abs(an.statistic - 3.0) <= 1e-12
    assert abs(an.pvalue - f_2_6_tail(3.0)) <= 1e-6


@criterion(7, "Remap totality")
def test_remap_totality():
    m = L.default_label_map()
    assert sorted(m.sources) == sorted(I2B2) and len(m.sources) == 23
    assert m["HOSPITAL"] == "LOCATION" and m["PATIENT"] == "NAME"

    rng = random.Random(7)
    pool = I2B2 + ["O"] + [f"B-{x}" for x in I2B2] + [f"I-{x}" for x in I2B2]
    fixtures = [[seq(f"d{i}", [rng.choice(pool) for _ in range(rng.randint(0, 30))])
                 for i in range(rng.randint(1, 8))] for _ in range(50)]
    fixtures.append([seq("all", I2B2, list(reversed(I2B2)))])
    for seqs in fixtures:
        out = L.remap(seqs, m)
        assert [len(s.tokens) for s in out] == [len(s.tokens) for s in seqs]
        assert [t.surface for s in out for t in s.tokens] == [t.surface for s in seqs for t in s.tokens]


@criterion(8, "Overlap analysis")
def test_overlap(record_property):
    corpus_names, gaz = planted_fixture()
    assert overlap.gazetteer_overlap(corpus_names, gaz) == (5, 0.25, 20)

    corpus_names, gaz = stripping_fixture()
    plain = overlap.gazetteer_overlap(corpus_names, gaz)
    stripped = overlap.gazetteer_overlap(corpus_names, gaz, ("hospital", "clinic"))
    record_property("detail", f"{plain.shared}/{plain.fraction:.2%} -> {stripped.shared}/{stripped.fraction:.2%}")
    assert (plain.shared, plain.corpus_size) == (5, 23)
    assert (stripped.shared, stripped.corpus_size) == (8, 23)

    def matched(strip):
        return {n for n in corpus_names if overlap.gazetteer_overlap([n], gaz, strip).shared}

    gained = matched(("hospital", "clinic")) - matched(None)
    assert gained == {"Riverside Hospital", "Northside Clinic", "Hillcrest Hospital Clinic"}
    assert matched(None) <= matched(("hospital", "clinic"))


@criterion(9, "Fill-mask protocol conformance")
def test_fill_mask_stub_top_candidate(sample_db, stub):
    gen = Generator(sample_db, GeneratorConfig(fill_mask_endpoint=stub.url))
    for inner, tag in (("Name (NI) 12", TagKind.NAME), ("Attending Info 3", TagKind.UNKNOWN)):
        line = f"Seen by Dr. [**{inner}**] in clinic"
        tok = scan_line(line)[0]
        assert classify(tok) is tag
        g = gen.generate(GenerationContext(line, tok, tag, {}), RandomStream(0))
        sent = stub.requests_seen[-1].text
        assert (g.text, g.source) == (stub.answer(sent, 1)[0][0], FILL_MASK)


@criterion(9, "Fill-mask protocol conformance")
def test_fill_mask_backend_down(sample_db, record_property):
    lines = ["Dr. [**Name (NI) 1**] saw pt on [**2151-7-16**] for [**Attending Info 2**]", "",
             "[**Name 3**] aged [**Age over 90 **] from [**State 4**]", "",
             "[**Known lastname 5**] and [**Name 6**] and [**Name 6**]"]
    # the repeated entity is served from the note memo, so it fails once
    failing = [(1, "NAME"), (1, "UNKNOWN"), (3, "NAME"), (5, "NAME")]
    cfg = GeneratorConfig(fill_mask_endpoint=dead_endpoint(), fill_mask_timeout=0.5, retries=2)
    out, rep = io.StringIO(), io.StringIO()
    c = corpus.synthesize(lines, out, sample_db, 1, config=cfg, report=rep)
    incidents = [json.loads(x) for x in rep.getvalue().splitlines()]
    record_property("detail", f"{len(incidents)} incidents for {len(failing)} failures")
    assert [(i["line"], i["tag"]) for i in incidents] == failing
    assert all(i["kind"] == "fallback" for i in incidents)
    # five masks carry fallback text, but only four requests failed
    assert c.by_source[FALLBACK] == 5 and c.incidents == len(failing)
    text = out.getvalue().split("\n")
    assert text[0].startswith(f"Dr. {DEFAULT_FALLBACKS[TagKind.NAME]} saw pt on ")
    assert text[0].endswith(f" for {DEFAULT_FALLBACKS[TagKind.UNKNOWN]}")
    assert text[4].endswith(" and {0} and {0}".format(DEFAULT_FALLBACKS[TagKind.NAME]))

    strict = GeneratorConfig(fill_mask_endpoint=cfg.fill_mask_endpoint, fill_mask_timeout=0.5, strict=True)
    with pytest.raises(GenerationError):
        corpus.synthesize(lines, io.StringIO(), sample_db, 1, config=strict)


# bytes that make masks and near-masks common, plus odd whitespace
FUZZ_ALPHABET = b"[[[[***********]]]] \t\r\x0b\x0c\x00aeiNameDrt.()-/:,?!0123456789"
FUZZ_TABLE = bytes(FUZZ_ALPHABET[i % len(FUZZ_ALPHABET)] for i in range(256))


def fuzz_notes(rng, n_lines):
    """Random notes of random byte lines; about one note in ten is not valid UTF-8."""
    notes, total = [], 0
    while total < n_lines:
        k = min(rng.randint(1, 30), n_lines - total)
        mode = rng.random()
        lines = []
        for _ in range(k):
            raw = rng.randbytes(rng.randrange(0, 100))
            if mode < 0.9:
                line = raw.translate(FUZZ_TABLE)
                if mode < 0.3:
                    line = line.replace(b"e", "\u00e9".encode()).replace(b"a", "\u2028".encode())
            else:
                line = raw.replace(b"\n", b" ")
            lines.append(line)
        notes.append(lines)
        total += k
    return notes


@criterion(10, "Fuzzing")
def test_fuzz_million_lines(record_property):
    rng = random.Random(1_000_000)
    total = errors = masks = skipped = notes = 0
    quiet = logging.getLogger("pseudophi")
    level = quiet.level
    quiet.setLevel(logging.ERROR)
    try:
        while total < 1_000_000:
            chunk = fuzz_notes(rng, min(20_000, 1_000_000 - total))
            for raw in (line for note in chunk for line in note):
                total += 1
                line = raw.decode("utf-8", "surrogateescape")
                try:
                    toks = scan_line(line)
                except MaskSyntaxError:
                    errors += 1
                    continue
                masks += len(toks)
                assert [(t.start, t.end) for t in toks] == [m.span() for m in MASK_RE.finditer(line)]
                assert splice(line, toks, [t.raw for t in toks]) == line

            records = [NoteRecord(f"n{notes + i}", b"\n".join(note)) for i, note in enumerate(chunk)]
            notes += len(records)
            expected_bad = set()
            for r in records:
                try:
                    r.text.decode("utf-8")
                except UnicodeDecodeError:
                    expected_bad.add(r.note_id)
            buf = io.StringIO()
            incidents = corpus.normalize(records, buf)
            assert all(inc.kind == "undecodable_note" for inc in incidents)
            assert {inc.note_id for inc in incidents} == expected_bad
            # sentences are never blank, so blank lines are exactly the note separators
            assert buf.getvalue().split("\n")[:-1].count("") == len(records) - len(expected_bad)
            skipped += len(incidents)
    finally:
        quiet.setLevel(level)
    record_property("detail", f"{total} lines, {masks} masks, {errors} mask syntax errors, "
                              f"{skipped}/{notes} notes skipped as non-UTF-8")
    assert total == 1_000_000 and errors > 0 and masks > 0 and skipped < notes


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
