"""Turn masked clinical notes into pseudo text and evaluate de-identification output.

Exit codes: 0 on success, 1 for invalid arguments, configuration or input,
2 when a runtime incident aborts a ``--strict`` run.
"""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
from pathlib import Path

from . import __version__, corpus, pseudodb
from .config import ConfigError, RunConfig, resolve
from .evaluation import labels as labels_mod
from .evaluation import overlap, scoring, stats, stratify
from .fillmask import DEFAULT_CANNED, StubFillMaskServer
from .generators import GenerationError
from .manifest import training_manifest
from .masks import MaskSyntaxError, default_rule_table, load_rule_table
from .rng import RandomStream

logger = logging.getLogger("pseudophi")

EXIT_OK, EXIT_INVALID, EXIT_INCIDENT = 0, 1, 2


class UsageError(Exception):
    pass


class _ConfigDumped(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _floats(text: str, flag: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


def _rules(cfg: RunConfig):
    return load_rule_table(cfg.rules) if cfg.rules else default_rule_table()


def _run_config(args, need_seed: bool = False) -> RunConfig:
    flags = {k: getattr(args, k, None) for k in RunConfig.__dataclass_fields__}
    cfg = resolve(args.config, flags)
    if args.dump_config:
        sys.stdout.write(cfg.to_ini())
        raise _ConfigDumped
    cfg.validate(need_seed)
    return cfg


# subcommands -----------------------------------------------------------------

def cmd_build_db(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.copy:
        for f in sorted(Path(args.copy).glob("*.tsv")):
            shutil.copy(f, out / f.name)
    if args.yob:
        years = tuple(int(v) for v in args.years.split("-"))
        entries = pseudodb.ingest_census_names(args.yob, years)
        (out / "first_names.tsv").write_text(pseudodb.format_list(entries), encoding="utf-8")
    if args.surnames:
        entries = pseudodb.ingest_census_surnames(args.surnames)
        (out / "last_names.tsv").write_text(pseudodb.format_list(entries), encoding="utf-8")
    db = pseudodb.load(out)
    _emit({"db": str(out), "counts": db.counts()}, args.report_out)
    return EXIT_OK


def cmd_normalize(args) -> int:
    cfg = _run_config(args)
    if not cfg.input or not cfg.output:
        raise UsageError("normalize needs --input and --output")
    if cfg.input.lower().endswith(".csv"):
        notes = corpus.read_noteevents(cfg.input)
    else:
        text = Path(cfg.input).read_bytes()
        notes = (corpus.NoteRecord(str(i), chunk) for i, chunk in
                 enumerate(text.split(b"\f")) if chunk.strip())
    incidents = corpus.normalize(notes, cfg.output, strict=cfg.strict)
    if cfg.report:
        with open(cfg.report, "w", encoding="utf-8") as fh:
            for inc in incidents:
                fh.write(json.dumps(inc.to_json()) + "\n")
    _emit({"output": cfg.output, "skipped_notes": len(incidents)}, args.out)
    return EXIT_OK


def cmd_census(args) -> int:
    cfg = _run_config(args)
    if not cfg.input:
        raise UsageError("census needs --input")
    _emit(corpus.census(cfg.input, _rules(cfg)).to_json(), args.out)
    return EXIT_OK


def cmd_synthesize(args) -> int:
    cfg = _run_config(args, need_seed=True)
    if not cfg.input or not cfg.output:
        raise UsageError("synthesize needs --input and --output")
    db = pseudodb.load(cfg.db) if cfg.db else pseudodb.load_sample()
    c = corpus.synthesize(cfg.input, cfg.output, db, cfg.seed, _rules(cfg),
                          cfg.generator_config(), cfg.workers, cfg.report, cfg.block_lines)
    _emit(c.to_json(), args.out)
    return EXIT_OK


def _docs(seqs):
    return [(s.doc_id, sorted({labels_mod.split_prefix(t.gold)[1] for t in s.tokens} - {"O"}))
            for s in seqs]


def cmd_split(args) -> int:
    seqs = labels_mod.read_sequences(args.input)
    fractions = _floats(args.fractions, "--fractions")
    docs = _docs(seqs)
    try:
        assignment = stratify.iterative_stratify(docs, fractions, RandomStream(args.seed, 0))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit({"fractions": fractions,
           "folds": stratify.folds_by_id(docs, assignment),
           "fold_sizes": [assignment.count(j) for j in range(len(fractions))],
           "max_label_deviation": stratify.max_deviation(docs, assignment, fractions)}, args.out)
    return EXIT_OK


def _label_map(path):
    return labels_mod.load_label_map(path) if path else labels_mod.default_label_map()


def cmd_remap(args) -> int:
    seqs = labels_mod.read_sequences(args.input)
    try:
        out = labels_mod.remap(seqs, _label_map(args.map))
    except KeyError as exc:
        raise UsageError(f"{args.input}: {exc.args[0]}") from None
    labels_mod.write_sequences(out, args.output)
    _emit({"output": args.output, "documents": len(out),
           "tokens": sum(len(s.tokens) for s in out)}, args.out)
    return EXIT_OK


def cmd_score(args) -> int:
    seqs = labels_mod.read_sequences(args.input)
    try:
        if args.remap or args.map:
            seqs = labels_mod.remap(seqs, _label_map(args.map))
        report = scoring.score(seqs, args.mode)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{args.input}: {exc}") from None
    _emit(report.to_json(), args.out)
    return EXIT_OK


def _pred_pairs(path_a, path_b):
    a = labels_mod.read_sequences(path_a)
    b = {s.doc_id: s for s in labels_mod.read_sequences(path_b)}
    gold, pa, pb = [], [], []
    for s in a:
        other = b.get(s.doc_id)
        if other is None or len(other.tokens) != len(s.tokens):
            raise UsageError(f"{path_b}: document {s.doc_id!r} missing or of different length")
        for ta, tb in zip(s.tokens, other.tokens):
            if ta.gold != tb.gold:
                raise UsageError(f"{s.doc_id}: gold labels differ between the two files")
            gold.append(ta.gold)
            pa.append(ta.pred)
            pb.append(tb.pred)
    return gold, pa, pb


def cmd_mcnemar(args) -> int:
    if args.table:
        try:
            n00, n01, n10, n11 = (int(v) for v in args.table.split(","))
            table = stats.ContingencyTable(n00, n01, n10, n11)
        except ValueError as exc:
            raise UsageError(f"--table: {exc}") from None
    elif args.pred_a and args.pred_b:
        table = stats.ContingencyTable.from_predictions(*_pred_pairs(args.pred_a, args.pred_b))
    else:
        raise UsageError("mcnemar needs --table or both --pred-a and --pred-b")
    res = stats.mcnemar(table, args.mode)
    _emit({"table": {"n00": table.n00, "n01": table.n01, "n10": table.n10, "n11": table.n11},
           "mode": res.mode, "statistic": res.statistic, "p_value": res.pvalue}, args.out)
    return EXIT_OK


def cmd_anova(args) -> int:
    if args.groups_file:
        groups = json.loads(Path(args.groups_file).read_text(encoding="utf-8"))
    else:
        groups = [_floats(g, "--group") for g in args.group or ()]
    try:
        res = stats.anova_oneway(*groups)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    _emit({"F": res.statistic if res.statistic != float("inf") else "inf",
           "p_value": res.pvalue, "groups": len(groups)}, args.out)
    return EXIT_OK


def cmd_overlap(args) -> int:
    corpus_names = [l.strip() for l in Path(args.corpus).read_text(encoding="utf-8").splitlines()]
    if args.gazetteer:
        gaz = [l.strip() for l in Path(args.gazetteer).read_text(encoding="utf-8").splitlines()]
    else:
        db = pseudodb.load(args.db) if args.db else pseudodb.load_sample()
        gaz = [e.surface for e in db[args.list]]
    strip = [w for w in args.strip.split(",") if w] if args.strip else None
    try:
        res = overlap.gazetteer_overlap(corpus_names, gaz, strip)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit({"shared": res.shared, "fraction": res.fraction, "corpus_size": res.corpus_size,
           "strip_words": strip or []}, args.out)
    return EXIT_OK


def cmd_stub_server(args) -> int:
    cands = DEFAULT_CANNED
    if args.candidates:
        try:
            cands = [(t, float(s)) for t, s in
                     (item.rsplit(":", 1) for item in args.candidates.split(","))]
        except ValueError:
            raise UsageError("--candidates: expected token:score,token:score") from None
    stub = StubFillMaskServer(candidates=cands, host="127.0.0.1", port=args.port)

    def ready(url):
        sys.stderr.write(f"fill-mask stub listening on {url}\n")
        sys.stderr.flush()

    try:
        stub.serve_forever(ready)
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_emit_manifest(args) -> int:
    _emit(training_manifest(), args.out)
    return EXIT_OK


# parser ----------------------------------------------------------------------

OUT_HELP = "JSON result path (default stdout)"


def _add_run_options(p, seed=False, db=False, generation=False):
    p.add_argument("--config", help="INI config file ([pseudophi] section)")
    p.add_argument("--dump-config", action="store_true",
                   help="print the effective configuration as INI and exit")
    p.add_argument("--input", help="input file")
    p.add_argument("--output", help="output file")
    p.add_argument("--report", help="incident report (JSON lines)")
    p.add_argument("--rules", help="tag rule table (TSV)")
    p.add_argument("--strict", action="store_true", default=None,
                   help="abort on the first incident (exit code 2)")
    if seed:
        p.add_argument("--seed", type=int, help="random seed (default: $PSEUDO_SEED)")
        p.add_argument("--workers", type=int, help="worker processes")
        p.add_argument("--block-lines", dest="block_lines", type=int,
                       help="lines per work block")
    if db:
        p.add_argument("--db", help="pseudo database directory (default: bundled sample)")
    if generation:
        p.add_argument("--no-memoize", dest="memoize", action="store_false", default=None,
                       help="do not reuse surfaces for repeated entity ids within a note")
        p.add_argument("--age-range", dest="age_range", help="LOW-HIGH (default 1-90)")
        p.add_argument("--date-window", dest="date_window", help="years LOW-HIGH")
        p.add_argument("--fill-mask-endpoint", dest="fill_mask_endpoint",
                       help="base URL of the fill-mask service")
        p.add_argument("--fill-mask-timeout", dest="fill_mask_timeout", type=float,
                       help="seconds per fill-mask request")
        p.add_argument("--retries", type=int, help="fill-mask retries before fallback")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pseudophi", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("build-db", help="assemble a pseudo database directory")
    p.add_argument("--out", required=True, help="database directory to write")
    p.add_argument("--copy", help="copy list files (*.tsv) from this directory first")
    p.add_argument("--yob", nargs="+", help="year-partitioned name,gender,count files")
    p.add_argument("--years", default="1960-2020", help="inclusive year range for --yob")
    p.add_argument("--surnames", help="surname CSV with name and count columns")
    p.add_argument("--report-out", help="write the JSON summary here instead of stdout")
    p.set_defaults(func=cmd_build_db)

    p = sub.add_parser("normalize", help="notes to a flat sentence-per-line file")
    _add_run_options(p)
    p.add_argument("--out", help="JSON summary path (default stdout)")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("census", help="count masks per tag")
    _add_run_options(p)
    p.add_argument("--out", help="JSON census path (default stdout)")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("synthesize", help="replace masks with pseudo text")
    _add_run_options(p, seed=True, db=True, generation=True)
    p.add_argument("--out", help="JSON census path (default stdout)")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("split", help="multi-label iterative stratified split")
    p.add_argument("--input", required=True, help="token label sequences (JSON lines)")
    p.add_argument("--fractions", default="0.8,0.2", help="comma-separated fold fractions")
    p.add_argument("--seed", type=int, default=0, help="tie-breaking seed")
    p.add_argument("--out", help=OUT_HELP)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("remap", help="re-categorize labels")
    p.add_argument("--input", required=True, help="token label sequences (JSON lines)")
    p.add_argument("--output", required=True, help="remapped sequences (JSON lines)")
    p.add_argument("--map", help="label map TSV (default: bundled i2b2 to HIPAA map)")
    p.add_argument("--out", help=OUT_HELP)
    p.set_defaults(func=cmd_remap)

    p = sub.add_parser("score", help="per-label F1 with precision and recall")
    p.add_argument("--input", required=True, help="sequences with gold and predicted labels")
    p.add_argument("--mode", choices=(scoring.TOKEN, scoring.SPAN), default=scoring.TOKEN,
                   help="count tokens or exact BIO spans")
    p.add_argument("--remap", action="store_true", help="apply the default label map first")
    p.add_argument("--map", help="apply this label map first")
    p.add_argument("--out", help=OUT_HELP)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("mcnemar", help="McNemar's test for paired predictions")
    p.add_argument("--table", help="n00,n01,n10,n11")
    p.add_argument("--pred-a", help="sequences with system A predictions")
    p.add_argument("--pred-b", help="sequences with system B predictions")
    p.add_argument("--mode", choices=(stats.AUTO, stats.EXACT, stats.CORRECTED), default=stats.AUTO,
                   help="exact binomial or corrected chi-square; auto picks by sample size")
    p.add_argument("--out", help=OUT_HELP)
    p.set_defaults(func=cmd_mcnemar)

    p = sub.add_parser("anova", help="one-way ANOVA")
    p.add_argument("--group", action="append", help="comma-separated observations (repeat)")
    p.add_argument("--groups-file", help="JSON list of lists")
    p.add_argument("--out", help=OUT_HELP)
    p.set_defaults(func=cmd_anova)

    p = sub.add_parser("overlap", help="corpus surfaces shared with a gazetteer list")
    p.add_argument("--corpus", required=True, help="one surface per line")
    p.add_argument("--gazetteer", help="one surface per line")
    p.add_argument("--db", help="pseudo database directory")
    p.add_argument("--list", default="hospitals", help="list name inside --db")
    p.add_argument("--strip", help="comma-separated words removed before matching")
    p.add_argument("--out", help=OUT_HELP)
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("stub-server", help="serve canned fill-mask answers on 127.0.0.1")
    p.add_argument("--port", type=int, default=8080, help="0 picks a free port")
    p.add_argument("--candidates", help="token:score,... (default: a few surnames)")
    p.set_defaults(func=cmd_stub_server)

    p = sub.add_parser("emit-manifest", help="print training hyperparameters as JSON")
    p.add_argument("--out", help=OUT_HELP)
    p.set_defaults(func=cmd_emit_manifest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _ConfigDumped:
        return EXIT_OK
    except (corpus.CorpusError, GenerationError, MaskSyntaxError) as exc:
        sys.stderr.write(f"pseudophi {args.command}: incident: {exc}\n")
        return EXIT_INCIDENT
    except (UsageError, ConfigError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"pseudophi {args.command}: error: {msg}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
