"""Token- and span-level F1 with its precision and recall parts."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .labels import OUTSIDE, TokenLabelSequence, split_prefix

TOKEN = "token"
SPAN = "span"


@dataclass(frozen=True)
class LabelScore:
    tp: int
    fp: int
    fn: int
    precision: float | None
    recall: float | None
    f1: float | None

    @property
    def support(self) -> int:
        return self.tp + self.fn

    @property
    def defined(self) -> bool:
        return self.support > 0

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "LabelScore":
        if tp + fn == 0:
            # label never in gold: only precision can be stated
            return cls(tp, fp, fn, tp / (tp + fp) if tp + fp else None, None, None)
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn)
        f = 2 * tp / (2 * tp + fp + fn)
        return cls(tp, fp, fn, p, r, f)

    def to_json(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1,
                "support": self.support, "tp": self.tp, "fp": self.fp, "fn": self.fn,
                "defined": self.defined}


@dataclass(frozen=True)
class ScoreReport:
    mode: str
    labels: dict[str, LabelScore]
    micro: LabelScore
    macro_precision: float | None
    macro_recall: float | None
    macro_f1: float | None

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "labels": {k: v.to_json() for k, v in sorted(self.labels.items())},
            "micro": self.micro.to_json(),
            "macro": {"precision": self.macro_precision, "recall": self.macro_recall,
                      "f1": self.macro_f1},
        }


def _base(label: str) -> str:
    return split_prefix(label)[1]


def spans(labels: list[str]) -> set[tuple[int, int, str]]:
    """``(start, end, type)`` spans from BIO or plain IO labels."""
    out = set()
    start = kind = None
    for i, label in enumerate(labels + [OUTSIDE]):
        prefix, base = split_prefix(label)
        if kind is not None and (base != kind or prefix == "B-" or base == OUTSIDE):
            out.add((start, i, kind))
            start = kind = None
        if base != OUTSIDE and kind is None:
            start, kind = i, base
    return out


def _report(mode: str, tp: Counter, fp: Counter, fn: Counter) -> ScoreReport:
    names = sorted((set(tp) | set(fp) | set(fn)) - {OUTSIDE})
    per = {n: LabelScore.from_counts(tp[n], fp[n], fn[n]) for n in names}
    micro = LabelScore.from_counts(sum(tp[n] for n in names), sum(fp[n] for n in names),
                                   sum(fn[n] for n in names))
    defined = [s for s in per.values() if s.defined]
    if defined:
        mp = sum(s.precision for s in defined) / len(defined)
        mr = sum(s.recall for s in defined) / len(defined)
        mf = sum(s.f1 for s in defined) / len(defined)
    else:
        mp = mr = mf = None
    return ScoreReport(mode, per, micro, mp, mr, mf)


def score(seqs: Iterable[TokenLabelSequence], mode: str = TOKEN) -> ScoreReport:
    """Per-label and aggregate scores; ``O`` is never scored as a label."""
    tp, fp, fn = Counter(), Counter(), Counter()
    for s in seqs:
        if s.tokens and not s.has_preds:
            raise ValueError(f"{s.doc_id}: no predictions to score")
        if mode == TOKEN:
            for t in s.tokens:
                g, p = _base(t.gold), _base(t.pred)
                if g == p:
                    tp[g] += 1
                else:
                    fp[p] += 1
                    fn[g] += 1
        elif mode == SPAN:
            gold = spans([t.gold for t in s.tokens])
            pred = spans([t.pred for t in s.tokens])
            for sp in gold & pred:
                tp[sp[2]] += 1
            for sp in pred - gold:
                fp[sp[2]] += 1
            for sp in gold - pred:
                fn[sp[2]] += 1
        else:
            raise ValueError(f"unknown scoring mode {mode!r}")
    return _report(mode, tp, fp, fn)
