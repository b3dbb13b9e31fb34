"""Token label sequences and label re-categorization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Mapping

OUTSIDE = "O"
HIPAA_LABELS = ("NAME", "PROFESSION", "LOCATION", "AGE", "DATE", "CONTACT", "ID", OUTSIDE)


@dataclass
class Token:
    surface: str
    gold: str
    pred: str | None = None


@dataclass
class TokenLabelSequence:
    doc_id: str
    tokens: list[Token] = field(default_factory=list)

    def __post_init__(self):
        have = {t.pred is not None for t in self.tokens}
        if len(have) > 1:
            raise ValueError(f"{self.doc_id}: predictions must be all present or all absent")

    @property
    def has_preds(self) -> bool:
        return bool(self.tokens) and self.tokens[0].pred is not None

    def labels(self) -> list[str]:
        return [t.gold for t in self.tokens]

    def to_json(self) -> dict:
        toks = []
        for t in self.tokens:
            d = {"t": t.surface, "gold": t.gold}
            if t.pred is not None:
                d["pred"] = t.pred
            toks.append(d)
        return {"doc_id": self.doc_id, "tokens": toks}

    @classmethod
    def from_json(cls, d: Mapping) -> "TokenLabelSequence":
        return cls(str(d["doc_id"]), [Token(t["t"], t["gold"], t.get("pred")) for t in d["tokens"]])


def read_sequences(path: str | Path) -> list[TokenLabelSequence]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(TokenLabelSequence.from_json(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return out


def write_sequences(seqs: Iterable[TokenLabelSequence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in seqs:
            fh.write(json.dumps(s.to_json()) + "\n")


def split_prefix(label: str) -> tuple[str, str]:
    """``"B-PATIENT"`` -> ``("B-", "PATIENT")``; plain labels get an empty prefix."""
    if len(label) > 2 and label[1] == "-" and label[0] in "BIES":
        return label[:2], label[2:]
    return "", label


class LabelMap(dict):
    """Total mapping from source to target labels; ``O`` always maps to ``O``."""

    def __init__(self, mapping: Mapping[str, str]):
        super().__init__(mapping)
        if self.get(OUTSIDE, OUTSIDE) != OUTSIDE:
            raise ValueError("O must map to O")
        self.setdefault(OUTSIDE, OUTSIDE)

    @property
    def sources(self) -> list[str]:
        return sorted(k for k in self if k != OUTSIDE)

    def map_label(self, label: str) -> str:
        prefix, base = split_prefix(label)
        try:
            target = self[base]
        except KeyError:
            raise KeyError(f"label {label!r} is not covered by the label map") from None
        return target if target == OUTSIDE else prefix + target

    def to_tsv(self) -> str:
        return "# source\ttarget\n" + "".join(f"{k}\t{v}\n" for k, v in self.items())


def parse_label_map(text: str, source: str = "<labelmap>") -> LabelMap:
    mapping = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not all(f.strip() for f in fields):
            raise ValueError(f"{source}:{lineno}: expected source<TAB>target")
        src, tgt = (f.strip() for f in fields)
        if src in mapping:
            raise ValueError(f"{source}:{lineno}: duplicate source label {src!r}")
        mapping[src] = tgt
    try:
        return LabelMap(mapping)
    except ValueError as exc:
        raise ValueError(f"{source}: {exc}") from None


def load_label_map(path: str | Path) -> LabelMap:
    path = Path(path)
    return parse_label_map(path.read_text(encoding="utf-8"), str(path))


def default_label_map() -> LabelMap:
    """The i2b2 2014 to HIPAA re-categorization (provisional, editable data)."""
    text = resources.files("pseudophi.data").joinpath("i2b2_hipaa.tsv").read_text(encoding="utf-8")
    return parse_label_map(text, "i2b2_hipaa.tsv")


def remap(seqs: Iterable[TokenLabelSequence], label_map: LabelMap) -> list[TokenLabelSequence]:
    """Relabel gold and predicted labels; BIO prefixes are kept."""
    out = []
    for s in seqs:
        out.append(TokenLabelSequence(s.doc_id, [
            Token(t.surface, label_map.map_label(t.gold),
                  label_map.map_label(t.pred) if t.pred is not None else None)
            for t in s.tokens]))
    return out


def iter_labels(seqs: Iterable[TokenLabelSequence]) -> Iterator[str]:
    for s in seqs:
        for t in s.tokens:
            yield t.gold
            if t.pred is not None:
                yield t.pred
