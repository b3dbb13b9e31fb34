"""Multi-label iterative stratification.

Greedy splitting that preserves per-label proportions across folds: labels
are handled rarest first, and each document carrying the current label goes
to the fold that still wants the most documents of that label.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Hashable, Iterable, Sequence

from ..rng import RandomStream

DEFAULT_FRACTIONS = (0.8, 0.2)
_EPS = 1e-9


def _argmax(values: Sequence[float], among: Iterable[int]) -> list[int]:
    among = list(among)
    best = max(values[j] for j in among)
    return [j for j in among if values[j] >= best - _EPS]


def iterative_stratify(docs: Sequence[tuple[str, Iterable[Hashable]]],
                       fractions: Sequence[float] = DEFAULT_FRACTIONS,
                       rng: RandomStream | None = None) -> list[int]:
    """Assign each ``(doc_id, labels)`` to a fold; returns fold indices in input order.

    Labels are treated as a set per document.  Ties between folds go to the
    one with more remaining capacity, then to ``rng``.
    """
    if not docs:
        raise ValueError("nothing to split")
    if any(f <= 0 for f in fractions) or abs(sum(fractions) - 1) > 1e-9:
        raise ValueError(f"fractions must be positive and sum to 1, got {list(fractions)}")
    rng = rng or RandomStream(0)
    k = len(fractions)
    labelsets = [frozenset(labels) for _, labels in docs]
    ids = [d for d, _ in docs]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate doc ids")

    by_label: dict = defaultdict(list)
    for i, ls in enumerate(labelsets):
        for label in ls:
            by_label[label].append(i)

    capacity = [f * len(docs) for f in fractions]
    demand = {label: [f * len(members) for f in fractions] for label, members in by_label.items()}
    remaining = {label: len(members) for label, members in by_label.items()}
    fold: list[int | None] = [None] * len(docs)

    def assign(i: int, j: int) -> None:
        fold[i] = j
        capacity[j] -= 1
        for label in labelsets[i]:
            demand[label][j] -= 1
            remaining[label] -= 1

    def pick(candidates: list[int]) -> int:
        if len(candidates) > 1:
            candidates = _argmax(capacity, candidates)
        if len(candidates) > 1:
            return candidates[rng.randbelow(len(candidates))]
        return candidates[0]

    while True:
        live = [label for label, n in remaining.items() if n > 0]
        if not live:
            break
        label = min(live, key=lambda lab: (remaining[lab], str(lab)))
        for i in by_label[label]:
            if fold[i] is None:
                assign(i, pick(_argmax(demand[label], range(k))))

    for i in range(len(docs)):
        if fold[i] is None:
            assign(i, pick(_argmax(capacity, range(k))))
    return fold


def folds_by_id(docs: Sequence[tuple[str, Iterable[Hashable]]], assignment: Sequence[int]) -> dict[str, int]:
    return {doc_id: j for (doc_id, _), j in zip(docs, assignment)}


def label_proportions(docs: Sequence[tuple[str, Iterable[Hashable]]], assignment: Sequence[int],
                      n_folds: int) -> dict:
    """``{label: [share of the label's documents in each fold]}``."""
    counts: dict = defaultdict(lambda: [0] * n_folds)
    for (_, labels), j in zip(docs, assignment):
        for label in set(labels):
            counts[label][j] += 1
    return {label: [c / sum(cs) for c in cs] for label, cs in counts.items()}


def max_deviation(docs, assignment, fractions) -> float:
    """Largest gap between a label's fold share and the target fraction."""
    props = label_proportions(docs, assignment, len(fractions))
    return max((abs(p - f) for ps in props.values() for p, f in zip(ps, fractions)), default=0.0)
