"""
Evaluating de-identification models
===================================

A de-identification model tags each token. To compare models annotated with
the fine-grained 23-label scheme against the coarser HIPAA categories, labels
are first re-categorized. The toolkit then splits documents, scores
predictions and tests whether two systems really differ.
"""

import random

from pseudophi.evaluation import labels as L
from pseudophi.evaluation import scoring, stats, stratify
from pseudophi.rng import RandomStream

rng = random.Random(0)
FINE = ["PATIENT", "DOCTOR", "HOSPITAL", "CITY", "DATE", "AGE", "PHONE", "IDNUM"]


def noisy(label, error_rate):
    # a fake model: right most of the time, otherwise a random label or O
    return label if rng.random() > error_rate else rng.choice(FINE + ["O"])


ERROR_RATES = {"A": 0.10, "B": 0.18, "C": 0.14}
golds = [[rng.choice(FINE) if rng.random() < 0.3 else "O" for _ in range(40)] for _ in range(60)]
preds = {name: [[noisy(g, rate) for g in gold] for gold in golds] for name, rate in ERROR_RATES.items()}

# %% Re-categorize: HOSPITAL and CITY become LOCATION, PATIENT and DOCTOR
# become NAME. Token counts are preserved.
label_map = L.default_label_map()
print("sources:", len(label_map.sources), "->", sorted(set(label_map.values()) - {"O"}))
systems = {
    name: L.remap([L.TokenLabelSequence(f"d{i}", [L.Token(f"w{j}", g, p) for j, (g, p) in enumerate(zip(gold, pred))])
                   for i, (gold, pred) in enumerate(zip(golds, ps))], label_map)
    for name, ps in preds.items()}

# %% Hold out 20% of the documents, keeping each label's share in both folds.
labelsets = [(s.doc_id, sorted({t.gold for t in s.tokens} - {"O"})) for s in systems["A"]]
fold = stratify.iterative_stratify(labelsets, (0.8, 0.2), RandomStream(1))
print(f"fold sizes: {fold.count(0)}/{fold.count(1)}, "
      f"worst label deviation: {stratify.max_deviation(labelsets, fold, (0.8, 0.2)):.3f}")

# %% Token-level F1 per label on the held-out fold.
held = {name: [s for s, j in zip(seqs, fold) if j == 1] for name, seqs in systems.items()}
for name, seqs in held.items():
    rep = scoring.score(seqs)
    per_label = ", ".join(f"{lab} {s.f1:.2f}" for lab, s in rep.labels.items() if s.defined)
    print(f"system {name}: micro F1 {rep.micro.f1:.3f}  ({per_label})")

# %% McNemar's test on the tokens where exactly one system is right.
gold = [t.gold for s in held["A"] for t in s.tokens]
table = stats.ContingencyTable.from_predictions(
    gold, [t.pred for s in held["A"] for t in s.tokens], [t.pred for s in held["B"] for t in s.tokens])
res = stats.mcnemar(table)
print(f"McNemar ({res.mode}): only A right {table.b}, only B right {table.c}, p = {res.pvalue:.4f}")

# %% One-way ANOVA over per-document F1 of the three systems.
runs = [[scoring.score([s]).micro.f1 or 0.0 for s in seqs] for seqs in held.values()]
res = stats.anova_oneway(*runs)
print(f"ANOVA over per-document F1: F = {res.statistic:.3f}, p = {res.pvalue:.4f}")
