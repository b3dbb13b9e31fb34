"""
How much does a gazetteer already cover?
========================================

If the surrogate hospital list shares many names with the real corpus,
pseudo text may leak real identifiers. Overlap counts the distinct corpus
surfaces that also appear in the list. Dropping generic words such as
"hospital" or "clinic" first exposes near matches.
"""

from pseudophi import pseudodb
from pseudophi.evaluation.overlap import DEFAULT_STRIP_WORDS, gazetteer_overlap, normalizer

corpus_hospitals = [
    "Maine Medical Center", "Mayo Clinic", "Riverside Hospital", "Northside Clinic",
    "St. Mary's", "Lakeview Rehab", "Hillcrest Hospital Clinic", "County General",
]
gazetteer = [e.surface for e in pseudodb.load_sample()["hospitals"]] + ["Riverside", "Northside Hospital", "Hillcrest"]

# %% Exact matching ignores case and spacing only.
plain = gazetteer_overlap(corpus_hospitals, gazetteer)
print(f"exact:    {plain.shared}/{plain.corpus_size} = {plain.fraction:.1%}")

# %% Stripping whole words lets "Riverside Hospital" meet "Riverside".
stripped = gazetteer_overlap(corpus_hospitals, gazetteer, DEFAULT_STRIP_WORDS)
print(f"stripped: {stripped.shared}/{stripped.corpus_size} = {stripped.fraction:.1%}")

# %% Only whole words go, so "Hospitality" survives.
norm = normalizer(DEFAULT_STRIP_WORDS)
for name in ("Riverside Hospital", "Hillcrest Hospital Clinic", "Hospitality House"):
    print(f"  {name!r:30} -> {norm(name)!r}")
