"""
Weighted gazetteers
===================

Surrogates are drawn from lists weighted by real-world popularity, so common
names show up more often than rare ones. A list is a TSV file with surface,
weight and optional attribute columns; a database is a directory of lists.
"""

import tempfile
from collections import Counter
from pathlib import Path

from pseudophi import pseudodb
from pseudophi.pseudodb import GazetteerEntry, PseudoDatabase
from pseudophi.rng import RandomStream

# %% The bundled sample database.
db = pseudodb.load_sample()
print("lists:", db.counts())

# %% Draw frequencies follow the weights. Streams are seeded, so a rerun
# gives the same draws.
toy = PseudoDatabase({"colour": [GazetteerEntry("red", 3), GazetteerEntry("blue", 1)]})
rng = RandomStream(seed=7)
print(Counter(toy.sample("colour", rng).surface for _ in range(10_000)))

# %% Filters narrow the candidates, and weights renormalize over what is left.
rng = RandomStream(seed=7)
print("female first names:", [db.sample("first_names", rng, {"gender": "F"}).surface for _ in range(6)])
print("starting with M:   ", [db.sample("last_names", rng, lambda e: e.surface.startswith("M")).surface
                               for _ in range(4)])

# %% Build a database from census-style name files: yobYYYY.txt rows are
# name,gender,count, and only years inside the window are summed.
with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    (tmp / "yob1950.txt").write_text("Mildred,F,900\n", encoding="utf-8")
    (tmp / "yob1985.txt").write_text("Jessica,F,500\nMichael,M,700\n", encoding="utf-8")
    (tmp / "yob1995.txt").write_text("Jessica,F,300\nTyler,M,200\n", encoding="utf-8")
    names = pseudodb.ingest_census_names(sorted(tmp.glob("yob*.txt")), years=(1960, 2020))
    custom = PseudoDatabase({"first_names": names})
    pseudodb.dump(custom, tmp / "db")
    print("\nfirst_names.tsv:\n" + (tmp / "db" / "first_names.tsv").read_text(encoding="utf-8"))
