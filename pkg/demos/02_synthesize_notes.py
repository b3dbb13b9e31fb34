"""
From masks to pseudo text
=========================

Every mask is replaced by a realistic surrogate. Structured tags (dates,
phone numbers, ids) come from seeded random generators. Names of known type
and places come from weighted gazetteer lists. Free-form names and unknown
masks ask a fill-mask service, and here a local stub plays that role.
"""

import io
import json

from pseudophi import corpus, pseudodb
from pseudophi.fillmask import StubFillMaskServer
from pseudophi.generators import GeneratorConfig

MASKED = [
    "Seen by Dr. [**Last Name (STitle) 2601**] on [**2151-7-16**] at [**Hospital1 18**].",
    "[**Known firstname 22**] [**Known lastname 1234**] is a [**Age over 90 **] yo.",
    "Delivering OB : Dr. [**Name (NI) 7**], PCP [**Attending Info 2**].",
    "Call [**Known lastname 1234**] at [**Telephone/Fax (1) 3**].",
    "",  # a blank line ends the note
    "Next note: [**Known lastname 1234**] again, now a different person.",
]

db = pseudodb.load_sample()

# %% With the stub running, every tag gets a surrogate. Within one note,
# the same entity id always gets the same surface.
with StubFillMaskServer() as stub:
    cfg = GeneratorConfig(fill_mask_endpoint=stub.url)
    out = io.StringIO()
    census = corpus.synthesize(MASKED, out, db, seed=42, config=cfg)
    for before, after in zip(MASKED, out.getvalue().split("\n")):
        print(f"{before}\n  -> {after}")
    print("sources:", census.to_json()["by_source"], "memo hits:", census.memo_hits)

    # %% Same seed, same bytes; the worker count and block size never matter.
    again = io.StringIO()
    corpus.synthesize(MASKED, again, db, seed=42, config=cfg, block_lines=1)
    print("\nreproducible:", again.getvalue() == out.getvalue())

# %% Without a fill-mask service, those tags get a fixed fallback and each
# failure becomes one line in the incident report.
out, report = io.StringIO(), io.StringIO()
corpus.synthesize(MASKED, out, db, seed=42, report=report)
print("\nno service:", out.getvalue().split("\n")[2])
for line in report.getvalue().splitlines():
    print("  incident:", json.loads(line))
