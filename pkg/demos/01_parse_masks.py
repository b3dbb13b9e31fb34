"""
Reading redaction masks
=======================

De-identified notes hide protected details behind masks such as
``[**Last Name (STitle) 2601**]``. This walk-through scans a few lines, shows
what each mask is made of and counts masks per tag.
"""

from pseudophi import corpus
from pseudophi.masks import byte_span, classify, scan_line, scan_line_partial, splice

NOTE = [
    "Seen by Dr. [**Last Name (STitle) 2601**] on [**2151-7-16**].",
    "Pt is a [**Age over 90 **] yo woman from [**Hospital1 18**], call [**Telephone/Fax (1) 3**].",
    "Family ([**Known firstname 22**] [**Known lastname 1234**]) at bedside.",
    "Résumé of stay at [**Location (un) 5**] attached.",
]

# %% Each mask has a descriptor, which may be followed by a (hint) or an entity id.
# Bare masks like [**2151-7-16**] carry the value shape directly.
for line in NOTE:
    for tok in scan_line(line):
        print(f"{tok.raw:<36} tag={classify(tok).value:<15} descriptor={tok.descriptor!r} "
              f"hint={tok.type_hint!r} id={tok.entity_id}")

# %% Spans count code points. byte_span converts them for byte-oriented tools,
# which matters as soon as a line holds non-ASCII text.
line = NOTE[3]
tok = scan_line(line)[0]
print("\ncode points:", (tok.start, tok.end), " bytes:", byte_span(line, tok))

# %% Splicing the raw masks back in reproduces the input exactly.
assert all(splice(l, scan_line(l), [t.raw for t in scan_line(l)]) == l for l in NOTE)

# %% Broken masks raise in scan_line. scan_line_partial keeps the good ones
# and reports the rest.
good, errors = scan_line_partial("ok [**Name 1**] then [**never closed")
print("\npartial scan:", [t.raw for t in good], [str(e) for e in errors])

# %% A census counts masks per tag; a mask is one token.
c = corpus.census_lines(NOTE)
print("\nmasks:", c.masks, "tokens:", c.tokens, f"mask fraction: {c.mask_fraction:.2f}")
print({tag: n for tag, n in c.to_json()["by_tag"].items() if n})
