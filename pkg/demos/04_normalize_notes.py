"""
Notes to a sentence-per-line corpus
===================================

Raw notes mix prose, numbered lists and hard line wraps. Normalizing turns
each note into one sentence per line and ends it with a blank line. Masks are
never split, even when a line break falls inside one.
"""

import io

from pseudophi import corpus
from pseudophi.corpus import NoteRecord
from pseudophi.segment import SegmenterConfig, segment

NOTE = """Admission note. Pt seen by Dr. [**Last Name
(STitle) 2601**] today, given 5 mg p.o. q.d. for pain.
Vitals:
1. HR 80
2. BP
120/80
- temp 98.6

Plan: d/c home on [**2151-7-16**]. F/u with PCP."""

# %% Abbreviations such as "Dr." and "p.o." do not end sentences. A wrapped
# list item is joined back into one line.
for line in segment(NOTE):
    print(repr(line))

# %% List reconstruction can be switched off.
print("\nwithout list reconstruction:")
for line in segment("- HR 80\n- BP\n120/80", SegmenterConfig(reconstruct_lists=False)):
    print(repr(line))

# %% normalize() streams many notes. A note that is not valid UTF-8 is skipped
# and reported as an incident, unless strict=True turns that into an error.
notes = [NoteRecord("1", NOTE), NoteRecord("2", b"Caf\xe9 latte. Bad bytes."), NoteRecord("3", "Short one.")]
out = io.StringIO()
incidents = corpus.normalize(notes, out)
print("\n" + out.getvalue())
print("skipped:", [(i.note_id, i.kind) for i in incidents])
