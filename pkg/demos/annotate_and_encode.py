"""
Bracketed phrases and the per-length label grid
===============================================

Parse an annotated sentence, look at its phrase forest, write it into the
label grid and read it back.  Then break a row on purpose and see what the
decoder rejects.
"""

from phrasewin import parse_annotation, serialize_annotation
from phrasewin.gridcodec import LabelGrid, decode_labels, encode_labels, parse_tag, tag_label

# Brackets: () noun, [] verb, {} quantity, <> preposition, #..# conjunction,
# @..@ modal, /..\ clause.  Offsets refer to the text without brackets.
sent = parse_annotation("(我)/[出去][骑](车)[打](球)\\")
print(sent.text)
for node, depth in sent.tree.walk():
    s = node.span
    print("  " * depth + f"{s.ptype.stem} ({s.start},{s.length}) {sent.surface(s)}")

# Row n of the grid holds exactly the phrases of length n.
grid = encode_labels(sent, max_len=8)
for n in range(1, 8):
    print(n, " ".join(f"{tag_label(t):7}" for t in grid.row(n)[:len(sent.text)]))

report = decode_labels(grid)
print(serialize_annotation(sent) == serialize_annotation(type(sent).from_spans(sent.text, report.spans)))

# A row-2 run of three cells cannot be a length-2 phrase.
bad = LabelGrid(5, 8)
for i, label in enumerate(["B-ming", "I-ming", "I-ming"]):
    bad[2, i] = parse_tag(label)
# and a run may not start with an inside tag
for i in range(3):
    bad[3, i] = parse_tag("I-dong")
print(decode_labels(bad).to_text())
