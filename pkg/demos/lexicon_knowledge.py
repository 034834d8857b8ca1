"""
Lexicon hits as a knowledge grid
================================

Every lexicon word found in a sentence marks one cell: the row is the word
length and the column is where it starts.  Long entity names land in rows a
short input window would never see.
"""

from phrasewin.lexicon import Lexicon, PosTag, build_matcher, encode_knowledge, find_matches

lex = Lexicon()
for word, tag in [("一辆", PosTag.NUMERAL), ("一辆汽车", PosTag.NOUN), ("汽车", PosTag.NOUN),
                  ("停", PosTag.VERB), ("在", PosTag.PREPOSITION), ("在马路边", PosTag.PREPOSITION),
                  ("马路", PosTag.NOUN), ("路边", PosTag.NOUN), ("马路边", PosTag.NOUN)]:
    lex.add(word, tag)

text = "一辆汽车停在马路边"
matcher = build_matcher(lex)  # Aho-Corasick: one pass finds every occurrence
matches = find_matches(matcher, text)
for m in matches:
    print(m.start, m.length, text[m.start:m.end], ",".join(t.stem for t in sorted(m.tags)))

kg = encode_knowledge(matches, len(text))
for n in range(1, 5):
    row = ["-" * 4] * len(text)
    for (m, i), tags in kg.cells.items():
        if m == n:
            row[i] = "/".join(t.stem for t in sorted(tags))
    print(n, " ".join(f"{c:4}" for c in row))

# Capping the input depth drops the longer hits.
print(encode_knowledge(matches, len(text), d_max=3).dropped, "hits dropped at d_max=3")
