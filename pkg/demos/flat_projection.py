"""
Collapsing nested phrases to one layer
======================================

Nested output can be flattened for comparison with ordinary BIO taggers,
keeping either the outermost phrases or the innermost ones.
"""

from phrasewin import evaluate_flat, evaluate_spans, parse_annotation
from phrasewin.gridcodec import project_flat, tag_label

gold = parse_annotation("((中华人民共和国)(国务院))")
for policy in ("outermost", "innermost"):
    print(policy, " ".join(tag_label(t) for t in project_flat(gold.spans, len(gold.text), policy)))

# A prediction that found only the outer phrase
pred = parse_annotation("(中华人民共和国国务院)")
print("nested    F1", evaluate_spans([gold], [pred]).micro.f1)
print("outermost F1", evaluate_flat([gold], [pred], "outermost").micro.f1)
print("innermost F1", evaluate_flat([gold], [pred], "innermost").micro.f1)
