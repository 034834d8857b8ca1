import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from phrasewin.annotation import (
    BRACKET_CHARS, AnnotatedSentence, CrossingSpans, DuplicateSpan, EmptyPhrase,
    InvalidTree, OverlongSentence, PhraseNode, PhraseSpan, PhraseTree, PhraseType,
    UnbalancedBracket, parse_annotation, serialize_annotation, validate_tree,
)

from conftest import random_sentence

N, V, Q, P, C, M, CL = (PhraseType.NOUN, PhraseType.VERB, PhraseType.QUANTITY, PhraseType.PREPOSITION,
                        PhraseType.CONJUNCTION, PhraseType.MODAL, PhraseType.CLAUSE)


def triples(sent):
    return {(s.start, s.length, s.ptype) for s in sent.spans}


def test_seven_types_with_brackets_and_stems():
    assert len(PhraseType) == 7
    table = {t: (t.open_char + t.close_char, t.stem) for t in PhraseType}
    assert table == {
        N: ("()", "ming"), V: ("[]", "dong"), Q: ("{}", "shu"), P: ("<>", "jie"),
        C: ("##", "lian"), M: ("@@", "yu"), CL: ("/\\", "cong"),
    }


def test_parse_simple_sentence():
    a = parse_annotation("(我)[爱](祖国)")
    assert a.text == "我爱祖国"
    assert triples(a) == {(0, 1, N), (1, 1, V), (2, 2, N)}
    assert all(not node.children for node in a.tree.roots)
    assert len(a.tree.roots) == 3


def test_parse_empty():
    a = parse_annotation("")
    assert a.text == "" and a.tree.roots == ()


def test_parse_serial_verb_clause():
    a = parse_annotation("(我)/[出去][骑](车)[打](球)\\")
    assert a.text == "我出去骑车打球"
    roots = a.tree.roots
    assert [r.span for r in roots] == [PhraseSpan(0, 1, N), PhraseSpan(1, 6, CL)]
    assert [c.span for c in roots[1].children] == [
        PhraseSpan(1, 2, V), PhraseSpan(3, 1, V), PhraseSpan(4, 1, N),
        PhraseSpan(5, 1, V), PhraseSpan(6, 1, N),
    ]


def test_parse_prepositional_with_quantity():
    a = parse_annotation("<在({这次}考试中)>")
    assert a.text == "在这次考试中"
    assert triples(a) == {(0, 6, P), (1, 5, N), (1, 2, Q)}
    assert a.tree.depth() == 3


@pytest.mark.parametrize("text, error", [
    ("(我", UnbalancedBracket),
    ("我)", UnbalancedBracket),
    ("(我]", UnbalancedBracket),
    ("(#我)#", UnbalancedBracket),
    ("#(我#)", UnbalancedBracket),
    ("/我^", UnbalancedBracket),
    ("()", EmptyPhrase),
    ("(我)[]", EmptyPhrase),
    ("##", EmptyPhrase),
    ("((我))", DuplicateSpan),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_annotation(text)


def test_overlong():
    parse_annotation("(" + "我" * 50 + ")")
    with pytest.raises(OverlongSentence):
        parse_annotation("(" + "我" * 51 + ")")
    assert parse_annotation("我" * 51, max_len=60).text == "我" * 51


def test_symmetric_pairs_and_alt_clause():
    a = parse_annotation("#但是#(他)[来]@吗@")
    assert triples(a) == {(0, 2, C), (2, 1, N), (3, 1, V), (4, 1, M)}
    b = parse_annotation("(他)[说]^(计算机)[正在改变](世界)^")
    c = parse_annotation("(他)[说]/(计算机)[正在改变](世界)\\")
    assert b == c
    assert serialize_annotation(b) == "(他)[说]/(计算机)[正在改变](世界)\\"


def test_same_extent_two_types_nest_by_rank():
    # the bracket order in the input does not matter; clause is outermost
    a = parse_annotation("(/他\\)")
    b = parse_annotation("/(他)\\")
    assert a == b
    assert a.tree.roots[0].span.ptype is CL
    assert serialize_annotation(a) == "/(他)\\"


def test_serialize_examples():
    a = AnnotatedSentence.from_spans("我爱祖国", [PhraseSpan(0, 1, N), PhraseSpan(1, 1, V), PhraseSpan(2, 2, N)])
    assert serialize_annotation(a) == "(我)[爱](祖国)"
    assert serialize_annotation(AnnotatedSentence("abc")) == "abc"


def test_serialize_rejects_noncanonical_tree():
    inner = PhraseNode(PhraseSpan(0, 1, N))
    bad = AnnotatedSentence("ab", PhraseTree((PhraseNode(PhraseSpan(0, 2, N)), inner)))
    with pytest.raises(InvalidTree):
        serialize_annotation(bad)
    with pytest.raises(InvalidTree):
        AnnotatedSentence("a", PhraseTree((PhraseNode(PhraseSpan(0, 2, N)),)))


def test_validate_tree_nesting():
    tree = validate_tree([PhraseSpan(0, 7, N), PhraseSpan(7, 3, N), PhraseSpan(0, 10, N)])
    assert len(tree.roots) == 1
    root = tree.roots[0]
    assert root.span == PhraseSpan(0, 10, N)
    assert [c.span for c in root.children] == [PhraseSpan(0, 7, N), PhraseSpan(7, 3, N)]
    assert validate_tree([]) == PhraseTree()


def test_validate_tree_crossing():
    with pytest.raises(CrossingSpans) as exc:
        validate_tree([PhraseSpan(0, 3, N), PhraseSpan(2, 3, V)])
    assert exc.value.pairs == [((0, 3), (2, 3))]


def test_validate_tree_lists_every_crossing_pair():
    spans = [PhraseSpan(0, 3, N), PhraseSpan(2, 3, V), PhraseSpan(4, 2, N), PhraseSpan(10, 1, N)]
    with pytest.raises(CrossingSpans) as exc:
        validate_tree(spans)
    assert exc.value.pairs == [((0, 3), (2, 3)), ((2, 3), (4, 2))]


def test_validate_tree_order_insensitive(rng):
    for _ in range(50):
        sent = random_sentence(rng, 30, 4)
        spans = sent.spans
        for _ in range(5):
            rng.shuffle(spans)
            assert validate_tree(spans) == sent.tree


def test_validate_tree_permutations_small():
    spans = [PhraseSpan(0, 4, CL), PhraseSpan(0, 4, N), PhraseSpan(0, 1, Q), PhraseSpan(2, 2, V)]
    trees = {validate_tree(p) for p in itertools.permutations(spans)}
    assert len(trees) == 1


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_round_trip_property(seed):
    sent = random_sentence(random.Random(seed))
    text = serialize_annotation(sent)
    assert parse_annotation(text) == sent
    assert "".join(ch for ch in text if ch not in BRACKET_CHARS) == sent.text


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_serialized_brackets_are_balanced(seed):
    text = serialize_annotation(random_sentence(random.Random(seed)))
    closers = {t.close_char: t for t in PhraseType}
    stack = []
    for ch in text:
        if ch in "([{</":
            stack.append(ch)
        elif ch in ")]}>\\":
            t = closers[ch]
            assert stack.pop() == t.open_char
        elif ch in "#@":
            if stack and stack[-1] == ch:
                stack.pop()
            else:
                stack.append(ch)
    assert stack == []


def test_serialize_rejects_nested_symmetric_pairs():
    sent = AnnotatedSentence.from_spans("但是", [PhraseSpan(0, 2, C), PhraseSpan(0, 1, N), PhraseSpan(1, 1, C)])
    with pytest.raises(InvalidTree):
        serialize_annotation(sent)


def test_random_trees_respect_depth(rng):
    assert max(random_sentence(rng).tree.depth() for _ in range(300)) <= 4
