import random

import pytest

from phrasewin.annotation import AnnotatedSentence, PhraseSpan, PhraseType, parse_annotation
from phrasewin.gridcodec import FlatPolicy, LabelGrid, Reject, decode_labels, parse_tag
from phrasewin.metrics import PUBLISHED_NOTICE, Counts, MisalignedCorpora, evaluate_flat, evaluate_spans

from conftest import random_sentence

N, V = PhraseType.NOUN, PhraseType.VERB


def sent(text, spans):
    return AnnotatedSentence.from_spans(text, [PhraseSpan(*s) for s in spans])


def test_counts_zero_division():
    c = Counts()
    assert (c.precision, c.recall, c.f1) == (0.0, 0.0, 0.0)
    assert Counts(tp=0, fp=3).precision == 0.0


def test_partial_prediction():
    gold = [sent("我爱", [(0, 1, N), (1, 1, V)])]
    pred = [sent("我爱", [(0, 1, N)])]
    m = evaluate_spans(gold, pred).micro
    assert (m.tp, m.fp, m.fn) == (1, 0, 1)
    assert m.precision == 1.0 and m.recall == 0.5
    assert abs(m.f1 - 2 / 3) < 1e-12


def test_biibii_fragment_scores_zero():
    grid = LabelGrid(6, 10)
    for i, label in enumerate("B-ming I-ming I-ming B-ming I-ming I-ming".split()):
        grid[6, i] = parse_tag(label)
    report = decode_labels(grid)
    gold = [sent("abcdef", [(0, 6, N)])]
    pred = [AnnotatedSentence.from_spans("abcdef", report.spans)]
    result = evaluate_spans(gold, pred, [report])
    m = result.micro
    assert (m.tp, m.fn, m.recall) == (0, 1, 0.0)
    assert result.rejections[Reject.WRONG_LENGTH] == 2


def test_type_confusion_is_fp_and_fn():
    r = evaluate_spans([sent("ab", [(0, 2, N)])], [sent("ab", [(0, 2, V)])])
    assert (r.per_type[N].fn, r.per_type[V].fp, r.micro.tp) == (1, 1, 0)


def test_identity(rng):
    corpus = [random_sentence(rng) for _ in range(50)]
    r = evaluate_spans(corpus, corpus)
    for t, c in r.per_type.items():
        if c.tp:
            assert c.precision == c.recall == c.f1 == 1.0
        assert c.fp == c.fn == 0
    assert r.sentences == 50 and r.token_accuracy == 1.0


def test_identity_spanless():
    r = evaluate_spans([AnnotatedSentence("abc")], [AnnotatedSentence("abc")])
    m = r.micro
    assert (m.tp, m.fp, m.fn) == (0, 0, 0)


def test_bounds_and_micro_consistency():
    rng = random.Random(5)
    for _ in range(50):
        gold, pred = [], []
        for _ in range(5):
            g = random_sentence(rng, 20, 3)
            p = random_sentence(rng, 20, 3)
            gold.append(g)
            pred.append(AnnotatedSentence(g.text, p.tree) if len(p.text) == len(g.text) else
                        AnnotatedSentence.from_spans(g.text, [s for s in g.spans if rng.random() < 0.5]))
        r = evaluate_spans(gold, pred)
        assert r.micro.tp == sum(c.tp for c in r.per_type.values())
        for t, c in list(r.per_type.items()) + [(None, r.micro)]:
            assert 0 <= c.precision <= 1 and 0 <= c.recall <= 1 and 0 <= c.f1 <= 1
        for t in PhraseType:
            n_gold = sum(s.ptype is t for g in gold for s in g.spans)
            n_pred = sum(s.ptype is t for p in pred for s in p.spans)
            assert r.per_type[t].tp <= min(n_gold, n_pred)


NESTED = [(0, 10, N), (0, 7, N), (7, 3, N)]


def test_flat_outermost_identity():
    g = [sent("中华人民共和国国务院", NESTED)]
    r = evaluate_flat(g, g, FlatPolicy.OUTERMOST)
    m = r.micro
    assert (m.tp, m.fp, m.fn) == (1, 0, 0)


def test_flat_missing_inner_spans():
    g = [sent("中华人民共和国国务院", NESTED)]
    p = [sent("中华人民共和国国务院", [(0, 10, N)])]
    assert evaluate_flat(g, p, "outermost").micro.f1 == 1.0
    inner = evaluate_flat(g, p, "innermost").micro
    assert inner.recall == 0.0 and inner.fn == 2


def test_misaligned():
    with pytest.raises(MisalignedCorpora):
        evaluate_spans([AnnotatedSentence("a")], [])
    with pytest.raises(MisalignedCorpora):
        evaluate_spans([AnnotatedSentence("a")], [AnnotatedSentence("b")])
    with pytest.raises(MisalignedCorpora):
        evaluate_flat([AnnotatedSentence("a")], [AnnotatedSentence("b")])


def test_tsv_and_table():
    r = evaluate_spans([parse_annotation("(我)[爱](祖国)")], [parse_annotation("(我)[爱]祖国")])
    rows = r.to_tsv().splitlines()
    assert rows[0] == "type\ttp\tfp\tfn\tP\tR\tF1"
    assert rows[1] == "ming\t1\t0\t1\t1.0000\t0.5000\t0.6667"
    assert rows[-1].startswith("micro\t2\t0\t1\t")
    assert PUBLISHED_NOTICE not in r.to_table()
    assert r.to_table(compare_published=True).rstrip().endswith(PUBLISHED_NOTICE)
