import pytest

from phrasewin.annotation import PhraseType, parse_annotation
from phrasewin.corpus import (
    BadConfig, SynthConfig, corpus_stats, default_vocabulary, load_corpus, split_corpus,
    synth_corpus, write_corpus,
)
from phrasewin.lexicon import PosTag, build_matcher, find_matches


def test_load_corpus_reports_bad_lines(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("(我)[爱](祖国)\n# comment\n(他[来)]\n\n[去]\n", encoding="utf-8")
    corpus, errors = load_corpus(path)
    assert [s.text for s in corpus] == ["我爱祖国", "去"]
    assert len(errors) == 1 and errors[0][0] == 3
    assert errors[0][1].startswith("UnbalancedBracket")


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("", encoding="utf-8")
    assert load_corpus(path) == ([], [])


def test_write_load_round_trip(tmp_path, small_synth):
    corpus, _ = small_synth
    path = tmp_path / "c.txt"
    write_corpus(path, corpus)
    again, errors = load_corpus(path)
    assert errors == [] and again == corpus


def test_synth_deterministic():
    a = synth_corpus(SynthConfig(seed=3, n=50))
    b = synth_corpus(SynthConfig(seed=3, n=50))
    assert a[0] == b[0] and a[1] == b[1]
    assert synth_corpus(SynthConfig(seed=4, n=50))[0] != a[0]


@pytest.mark.parametrize("depth", [0, 1])
def test_synth_flat(depth):
    corpus, _ = synth_corpus(SynthConfig(seed=1, n=200, max_depth=depth))
    assert all(s.tree.depth() <= 1 for s in corpus)
    assert not any(sp.ptype is PhraseType.CLAUSE for s in corpus for sp in s.spans)


def test_synth_depth_cap():
    corpus, _ = synth_corpus(SynthConfig(seed=2, n=500, max_depth=3))
    stats = corpus_stats(corpus)
    assert stats.max_depth == 3
    assert stats.span_counts[PhraseType.CLAUSE] > 0


def test_synth_lengths():
    corpus, _ = synth_corpus(SynthConfig(seed=2, n=300, max_length=20))
    assert max(len(s.text) for s in corpus) <= 20


def test_synth_lexicon_covers_vocabulary(small_synth):
    _, lex = small_synth
    vocab = default_vocabulary(5)
    for tag, words in vocab.items():
        for w in words:
            assert tag in lex[w]


def test_synth_has_long_entities(small_synth):
    _, lex = small_synth
    assert any(len(w) >= 7 and PosTag.NOUN in tags for w, tags in lex.items())


def test_noise_entries_overlap_phrase_boundaries():
    vocab_words = {w for ws in default_vocabulary(8).values() for w in ws}
    noisy = synth_corpus(SynthConfig(seed=8, n=300, noise_rate=1.0))[1]
    clean = synth_corpus(SynthConfig(seed=8, n=300, noise_rate=0.0))[1]
    extra = [w for w, _ in noisy.items() if w not in vocab_words]
    assert {w for w, _ in clean.items()} == vocab_words
    assert len(extra) > 50
    # a noise hit straddles the boundary between two adjacent words
    corpus = synth_corpus(SynthConfig(seed=8, n=300, noise_rate=1.0))[0]
    matcher = build_matcher(noisy)
    crossing = 0
    for s in corpus:
        spans = s.spans
        for m in find_matches(matcher, s.text):
            if s.text[m.start:m.end] in extra:
                crossing += any(m.start < sp.start < m.end < sp.end or sp.start < m.start < sp.end < m.end
                                for sp in spans)
    assert crossing > 0


def test_bad_config():
    with pytest.raises(BadConfig):
        SynthConfig(n=-1)
    with pytest.raises(BadConfig):
        SynthConfig(noise_rate=2)
    with pytest.raises(BadConfig):
        SynthConfig(max_length=60)
    with pytest.raises(BadConfig):
        SynthConfig(weights={"nope": 0.1})


def test_split_corpus(small_synth):
    corpus, _ = small_synth
    train, test = split_corpus(corpus, 0.25, seed=1)
    assert len(train) == 150 and len(test) == 50
    assert sorted(map(id, train + test)) == sorted(map(id, corpus))
    assert split_corpus(corpus, 0.25, seed=1) == (train, test)


def test_stats_simple():
    stats = corpus_stats([parse_annotation("(我)[爱](祖国)")])
    assert stats.sentences == 1 and stats.spans == 3
    assert stats.span_counts[PhraseType.NOUN] == 2 and stats.span_counts[PhraseType.VERB] == 1
    assert stats.lengths == {4: 1} and stats.depths == {1: 1}
    text = stats.to_text()
    assert "sentences\t1\n" in text and "type\tming\t2\n" in text
