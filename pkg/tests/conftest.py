import random

import numpy as np
import pytest

from phrasewin.annotation import AnnotatedSentence, PhraseSpan, PhraseType
from phrasewin.gridcodec import N_TAGS, encode_labels
from phrasewin.lexicon import Lexicon, PosTag, build_matcher
from phrasewin.tagger import FeatureConfig, TaggerModel, featurize, knowledge_grid, loss, sample_mask

ACCEPTANCE_LINES = []

ALPHABET = "我爱祖国中华人民共和国一辆汽车停在马路边abcdefgh"
TYPES = list(PhraseType)
SYMMETRIC = {PhraseType.CONJUNCTION, PhraseType.MODAL}


def random_spans(rng, length, max_depth, same_extent=True):
    """Random nested-or-disjoint span set over ``[0, length)``."""
    spans = set()

    def fill(lo, hi, depth, banned):
        # banned: symmetric-bracket types already open above this level
        if depth == 0 or hi <= lo:
            return
        allowed = [t for t in TYPES if t not in banned]
        pos = lo
        while pos < hi:
            if rng.random() < 0.35:
                pos += 1
                continue
            size = rng.randint(1, hi - pos)
            if not same_extent and depth < max_depth and pos == lo and size == hi - lo:
                # a child may not repeat its parent's extent
                if size == 1:
                    return
                size -= 1
            ptype = rng.choice(allowed)
            spans.add(PhraseSpan(pos, size, ptype))
            inner = banned | ({ptype} & SYMMETRIC)
            if same_extent and depth >= 2 and rng.random() < 0.1:
                other = rng.choice([t for t in allowed if t is not ptype])
                spans.add(PhraseSpan(pos, size, other))
                fill(pos, pos + size, depth - 2, inner | ({other} & SYMMETRIC))
            else:
                fill(pos, pos + size, depth - 1, inner)
            pos += size

    fill(0, length, max_depth, frozenset())
    return spans


def random_sentence(rng, max_length=50, max_depth=4, same_extent=True):
    length = rng.randint(0, max_length)
    text = "".join(rng.choice(ALPHABET) for _ in range(length))
    return AnnotatedSentence.from_spans(text, random_spans(rng, length, max_depth, same_extent))


def random_model(seed):
    rng = random.Random(seed)
    nrng = np.random.default_rng(seed)
    cfg = FeatureConfig(window=1, hash_bits=8, use_knowledge=rng.random() < 0.7)
    model = TaggerModel(cfg, max_len=8)
    model.weights[:] = nrng.normal(scale=0.5, size=model.weights.shape)
    sent = random_sentence(rng, 8, 3, same_extent=False)
    words = {sent.text[s.start:s.end] for s in sent.spans} or {"x"}
    lex = Lexicon({w: {rng.choice(list(PosTag))} for w in words})
    kg = knowledge_grid(sent.text, build_matcher(lex), 8)
    sf = featurize(model, sent.text, kg)
    gold = encode_labels(sent, 8)
    mask = sample_mask(gold, 2.0, seed) if sent.text else np.zeros((8, 8), bool)
    return model, sf, gold, mask, kg


def gradient_check(seed, h=1e-5):
    """Largest relative error between analytic and central-difference gradients."""
    model, sf, gold, mask, _ = random_model(seed)
    if not mask.any():
        return 0.0
    _, ids, grads = model.loss_and_grad(sf, gold, mask)
    dense = np.zeros_like(model.weights)
    np.add.at(dense, ids, grads)

    def f():
        return loss(model.grid_logits(sf), gold, mask)

    rng = np.random.default_rng(seed + 1)
    touched = np.unique(ids)
    picks = [(int(r), int(c)) for r in rng.choice(touched, size=min(6, len(touched)), replace=False)
             for c in rng.choice(N_TAGS, size=2, replace=False)]
    worst = 0.0
    for r, c in picks:
        old = model.weights[r, c]
        model.weights[r, c] = old + h
        up = f()
        model.weights[r, c] = old - h
        down = f()
        model.weights[r, c] = old
        fd = (up - down) / (2 * h)
        denom = max(abs(fd), abs(dense[r, c]), 1e-4)
        worst = max(worst, abs(fd - dense[r, c]) / denom)
    return worst


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture(scope="session")
def small_synth():
    from phrasewin.corpus import SynthConfig, synth_corpus
    return synth_corpus(SynthConfig(seed=5, n=200))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda x: int(x.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
