"""Annotated corpora: loading, statistics and a seeded synthetic generator.

The generator writes sentences over a syllabary (hiragana by default) so the
whole pipeline can run without a hand-annotated corpus.  Phrase templates
follow the usual composition patterns: quantity inside noun phrases, noun
phrases inside prepositional phrases, clauses as objects, and so on.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from .annotation import (
    MAX_LEN, AnnotatedSentence, AnnotationError, PhraseSpan, PhraseType,
    is_comment, parse_annotation, serialize_annotation, validate_tree,
)
from .lexicon import Lexicon, PosTag

SYLLABARY = (
    "あいうえおかきくけこさしすせそたちつてとなにぬねのはひふへほまみむめもやゆよらりるれろわをん"
    "がぎぐげござじずぜぞだぢづでどばびぶべぼぱぴぷぺぽ"
)

# (tag, word length, count); entity-like long nouns come last.
DEFAULT_VOCAB_PLAN = (
    (PosTag.NUMERAL, 1, 8),
    (PosTag.CLASSIFIER, 1, 10),
    (PosTag.PREPOSITION, 1, 6),
    (PosTag.MODAL, 1, 4),
    (PosTag.AUXILIARY, 1, 4),
    (PosTag.NOUN, 1, 15),
    (PosTag.VERB, 1, 15),
    (PosTag.ADJECTIVE, 1, 5),
    (PosTag.NOUN, 2, 200),
    (PosTag.NOUN, 3, 100),
    (PosTag.VERB, 2, 120),
    (PosTag.ADJECTIVE, 2, 50),
    (PosTag.CONJUNCTION, 2, 8),
    (PosTag.ONOMATOPOEIA, 2, 8),
    (PosTag.NOUN, 5, 10),
    (PosTag.NOUN, 6, 10),
    (PosTag.NOUN, 7, 10),
    (PosTag.NOUN, 8, 10),
)

DEFAULT_WEIGHTS = {
    "conjunction": 0.15,   # sentence-initial conjunction
    "modal": 0.2,          # sentence-final modal particle
    "prep": 0.25,          # prepositional phrase before the verb
    "clause": 0.3,         # clause as object (depth permitting)
    "object": 0.6,         # noun-phrase object otherwise
    "np_adj": 0.15,
    "np_entity": 0.1,
    "np_quantity": 0.15,
    "np_compound": 0.12,
    "vp_aux": 0.25,
    "vp_quantity": 0.08,
    "vp_ono": 0.07,
}


class BadConfig(ValueError):
    pass


def default_vocabulary(seed: int = 0, syllabary: str = SYLLABARY) -> dict:
    rng = random.Random(f"vocab-{seed}")
    used = set()
    vocab = {t: [] for t in PosTag}
    for tag, length, count in DEFAULT_VOCAB_PLAN:
        made = 0
        while made < count:
            word = "".join(rng.choice(syllabary) for _ in range(length))
            if word in used:
                if length == 1 and len(used & set(syllabary)) >= len(syllabary):
                    raise BadConfig("syllabary too small for the single-character vocabulary")
                continue
            used.add(word)
            vocab[tag].append(word)
            made += 1
    return vocab


@dataclass
class SynthConfig:
    seed: int = 0
    n: int = 100
    max_depth: int = 3
    max_length: int = MAX_LEN
    vocabulary: dict | None = None
    weights: dict = field(default_factory=dict)
    noise_rate: float = 0.3
    max_len: int = MAX_LEN

    def __post_init__(self):
        if self.n < 0:
            raise BadConfig("n must be >= 0")
        if self.max_depth < 0:
            raise BadConfig("max_depth must be >= 0")
        if not 4 <= self.max_length <= self.max_len:
            raise BadConfig(f"max_length must lie in [4, {self.max_len}]")
        if not 0.0 <= self.noise_rate <= 1.0:
            raise BadConfig("noise_rate must lie in [0, 1]")
        unknown = set(self.weights) - set(DEFAULT_WEIGHTS)
        if unknown:
            raise BadConfig(f"unknown grammar weights {sorted(unknown)}")
        for key, p in self.weights.items():
            if not 0.0 <= p <= 1.0:
                raise BadConfig(f"weight {key} must lie in [0, 1]")
        if self.vocabulary is not None:
            for tag in (PosTag.NOUN, PosTag.VERB):
                if not self.vocabulary.get(tag):
                    raise BadConfig(f"vocabulary needs {tag.stem} words")

    def weight(self, key):
        return self.weights.get(key, DEFAULT_WEIGHTS[key])


class _Builder:
    """Accumulates characters, phrase spans and word boundaries."""

    def __init__(self):
        self.chars = []
        self.spans = []
        self.words = []  # (start, length)

    @property
    def pos(self):
        return len(self.chars)

    def word(self, w):
        self.words.append((self.pos, len(w)))
        self.chars.extend(w)

    def phrase(self, ptype, fill):
        start = self.pos
        fill()
        self.spans.append(PhraseSpan(start, self.pos - start, ptype))


class _Grammar:
    def __init__(self, cfg: SynthConfig, vocab: dict, rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        self.vocab = {t: list(ws) for t, ws in vocab.items()}
        nouns = self.vocab[PosTag.NOUN]
        self.entities = [w for w in nouns if len(w) >= 5] or nouns
        self.common = [w for w in nouns if len(w) < 5] or nouns

    def pick(self, tag):
        words = self.vocab.get(tag) or self.vocab[PosTag.NOUN]
        return self.rng.choice(words)

    def chance(self, key):
        return self.rng.random() < self.cfg.weight(key)

    def noun_phrase(self, b, budget):
        r = self.rng.random()
        w = self.cfg.weight
        cut_adj = w("np_adj")
        cut_ent = cut_adj + w("np_entity")
        cut_q = cut_ent + w("np_quantity")
        cut_c = cut_q + w("np_compound")
        if r < cut_adj and self.vocab.get(PosTag.ADJECTIVE):
            b.phrase(PhraseType.NOUN, lambda: (b.word(self.pick(PosTag.ADJECTIVE)),
                                               b.word(self.rng.choice(self.common))))
        elif r < cut_ent:
            b.phrase(PhraseType.NOUN, lambda: b.word(self.rng.choice(self.entities)))
        elif r < cut_q and budget >= 2 and self.vocab.get(PosTag.NUMERAL) and self.vocab.get(PosTag.CLASSIFIER):
            b.phrase(PhraseType.NOUN, lambda: (self.quantity(b), b.word(self.rng.choice(self.common))))
        elif r < cut_c and budget >= 2:
            def fill():
                inner = self.rng.choice(self.entities if self.rng.random() < 0.5 else self.common)
                b.phrase(PhraseType.NOUN, lambda: b.word(inner))
                b.word(self.rng.choice(self.common))
            b.phrase(PhraseType.NOUN, fill)
        else:
            b.phrase(PhraseType.NOUN, lambda: b.word(self.rng.choice(self.common)))

    def quantity(self, b):
        b.phrase(PhraseType.QUANTITY, lambda: (b.word(self.pick(PosTag.NUMERAL)),
                                               b.word(self.pick(PosTag.CLASSIFIER))))

    def verb_phrase(self, b, budget):
        r = self.rng.random()
        w = self.cfg.weight
        cut_aux = w("vp_aux")
        cut_q = cut_aux + w("vp_quantity")
        cut_o = cut_q + w("vp_ono")
        if r < cut_aux and self.vocab.get(PosTag.AUXILIARY):
            b.phrase(PhraseType.VERB, lambda: (b.word(self.pick(PosTag.VERB)), b.word(self.pick(PosTag.AUXILIARY))))
        elif r < cut_q and budget >= 2 and self.vocab.get(PosTag.NUMERAL) and self.vocab.get(PosTag.CLASSIFIER):
            b.phrase(PhraseType.VERB, lambda: (self.quantity(b), b.word(self.pick(PosTag.VERB))))
        elif r < cut_o and self.vocab.get(PosTag.ONOMATOPOEIA):
            b.phrase(PhraseType.VERB, lambda: (b.word(self.pick(PosTag.ONOMATOPOEIA)), b.word(self.pick(PosTag.VERB))))
        else:
            b.phrase(PhraseType.VERB, lambda: b.word(self.pick(PosTag.VERB)))

    def prep_phrase(self, b, budget):
        b.phrase(PhraseType.PREPOSITION, lambda: (b.word(self.pick(PosTag.PREPOSITION)),
                                                  self.noun_phrase(b, budget - 1)))

    def clause(self, b, budget):
        def fill():
            self.noun_phrase(b, budget - 1)
            self.verb_phrase(b, budget - 1)
            self.complement(b, budget - 1)
        b.phrase(PhraseType.CLAUSE, fill)

    def complement(self, b, budget):
        if budget >= 2 and self.chance("clause"):
            self.clause(b, budget)
        elif self.chance("object"):
            self.noun_phrase(b, budget)

    def sentence(self, budget):
        b = _Builder()
        if self.chance("conjunction") and self.vocab.get(PosTag.CONJUNCTION):
            b.phrase(PhraseType.CONJUNCTION, lambda: b.word(self.pick(PosTag.CONJUNCTION)))
        self.noun_phrase(b, budget)
        if budget >= 2 and self.chance("prep") and self.vocab.get(PosTag.PREPOSITION):
            self.prep_phrase(b, budget)
        self.verb_phrase(b, budget)
        self.complement(b, budget)
        if self.chance("modal") and self.vocab.get(PosTag.MODAL):
            b.phrase(PhraseType.MODAL, lambda: b.word(self.pick(PosTag.MODAL)))
        return b


def synth_corpus(cfg: SynthConfig):
    """Generate ``cfg.n`` annotated sentences and the matching lexicon."""
    vocab = cfg.vocabulary if cfg.vocabulary is not None else default_vocabulary(cfg.seed)
    rng = random.Random(cfg.seed)
    grammar = _Grammar(cfg, vocab, rng)
    # Depth counts phrase nodes on a root-to-leaf path; 0 and 1 both mean flat.
    budget = max(cfg.max_depth, 1)

    lexicon = Lexicon(max_len=cfg.max_len)
    for tag in PosTag:
        for word in vocab.get(tag, ()):
            lexicon.add(word, tag)

    corpus = []
    noise_tags = [PosTag.NOUN, PosTag.NOUN, PosTag.VERB, PosTag.ADJECTIVE]
    for _ in range(cfg.n):
        for _attempt in range(200):
            b = grammar.sentence(budget)
            if b.pos <= cfg.max_length:
                break
        else:
            b = _Builder()
            grammar.noun_phrase(b, 1)
            grammar.verb_phrase(b, 1)
        text = "".join(b.chars)
        corpus.append(AnnotatedSentence(text, validate_tree(b.spans)))
        if len(b.words) >= 2 and rng.random() < cfg.noise_rate:
            k = rng.randrange(len(b.words) - 1)
            (s1, n1), (s2, n2) = b.words[k], b.words[k + 1]
            left = rng.randint(1, n1)
            right = rng.randint(1, n2)
            surface = text[s1 + n1 - left:s2 + right]
            if len(surface) <= cfg.max_len:
                lexicon.add(surface, rng.choice(noise_tags))
    return corpus, lexicon


def load_corpus(path, max_len: int = MAX_LEN):
    """Parse a corpus file; returns ``(sentences, [(lineno, message), ...])``."""
    corpus, errors = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if is_comment(line):
                continue
            try:
                corpus.append(parse_annotation(line, max_len))
            except AnnotationError as exc:
                errors.append((lineno, f"{type(exc).__name__}: {exc}"))
    return corpus, errors


def write_corpus(path, corpus) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sent in corpus:
            fh.write(serialize_annotation(sent) + "\n")


def split_corpus(corpus, test_frac: float, seed: int = 0):
    """Shuffle deterministically and split into ``(train, test)``."""
    if not 0.0 <= test_frac <= 1.0:
        raise BadConfig("test fraction must lie in [0, 1]")
    order = list(range(len(corpus)))
    random.Random(seed).shuffle(order)
    cut = len(corpus) - int(round(test_frac * len(corpus)))
    return [corpus[k] for k in order[:cut]], [corpus[k] for k in order[cut:]]


@dataclass
class CorpusStats:
    sentences: int = 0
    lengths: Counter = field(default_factory=Counter)
    span_counts: Counter = field(default_factory=Counter)
    depths: Counter = field(default_factory=Counter)

    @property
    def spans(self):
        return sum(self.span_counts.values())

    @property
    def max_depth(self):
        return max(self.depths, default=0)

    def to_text(self) -> str:
        lines = [f"sentences\t{self.sentences}", f"spans\t{self.spans}"]
        lines += [f"type\t{t.stem}\t{self.span_counts[t]}" for t in PhraseType]
        lines += [f"length\t{k}\t{v}" for k, v in sorted(self.lengths.items())]
        lines += [f"depth\t{k}\t{v}" for k, v in sorted(self.depths.items())]
        return "\n".join(lines) + "\n"


def corpus_stats(corpus) -> CorpusStats:
    stats = CorpusStats()
    for sent in corpus:
        stats.sentences += 1
        stats.lengths[len(sent.text)] += 1
        stats.depths[sent.tree.depth()] += 1
        stats.span_counts.update(s.ptype for s in sent.spans)
    return stats
