"""Nested phrase-window chunking with lexicon knowledge channels."""

__version__ = "0.1.0"

from .annotation import (
    AnnotatedSentence, PhraseSpan, PhraseTree, PhraseType,
    parse_annotation, serialize_annotation, validate_tree,
)
from .corpus import SynthConfig, corpus_stats, load_corpus, split_corpus, synth_corpus, write_corpus
from .gridcodec import FlatPolicy, LabelGrid, OutputTag, decode_labels, encode_labels, project_flat
from .lexicon import Lexicon, PosTag, build_matcher, encode_knowledge, find_matches, load_lexicon
from .metrics import evaluate_flat, evaluate_spans
from .tagger import TaggerModel, TrainConfig, predict, predict_corpus, train
