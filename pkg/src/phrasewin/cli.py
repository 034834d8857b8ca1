"""Command-line entry point: ``phrasewin <subcommand> ...``."""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import __version__
from .annotation import BRACKET_CHARS, MAX_LEN, AnnotationError, is_comment, parse_annotation, serialize_annotation
from .corpus import SynthConfig, corpus_stats, load_corpus, split_corpus, synth_corpus, write_corpus
from .gridcodec import FlatPolicy, decode_labels, encode_labels, project_flat, tag_label
from .lexicon import LexiconError, build_matcher, encode_knowledge, find_matches, format_tags, load_lexicon
from .metrics import MisalignedCorpora, evaluate_flat, evaluate_spans
from .tagger import ModelFormatError, TaggerModel, TrainConfig, predict, predict_corpus, train


class ProcessingError(Exception):
    pass


def _read_lexicon(path, max_len):
    with open(path, encoding="utf-8") as fh:
        return load_lexicon(fh, max_len)


def _read_corpus(path, max_len):
    corpus, errors = load_corpus(path, max_len)
    if errors:
        lineno, msg = errors[0]
        raise ProcessingError(f"{path}: {len(errors)} bad line(s); first at line {lineno}: {msg}")
    return corpus


class _Output:
    """Writes to --out if given, otherwise stdout."""

    def __init__(self, path):
        self.path = path
        self.fh = open(path, "w", encoding="utf-8", newline="\n") if path else sys.stdout

    def write(self, text):
        self.fh.write(text)

    def close(self):
        if self.path:
            self.fh.close()


def cmd_validate(args):
    corpus, errors = load_corpus(args.corpus, args.max_len)
    for lineno, msg in errors:
        print(f"{args.corpus}:{lineno}: {msg}")
    print(f"{len(corpus)} valid sentence(s), {len(errors)} error(s)")
    return 1 if errors else 0


def cmd_stats(args):
    stats = corpus_stats(_read_corpus(args.corpus, args.max_len))
    out = _Output(args.out)
    out.write(stats.to_text())
    out.close()
    return 0


def cmd_match(args):
    matcher = build_matcher(_read_lexicon(args.lexicon, args.max_len))
    for text in args.text:
        for m in find_matches(matcher, text):
            print(f"{m.start}\t{m.length}\t{text[m.start:m.end]}\t{format_tags(m.tags)}")
        if len(args.text) > 1:
            print()
    return 0


def cmd_encode(args):
    corpus = _read_corpus(args.corpus, args.max_len)
    matcher = None if args.labels else build_matcher(_read_lexicon(args.lexicon, args.max_len))
    out = _Output(args.out)
    for k, sent in enumerate(corpus):
        out.write(f"# sentence\t{k}\t{sent.text}\n")
        if args.labels:
            out.write(encode_labels(sent, args.max_len).to_text())
        else:
            kg = encode_knowledge(find_matches(matcher, sent.text), len(sent.text), args.max_len,
                                  args.dmax or args.max_len)
            out.write(kg.to_text())
    out.close()
    return 0


def cmd_synth(args):
    cfg = SynthConfig(seed=args.seed, n=args.n, max_depth=args.depth, noise_rate=args.noise,
                      max_length=args.max_length or args.max_len, max_len=args.max_len)
    corpus, lexicon = synth_corpus(cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    write_corpus(os.path.join(args.out_dir, "corpus.txt"), corpus)
    with open(os.path.join(args.out_dir, "lexicon.tsv"), "w", encoding="utf-8", newline="\n") as fh:
        lexicon.dump(fh)
    if args.test_frac:
        train_part, test_part = split_corpus(corpus, args.test_frac, args.seed)
        write_corpus(os.path.join(args.out_dir, "train.txt"), train_part)
        write_corpus(os.path.join(args.out_dir, "test.txt"), test_part)
    print(f"wrote {len(corpus)} sentences and {len(lexicon)} lexicon entries to {args.out_dir}")
    return 0


def cmd_train(args):
    corpus = _read_corpus(args.corpus, args.max_len)
    lexicon = _read_lexicon(args.lexicon, args.max_len) if args.lexicon else None
    cfg = TrainConfig(epochs=args.epochs, lr=args.lr, decay=args.decay, negative_ratio=args.neg_ratio,
                      seed=args.seed, d_max=args.dmax or args.max_len, shuffle=not args.no_shuffle,
                      use_knowledge=not args.no_knowledge, window=args.window, hash_bits=args.hash_bits)
    log = _Output(args.log)
    model, _ = train(corpus, lexicon, cfg, args.max_len,
                     on_epoch=lambda e: (log.write(e.line() + "\n"), log.fh.flush()))
    log.close()
    model.save(args.model_out)
    return 0


def _tag_inputs(source, max_len):
    if os.path.isfile(source):
        texts = []
        with open(source, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\r\n")
                if is_comment(line):
                    continue
                texts.append(parse_annotation(line, max_len).text if set(line) & BRACKET_CHARS else line)
        return texts
    return [source]


def cmd_tag(args):
    model = TaggerModel.load(args.model)
    lexicon = _read_lexicon(args.lexicon, model.max_len) if args.lexicon else None
    texts = _tag_inputs(args.input, model.max_len)
    out = _Output(args.out)
    for pred in predict_corpus(model, texts, lexicon):
        if args.flat:
            flat = project_flat(pred.annotation.spans, len(pred.annotation.text), args.flat)
            out.write(" ".join(tag_label(t) for t in flat) + "\n")
        else:
            out.write(pred.text + "\n")
        if args.report:
            sys.stderr.write(f"# {pred.annotation.text}\n{pred.report.to_text()}")
    out.close()
    return 0


def cmd_eval(args):
    gold = _read_corpus(args.gold, args.max_len)
    pred = _read_corpus(args.pred, args.max_len)
    report = evaluate_flat(gold, pred, args.flat) if args.flat else evaluate_spans(gold, pred)
    out = _Output(args.out)
    out.write(report.to_tsv() if args.tsv else report.to_table(args.compare_published))
    if args.tsv and args.compare_published:
        sys.stderr.write(report.to_table(True).splitlines()[-1] + "\n")
    out.close()
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="phrasewin", description="nested phrase-window chunking")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--max-len", type=int, default=MAX_LEN, help="sentence capacity L")
    parser.add_argument("--manifest", help="write the run manifest here")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a corpus file")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("corpus")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("match", help="list lexicon hits in text")
    p.add_argument("--lexicon", required=True)
    p.add_argument("text", nargs="+")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("encode", help="print knowledge or label grids")
    p.add_argument("--lexicon")
    p.add_argument("--labels", action="store_true")
    p.add_argument("--dmax", type=int)
    p.add_argument("--out")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("synth", help="generate a synthetic corpus and lexicon")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.3)
    p.add_argument("--max-length", type=int)
    p.add_argument("--test-frac", type=float, default=0.0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a tagger")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--decay", action="store_true", help="divide the learning rate by the epoch")
    p.add_argument("--neg-ratio", type=float, default=2.0)
    p.add_argument("--dmax", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--hash-bits", type=int, default=18)
    p.add_argument("--no-knowledge", action="store_true")
    p.add_argument("--no-shuffle", action="store_true")
    p.add_argument("--log", help="training log file (default stdout)")
    p.add_argument("--model-out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tag", help="tag sentences with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--flat", choices=[f.value for f in FlatPolicy])
    p.add_argument("--report", action="store_true", help="decode reports to stderr")
    p.add_argument("--out")
    p.add_argument("input", help="a sentence, or a file with one sentence per line")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("eval", help="score predictions against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--flat", choices=[f.value for f in FlatPolicy])
    p.add_argument("--tsv", action="store_true")
    p.add_argument("--compare-published", action="store_true",
                   help="print a notice about published CPWD figures")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)
    return parser


def _primary_output(args):
    if getattr(args, "model_out", None):
        return args.model_out
    if getattr(args, "out_dir", None):
        return os.path.join(args.out_dir, "corpus.txt")
    return getattr(args, "out", None)


def write_manifest(args, argv, wall):
    fields = [("subcommand", args.command), ("version", __version__), ("argv", " ".join(argv))]
    fields += sorted((k, v) for k, v in vars(args).items() if k not in ("func", "command", "manifest"))
    fields.append(("wall_time_s", f"{wall:.3f}"))
    text = "".join(f"{k}\t{'' if v is None else v}\n" for k, v in fields)
    target = args.manifest or (_primary_output(args) and _primary_output(args) + ".manifest")
    if target:
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stderr.write("".join(f"# {line}\n" for line in text.splitlines()))


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "encode" and not args.labels and not args.lexicon:
        parser.print_usage(sys.stderr)
        sys.stderr.write("phrasewin encode: --lexicon is required unless --labels is given\n")
        return 2
    start = time.perf_counter()
    try:
        code = args.func(args)
    except (ProcessingError, AnnotationError, LexiconError, MisalignedCorpora, ModelFormatError,
            ValueError, OSError) as exc:
        sys.stderr.write(f"phrasewin {args.command}: {exc}\n")
        code = 1
    write_manifest(args, argv, time.perf_counter() - start)
    return code


def main():
    sys.exit(run())
