"""Span-exact evaluation of nested phrase predictions.

A predicted span counts only when start, length and type all match a gold
span; a phrase with a single wrong character tag is simply wrong.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .annotation import PhraseType
from .gridcodec import FlatPolicy, Reject, flat_spans, project_flat

PUBLISHED_NOTICE = (
    "NOTICE: F1 figures published for the original CPWD corpus (86-92) are not "
    "comparison targets. This report comes from a sparse linear tagger; on the "
    "synthetic corpus only the direction of an effect is meaningful."
)


class MisalignedCorpora(ValueError):
    pass


@dataclass
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __iadd__(self, other):
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn
        return self


@dataclass
class EvalReport:
    per_type: dict = field(default_factory=lambda: {t: Counts() for t in PhraseType})
    rejections: Counter = field(default_factory=Counter)
    sentences: int = 0
    token_correct: int = 0
    token_total: int = 0

    @property
    def micro(self) -> Counts:
        total = Counts()
        for c in self.per_type.values():
            total += c
        return total

    @property
    def token_accuracy(self) -> float:
        """Diagnostic only; flat per-character agreement of outermost phrases."""
        return self.token_correct / self.token_total if self.token_total else 0.0

    def rows(self):
        for t in PhraseType:
            yield t.stem, self.per_type[t]
        yield "micro", self.micro

    def to_tsv(self) -> str:
        lines = ["type\ttp\tfp\tfn\tP\tR\tF1\n"]
        for name, c in self.rows():
            lines.append(f"{name}\t{c.tp}\t{c.fp}\t{c.fn}\t{c.precision:.4f}\t{c.recall:.4f}\t{c.f1:.4f}\n")
        return "".join(lines)

    def to_table(self, compare_published: bool = False) -> str:
        out = [f"{'type':<8}{'tp':>7}{'fp':>7}{'fn':>7}{'P':>9}{'R':>9}{'F1':>9}"]
        for name, c in self.rows():
            out.append(f"{name:<8}{c.tp:>7}{c.fp:>7}{c.fn:>7}"
                       f"{100 * c.precision:>9.2f}{100 * c.recall:>9.2f}{100 * c.f1:>9.2f}")
        out.append(f"sentences: {self.sentences}")
        if self.rejections:
            out.append("decode rejections: " + ", ".join(
                f"{r}={self.rejections[r]}" for r in Reject if self.rejections[r]))
        if compare_published:
            out.append(PUBLISHED_NOTICE)
        return "\n".join(out) + "\n"


def _check_aligned(gold, pred):
    if len(gold) != len(pred):
        raise MisalignedCorpora(f"{len(gold)} gold sentences vs {len(pred)} predicted")
    for k, (g, p) in enumerate(zip(gold, pred)):
        if g.text != p.text:
            raise MisalignedCorpora(f"sentence {k} differs: {g.text!r} vs {p.text!r}")


def _score(report, gold_spans, pred_spans):
    gold_set, pred_set = set(gold_spans), set(pred_spans)
    for span in pred_set:
        report.per_type[span.ptype].tp += span in gold_set
        report.per_type[span.ptype].fp += span not in gold_set
    for span in gold_set - pred_set:
        report.per_type[span.ptype].fn += 1


def _token_agreement(report, g, p):
    gf = project_flat(g.spans, len(g.text), FlatPolicy.OUTERMOST)
    pf = project_flat(p.spans, len(p.text), FlatPolicy.OUTERMOST)
    report.token_correct += sum(a == b for a, b in zip(gf, pf))
    report.token_total += len(gf)


def evaluate_spans(gold, pred, decode_reports=None) -> EvalReport:
    """Micro-aggregated span-exact P/R/F1 per phrase type."""
    _check_aligned(gold, pred)
    report = EvalReport(sentences=len(gold))
    for g, p in zip(gold, pred):
        _score(report, g.spans, p.spans)
        _token_agreement(report, g, p)
    for dr in decode_reports or ():
        report.rejections.update(r.reason for r in dr.rejected)
    return report


def evaluate_flat(gold, pred, policy=FlatPolicy.OUTERMOST, decode_reports=None) -> EvalReport:
    """Score after collapsing both sides to one flat layer."""
    _check_aligned(gold, pred)
    report = EvalReport(sentences=len(gold))
    for g, p in zip(gold, pred):
        gs = flat_spans(project_flat(g.spans, len(g.text), policy))
        ps = flat_spans(project_flat(p.spans, len(p.text), policy))
        _score(report, gs, ps)
        _token_agreement(report, g, p)
    for dr in decode_reports or ():
        report.rejections.update(r.reason for r in dr.rejected)
    return report
