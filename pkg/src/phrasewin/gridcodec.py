"""Multi-dimensional output grid: spans <-> per-length B/I rows.

Row ``n`` of a :class:`LabelGrid` carries exactly the phrases of length
``n``: ``B-t`` at the phrase start followed by ``n - 1`` ``I-t`` tags.
Model output need not be well formed, so :func:`decode_labels` validates
every run and resolves crossings between rows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .annotation import MAX_LEN, AnnotatedSentence, PhraseSpan, PhraseType, validate_tree


def _tag_members():
    members = {"O": 0}
    for k, t in enumerate(PhraseType):
        members[f"B_{t.stem.upper()}"] = 2 * k + 1
        members[f"I_{t.stem.upper()}"] = 2 * k + 2
    return members


OutputTag = enum.IntEnum("OutputTag", _tag_members())
OutputTag.__doc__ = "O, then B/I pairs in PhraseType order. Integer value is the argmax tie order."
N_TAGS = len(OutputTag)


def tag_label(tag) -> str:
    tag = OutputTag(tag)
    if tag == OutputTag.O:
        return "O"
    return f"{'B' if tag % 2 else 'I'}-{tag_type(tag).stem}"


def parse_tag(label: str) -> OutputTag:
    if label == "O":
        return OutputTag.O
    prefix, _, stem = label.partition("-")
    ptype = PhraseType.from_stem(stem)
    if prefix == "B":
        return begin_tag(ptype)
    if prefix == "I":
        return inside_tag(ptype)
    raise ValueError(f"bad tag label {label!r}")


def begin_tag(ptype: PhraseType) -> OutputTag:
    return OutputTag(2 * ptype.index + 1)


def inside_tag(ptype: PhraseType) -> OutputTag:
    return OutputTag(2 * ptype.index + 2)


def is_begin(tag) -> bool:
    return tag != 0 and tag % 2 == 1


_TYPES = tuple(PhraseType)


def tag_type(tag) -> PhraseType | None:
    if tag == 0:
        return None
    return _TYPES[(int(tag) - 1) // 2]


class ShapeMismatch(ValueError):
    pass


class SpanTooLong(ValueError):
    pass


@dataclass
class LabelGrid:
    """``tags[n - 1, i]`` is the OutputTag of row ``n`` at column ``i``."""

    sentence_len: int
    max_len: int = MAX_LEN
    tags: np.ndarray = None

    def __post_init__(self):
        if self.tags is None:
            self.tags = np.zeros((self.max_len, self.max_len), dtype=np.int8)
        if self.tags.shape != (self.max_len, self.max_len):
            raise ShapeMismatch(f"tag array shape {self.tags.shape} for capacity {self.max_len}")

    def __getitem__(self, cell):
        n, i = cell
        return OutputTag(int(self.tags[n - 1, i]))

    def __setitem__(self, cell, tag):
        n, i = cell
        self.tags[n - 1, i] = int(tag)

    def row(self, n: int) -> list:
        return [OutputTag(int(t)) for t in self.tags[n - 1]]

    def __eq__(self, other):
        return (isinstance(other, LabelGrid)
                and self.sentence_len == other.sentence_len
                and self.max_len == other.max_len
                and np.array_equal(self.tags, other.tags))

    def valid_mask(self) -> np.ndarray:
        return valid_cells(self.sentence_len, self.max_len)

    def records(self):
        rows, cols = np.nonzero(self.tags)
        return [(int(r) + 1, int(c), OutputTag(int(self.tags[r, c]))) for r, c in zip(rows, cols)]

    def to_text(self) -> str:
        return "".join(f"{n}\t{i}\t{tag_label(t)}\n" for n, i, t in self.records())


def representable(sentence: AnnotatedSentence) -> bool:
    """True if no two spans share an extent, so the grid round trip is exact."""
    extents = [(s.start, s.length) for s in sentence.spans]
    return len(extents) == len(set(extents))


def valid_cells(sentence_len: int, max_len: int = MAX_LEN) -> np.ndarray:
    """Cells some span can reach: row ``n <= sentence_len`` and column ``i < sentence_len``.

    B tags need ``i + n <= sentence_len`` but the I tags of a run extend to
    column ``start + n - 1``, so the whole row prefix is live.
    """
    n = np.arange(1, max_len + 1)[:, None]
    i = np.arange(max_len)[None, :]
    return (n <= sentence_len) & (i < sentence_len)


def encode_labels(sentence: AnnotatedSentence, max_len: int = MAX_LEN) -> LabelGrid:
    """Write every span into the row of its length.

    Two spans sharing an extent compete for one cell; the outermost type
    (pre-order first) is kept and the inner one is not representable.
    """
    grid = LabelGrid(len(sentence.text), max_len)
    for span in sentence.spans:
        if span.length > max_len:
            raise SpanTooLong(f"span of length {span.length} exceeds {max_len}")
        row = grid.tags[span.length - 1]
        if row[span.start]:
            continue
        row[span.start] = begin_tag(span.ptype)
        row[span.start + 1:span.end] = inside_tag(span.ptype)
    return grid


class Reject(str, enum.Enum):
    WRONG_LENGTH = "WrongLength"
    I_START = "IStart"
    TYPE_SWITCH = "TypeSwitch"
    CROSSING = "Crossing"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Rejection:
    row: int
    col_start: int
    col_end: int  # exclusive
    reason: Reject


@dataclass
class DecodeReport:
    spans: list = field(default_factory=list)
    rejected: list = field(default_factory=list)

    def to_text(self) -> str:
        lines = [f"span\t{s.start}\t{s.length}\t{s.ptype.stem}\n" for s in self.spans]
        lines += [f"reject\t{r.row}\t{r.col_start}\t{r.col_end}\t{r.reason}\n" for r in self.rejected]
        return "".join(lines)


def row_runs(row, limit: int):
    """Maximal runs in one row: a non-O cell followed by consecutive I cells."""
    i = 0
    while i < limit:
        if row[i] == 0:
            i += 1
            continue
        j = i + 1
        while j < limit and row[j] != 0 and not is_begin(row[j]):
            j += 1
        yield i, j
        i = j


def check_run(row, n: int, start: int, end: int):
    """Return the rejection reason for a run in row ``n``, or None if well formed."""
    head = row[start]
    if end - start != n or (n == 1 and not is_begin(head)):
        return Reject.WRONG_LENGTH
    if not is_begin(head):
        return Reject.I_START
    inside = head + 1  # I tag of the same type
    if any(row[k] != inside for k in range(start + 1, end)):
        return Reject.TYPE_SWITCH
    return None


def decode_labels(grid: LabelGrid, scores=None) -> DecodeReport:
    """Extract well-formed runs and resolve cross-row conflicts.

    Surviving runs are accepted greedily, longest first, then leftmost,
    then outermost type; a run crossing an accepted span is dropped, as
    is a conjunction or modal run nested with one of the same type.  If
    ``scores`` maps ``(row, col)`` of a run start to a confidence, higher
    scores are accepted first instead of longer runs.
    """
    report = DecodeReport()
    candidates = []
    limit = min(grid.sentence_len, grid.max_len)
    for n in (np.flatnonzero(grid.tags[:, :limit].any(axis=1)) + 1).tolist():
        row = grid.tags[n - 1].tolist()
        for start, end in row_runs(row, limit):
            reason = check_run(row, n, start, end)
            if reason is not None:
                report.rejected.append(Rejection(n, start, end, reason))
            else:
                candidates.append(PhraseSpan(start, n, tag_type(row[start])))

    def priority(span):
        first = -scores[(span.length, span.start)] if scores is not None else -span.length
        return (first, -span.length, span.start, span.ptype.nest_rank)

    accepted = []  # (start, end, span)
    for span in sorted(candidates, key=priority):
        lo, hi = span.start, span.start + span.length
        if any(_conflicts(span, other) for a, b, other in accepted if a < hi and lo < b):
            report.rejected.append(Rejection(span.length, lo, hi, Reject.CROSSING))
        else:
            accepted.append((lo, hi, span))
    accepted = [span for _, _, span in accepted]
    report.spans = validate_tree(accepted).spans()
    return report


def _conflicts(a: PhraseSpan, b: PhraseSpan) -> bool:
    # A "#" or "@" phrase inside one of its own type has no bracket form.
    if a.ptype is b.ptype and a.ptype.open_char == a.ptype.close_char:
        return a.contains(b) or b.contains(a)
    return a.crosses(b)


class FlatPolicy(str, enum.Enum):
    OUTERMOST = "outermost"
    INNERMOST = "innermost"


def project_flat(spans, sentence_len: int, policy=FlatPolicy.OUTERMOST) -> list:
    """Collapse a nested forest to one B/I sequence of roots or of leaves."""
    policy = FlatPolicy(policy)
    tree = validate_tree(spans)
    chosen = [node.span for node in tree.roots] if policy is FlatPolicy.OUTERMOST else tree.leaves()
    flat = [OutputTag.O] * sentence_len
    for span in chosen:
        flat[span.start] = begin_tag(span.ptype)
        for k in range(span.start + 1, span.end):
            flat[k] = inside_tag(span.ptype)
    return flat


def flat_spans(flat) -> list:
    """Read spans back out of a flat B/I sequence (strict: a run must start with B)."""
    spans = []
    for start, end in row_runs(list(flat), len(flat)):
        head = flat[start]
        if is_begin(head) and all(tag_type(flat[k]) is tag_type(head) for k in range(start + 1, end)):
            spans.append(PhraseSpan(start, end - start, tag_type(head)))
    return spans


def grid_diff(a: LabelGrid, b: LabelGrid) -> list:
    if a.max_len != b.max_len or a.sentence_len != b.sentence_len:
        raise ShapeMismatch("grids differ in capacity or sentence length")
    rows, cols = np.nonzero(a.tags != b.tags)
    return [
        (int(r) + 1, int(c), OutputTag(int(a.tags[r, c])), OutputTag(int(b.tags[r, c])))
        for r, c in zip(rows, cols)
    ]
