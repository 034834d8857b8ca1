"""Bracketed phrase annotation: parsing, serialization and span forests.

A sentence such as ``(我)[爱](祖国)`` carries seven kinds of nestable
phrases, each delimited by its own bracket pair.  Offsets always refer to
the sentence with every bracket character removed, and are counted in
characters (code points), never bytes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

MAX_LEN = 50


class PhraseType(enum.Enum):
    NOUN = ("(", ")", "ming")
    VERB = ("[", "]", "dong")
    QUANTITY = ("{", "}", "shu")
    PREPOSITION = ("<", ">", "jie")
    CONJUNCTION = ("#", "#", "lian")
    MODAL = ("@", "@", "yu")
    CLAUSE = ("/", "\\", "cong")

    def __init__(self, open_char, close_char, stem):
        self.open_char = open_char
        self.close_char = close_char
        self.stem = stem

    @property
    def index(self) -> int:
        return _TYPE_INDEX[self]

    @property
    def nest_rank(self) -> int:
        """Position in the outermost-first order used for equal extents."""
        return _NEST_RANK[self]

    @classmethod
    def from_stem(cls, stem: str) -> "PhraseType":
        try:
            return _BY_STEM[stem]
        except KeyError:
            raise ValueError(f"unknown phrase stem {stem!r}") from None

    def __lt__(self, other):
        if not isinstance(other, PhraseType):
            return NotImplemented
        return self.index < other.index


_TYPE_INDEX = {t: k for k, t in enumerate(PhraseType)}
_BY_STEM = {t.stem: t for t in PhraseType}
_NEST_ORDER = (
    PhraseType.CLAUSE,
    PhraseType.PREPOSITION,
    PhraseType.NOUN,
    PhraseType.VERB,
    PhraseType.QUANTITY,
    PhraseType.CONJUNCTION,
    PhraseType.MODAL,
)
_NEST_RANK = {t: k for k, t in enumerate(_NEST_ORDER)}

# "^...^" is accepted as an alternative clause pair on input only.
ALT_CLAUSE = "^"
_OPENERS = {t.open_char: t for t in PhraseType if t.open_char != t.close_char}
_CLOSERS = {t.close_char: t for t in PhraseType if t.open_char != t.close_char}
_SYMMETRIC = {"#": PhraseType.CONJUNCTION, "@": PhraseType.MODAL, ALT_CLAUSE: PhraseType.CLAUSE}
BRACKET_CHARS = frozenset(_OPENERS) | frozenset(_CLOSERS) | frozenset(_SYMMETRIC)


class AnnotationError(ValueError):
    pass


class UnbalancedBracket(AnnotationError):
    pass


class EmptyPhrase(AnnotationError):
    pass


class OverlongSentence(AnnotationError):
    pass


class InvalidTree(AnnotationError):
    pass


class CrossingSpans(InvalidTree):
    def __init__(self, pairs):
        self.pairs = pairs
        shown = ", ".join(f"({a[0]},{a[1]})x({b[0]},{b[1]})" for a, b in pairs)
        super().__init__(f"crossing spans: {shown}")


class DuplicateSpan(InvalidTree):
    pass


@dataclass(frozen=True, order=True)
class PhraseSpan:
    start: int
    length: int
    ptype: PhraseType

    def __post_init__(self):
        if self.start < 0 or self.length < 1:
            raise ValueError(f"bad span ({self.start}, {self.length})")

    @property
    def end(self) -> int:
        return self.start + self.length

    def contains(self, other: "PhraseSpan") -> bool:
        return self.start <= other.start and other.end <= self.end

    def crosses(self, other: "PhraseSpan") -> bool:
        """True when the spans overlap and neither contains the other."""
        overlap = self.start < other.end and other.start < self.end
        return overlap and not (self.contains(other) or other.contains(self))


def span_order(span: PhraseSpan):
    """Sort key for pre-order traversal: by start, outer before inner."""
    return (span.start, -span.length, span.ptype.nest_rank)


@dataclass(frozen=True)
class PhraseNode:
    span: PhraseSpan
    children: tuple = ()

    def walk(self, depth=1) -> Iterator[tuple]:
        yield self, depth
        for child in self.children:
            yield from child.walk(depth + 1)


@dataclass(frozen=True)
class PhraseTree:
    roots: tuple = ()

    def walk(self) -> Iterator[tuple]:
        """Yield ``(node, depth)`` in pre-order; roots have depth 1."""
        for root in self.roots:
            yield from root.walk()

    def spans(self) -> list:
        return [node.span for node, _ in self.walk()]

    def depth(self) -> int:
        return max((d for _, d in self.walk()), default=0)

    def leaves(self) -> list:
        return [node.span for node, _ in self.walk() if not node.children]

    def __len__(self):
        return sum(1 for _ in self.walk())


@dataclass(frozen=True)
class AnnotatedSentence:
    text: str
    tree: PhraseTree = field(default_factory=PhraseTree)

    def __post_init__(self):
        for span in self.tree.spans():
            if span.end > len(self.text):
                raise InvalidTree(
                    f"span ({span.start},{span.length}) exceeds sentence length {len(self.text)}"
                )

    @classmethod
    def from_spans(cls, text: str, spans: Iterable[PhraseSpan]) -> "AnnotatedSentence":
        return cls(text, validate_tree(spans))

    @property
    def spans(self) -> list:
        return self.tree.spans()

    def span_set(self) -> frozenset:
        return frozenset(self.tree.spans())

    def surface(self, span: PhraseSpan) -> str:
        return self.text[span.start:span.end]


def validate_tree(spans: Iterable[PhraseSpan]) -> PhraseTree:
    """Build the containment forest of ``spans``.

    Spans must be pairwise nested or disjoint.  Equal extents of different
    types nest by ``PhraseType.nest_rank`` (clause outermost).  The result
    depends only on the set of spans, not their order.
    """
    ordered = sorted(spans, key=span_order)
    for a, b in zip(ordered, ordered[1:]):
        if a == b:
            raise DuplicateSpan(f"duplicate span ({a.start},{a.length},{a.ptype.stem})")

    # In start order a later span b overlapping a crosses it iff it ends past a.
    crossing = []
    bounds = [(s.start, s.start + s.length) for s in ordered]
    for k, (a0, a1) in enumerate(bounds):
        for b0, b1 in bounds[k + 1:]:
            if b0 >= a1:
                break
            if b1 > a1:
                crossing.append(((a0, a1 - a0), (b0, b1 - b0)))
    if crossing:
        raise CrossingSpans(sorted(set(crossing)))

    # Pre-order sequence: every span's parent is the nearest open ancestor.
    roots = []
    stack = []  # (span, children list)
    for span in ordered:
        while stack and not stack[-1][0].contains(span):
            stack.pop()
        children = []
        (stack[-1][1] if stack else roots).append((span, children))
        stack.append((span, children))

    def freeze(items):
        return tuple(PhraseNode(s, freeze(c)) for s, c in items)

    return PhraseTree(freeze(roots))


def check_tree(tree: PhraseTree) -> None:
    """Raise InvalidTree unless ``tree`` is the canonical forest of its spans."""
    try:
        canonical = validate_tree(tree.spans())
    except InvalidTree as exc:
        raise InvalidTree(str(exc)) from exc
    if canonical != tree:
        raise InvalidTree("tree structure does not match the containment of its spans")
    for root in tree.roots:
        _check_symmetric(root, frozenset())


def _check_symmetric(node, open_types):
    # "#" and "@" open and close with one character, so they cannot nest in themselves.
    ptype = node.span.ptype
    if ptype in open_types:
        raise InvalidTree(f"{ptype.name.lower()} phrase nested inside another of the same type")
    if ptype.open_char == ptype.close_char:
        open_types = open_types | {ptype}
    for child in node.children:
        _check_symmetric(child, open_types)


def parse_annotation(text: str, max_len: int = MAX_LEN) -> AnnotatedSentence:
    """Parse a bracketed annotation line into a sentence and its phrase forest."""
    chars = []
    spans = []
    stack = []  # (opening character, phrase type, start offset, column in input)

    for col, ch in enumerate(text):
        if ch in _OPENERS:
            stack.append((ch, _OPENERS[ch], len(chars), col))
        elif ch in _CLOSERS:
            ptype = _CLOSERS[ch]
            if not stack or stack[-1][1] is not ptype or stack[-1][0] in _SYMMETRIC:
                raise UnbalancedBracket(f"unexpected {ch!r} at column {col}")
            _, _, start, open_col = stack.pop()
            spans.append(_close(ptype, start, len(chars), open_col))
        elif ch in _SYMMETRIC:
            open_here = [k for k, item in enumerate(stack) if item[0] == ch]
            if not open_here:
                stack.append((ch, _SYMMETRIC[ch], len(chars), col))
            elif open_here[-1] == len(stack) - 1:
                _, ptype, start, open_col = stack.pop()
                spans.append(_close(ptype, start, len(chars), open_col))
            else:
                raise UnbalancedBracket(f"{ch!r} at column {col} closes across an open bracket")
        else:
            chars.append(ch)

    if stack:
        ch, _, _, col = stack[-1]
        raise UnbalancedBracket(f"{ch!r} opened at column {col} is never closed")
    sentence = "".join(chars)
    if len(sentence) > max_len:
        raise OverlongSentence(f"sentence has {len(sentence)} characters, limit is {max_len}")
    return AnnotatedSentence(sentence, validate_tree(spans))


def _close(ptype, start, end, col):
    if end == start:
        raise EmptyPhrase(f"empty {ptype.name.lower()} phrase at column {col}")
    return PhraseSpan(start, end - start, ptype)


def serialize_annotation(sentence: AnnotatedSentence) -> str:
    """Inverse of :func:`parse_annotation` for canonical forests."""
    check_tree(sentence.tree)
    text = sentence.text
    out = []

    def emit(nodes: Sequence[PhraseNode], pos: int, stop: int) -> None:
        for node in nodes:
            span = node.span
            out.append(text[pos:span.start])
            out.append(span.ptype.open_char)
            emit(node.children, span.start, span.end)
            out.append(span.ptype.close_char)
            pos = span.end
        out.append(text[pos:stop])

    emit(sentence.tree.roots, 0, len(text))
    return "".join(out)


def check_plain(text: str, max_len: int = MAX_LEN) -> str:
    """Validate raw input text for tagging; bracket characters are reserved."""
    bad = sorted(set(text) & BRACKET_CHARS)
    if bad:
        raise AnnotationError(f"plain text contains reserved bracket characters {''.join(bad)!r}")
    if len(text) > max_len:
        raise OverlongSentence(f"sentence has {len(text)} characters, limit is {max_len}")
    return text


def is_comment(line: str) -> bool:
    return not line.strip() or line.startswith("# ")
