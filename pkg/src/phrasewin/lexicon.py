"""Background-knowledge lexicon, Aho-Corasick matching and the knowledge grid.

Every lexicon hit is reported, overlapping or not; deciding which hits are
real words is left to the tagger.  A hit of length ``n`` starting at
character ``i`` is written to knowledge-grid cell ``(n, i)`` only, never to
the characters it continues over.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .annotation import BRACKET_CHARS, MAX_LEN


class PosTag(enum.Enum):
    NOUN = "ming"
    VERB = "dong"
    ADJECTIVE = "xing"
    NUMERAL = "shu"
    CLASSIFIER = "liang"
    PREPOSITION = "jie"
    CONJUNCTION = "lian"
    MODAL = "yu"
    ONOMATOPOEIA = "ni"
    AUXILIARY = "zhu"

    @property
    def stem(self) -> str:
        return self.value

    @property
    def index(self) -> int:
        return _POS_INDEX[self]

    @classmethod
    def from_stem(cls, stem: str) -> "PosTag":
        return cls(stem)


_POS_INDEX = {t: k for k, t in enumerate(PosTag)}


def sort_tags(tags: Iterable[PosTag]) -> tuple:
    """Tags in table order; set iteration order is not stable across runs."""
    return tuple(sorted(tags, key=_POS_INDEX.__getitem__))


def format_tags(tags: Iterable[PosTag]) -> str:
    return ",".join(t.stem for t in sort_tags(tags))


class LexiconError(ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        super().__init__(message if lineno is None else f"line {lineno}: {message}")


class BadTag(LexiconError):
    pass


class BadLine(LexiconError):
    pass


class OverlongSurface(LexiconError):
    pass


class EmptyLexicon(LexiconError):
    pass


class Lexicon:
    """Mapping surface string -> frozenset of PosTag."""

    def __init__(self, entries=None, max_len: int = MAX_LEN):
        self.max_len = max_len
        self._entries = {}
        self.line_count = 0
        for surface, tags in (entries or {}).items():
            for tag in tags:
                self.add(surface, tag)

    def add(self, surface: str, tag: PosTag) -> None:
        if not surface:
            raise BadLine("empty surface")
        if len(surface) > self.max_len:
            raise OverlongSurface(f"surface {surface!r} longer than {self.max_len}")
        if set(surface) & BRACKET_CHARS:
            raise BadLine(f"surface {surface!r} contains a bracket character")
        self._entries[surface] = self._entries.get(surface, frozenset()) | {tag}

    def __getitem__(self, surface):
        return self._entries[surface]

    def __contains__(self, surface):
        return surface in self._entries

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def items(self):
        return self._entries.items()

    def get(self, surface, default=None):
        return self._entries.get(surface, default)

    def __eq__(self, other):
        return isinstance(other, Lexicon) and self._entries == other._entries

    def dump(self, stream: TextIO) -> None:
        for surface in sorted(self._entries):
            for tag in sort_tags(self._entries[surface]):
                stream.write(f"{surface}\t{tag.stem}\n")


def load_lexicon(stream: Iterable[str], max_len: int = MAX_LEN) -> Lexicon:
    lex = Lexicon(max_len=max_len)
    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("# "):
            continue
        lex.line_count += 1
        surface, sep, stem = line.partition("\t")
        if not sep:
            raise BadLine("missing tab separator", lineno)
        try:
            tag = PosTag.from_stem(stem.strip())
        except ValueError:
            raise BadTag(f"unknown tag {stem!r}", lineno) from None
        try:
            lex.add(surface, tag)
        except LexiconError as exc:
            raise type(exc)(str(exc), lineno) from None
    return lex


class Matcher:
    """Aho-Corasick automaton over characters.

    States are integers; ``goto[s]`` maps a character to the next state,
    ``fail[s]`` is the failure link and ``out[s]`` lists the lengths of the
    lexicon entries ending in state ``s`` (own entry first, then those
    reachable through failure links).
    """

    def __init__(self, lexicon: Lexicon):
        if len(lexicon) == 0:
            raise EmptyLexicon("cannot build a matcher from an empty lexicon")
        self.lexicon = lexicon
        goto = [{}]
        terminal = [None]
        for surface in sorted(lexicon):
            state = 0
            for ch in surface:
                nxt = goto[state].get(ch)
                if nxt is None:
                    nxt = len(goto)
                    goto[state][ch] = nxt
                    goto.append({})
                    terminal.append(None)
                state = nxt
            terminal[state] = surface

        fail = [0] * len(goto)
        out = [()] * len(goto)
        queue = deque(goto[0].values())
        while queue:
            s = queue.popleft()
            own = (len(terminal[s]),) if terminal[s] is not None else ()
            out[s] = own + out[fail[s]]
            for ch, t in goto[s].items():
                f = fail[s]
                while f and ch not in goto[f]:
                    f = fail[f]
                fail[t] = goto[f].get(ch, 0)
                queue.append(t)
        self._goto = goto
        self._fail = fail
        self._out = out

    def iter_hits(self, text: str):
        """Yield ``(start, length)`` for every occurrence, by increasing end."""
        goto, fail, out = self._goto, self._fail, self._out
        state = 0
        for pos, ch in enumerate(text):
            while state and ch not in goto[state]:
                state = fail[state]
            state = goto[state].get(ch, 0)
            for n in out[state]:
                yield pos + 1 - n, n


def build_matcher(lexicon: Lexicon) -> Matcher:
    return Matcher(lexicon)


@dataclass(frozen=True, order=True)
class Match:
    start: int
    length: int
    tags: frozenset = field(compare=False)

    @property
    def end(self):
        return self.start + self.length


def find_matches(matcher: Matcher, text: str) -> list:
    """All lexicon occurrences in ``text``, sorted by (start, length)."""
    lex = matcher.lexicon
    hits = [
        Match(i, n, lex[text[i:i + n]])
        for i, n in matcher.iter_hits(text)
    ]
    return sorted(hits)


def brute_force_matches(lexicon: Lexicon, text: str) -> list:
    """Quadratic reference scan over every substring."""
    longest = max((len(s) for s in lexicon), default=0)
    hits = []
    for i in range(len(text)):
        for n in range(1, min(longest, len(text) - i) + 1):
            tags = lexicon.get(text[i:i + n])
            if tags is not None:
                hits.append(Match(i, n, tags))
    return hits


@dataclass
class KnowledgeGrid:
    """Row ``n`` holds the tags of lexicon hits of length ``n`` at their start column."""

    sentence_len: int
    max_len: int = MAX_LEN
    d_max: int = MAX_LEN
    cells: dict = field(default_factory=dict)
    dropped: int = 0

    def get(self, n: int, i: int) -> frozenset:
        return self.cells.get((n, i), frozenset())

    def records(self):
        """``(row, col, tags)`` sorted by (row, col)."""
        return [(n, i, sort_tags(tags)) for (n, i), tags in sorted(self.cells.items())]

    def to_text(self) -> str:
        return "".join(f"{n}\t{i}\t{format_tags(tags)}\n" for n, i, tags in self.records())


def encode_knowledge(matches, sentence_len: int, max_len: int = MAX_LEN,
                     d_max: int | None = None) -> KnowledgeGrid:
    d_max = max_len if d_max is None else d_max
    if d_max > max_len:
        raise ValueError(f"d_max {d_max} exceeds capacity {max_len}")
    grid = KnowledgeGrid(sentence_len, max_len, d_max)
    for m in matches:
        if m.end > sentence_len:
            raise ValueError(f"match ({m.start},{m.length}) beyond sentence end")
        if m.length > d_max:
            grid.dropped += 1
            continue
        key = (m.length, m.start)
        grid.cells[key] = grid.cells.get(key, frozenset()) | m.tags
    return grid
