"""Per-cell sparse logistic tagger over the multi-dimensional output grid.

Each grid cell ``(n, i)`` (row = phrase length, column = start offset) is
scored by a linear model over hashed symbolic features.  Features split
into three groups so a sentence can be scored without featurizing every
cell from scratch:

* column context, shared by all rows at column ``i`` (characters, bigrams,
  knowledge tags in a window around ``i``);
* row and absolute position of the cell;
* sparse cell-specific knowledge (an exact lexicon hit at ``(n, i)``,
  coverage by a same-length hit, hits adjacent to the candidate span).

Training minimizes the summed per-cell cross entropy over a sampled mask of
cells: every labeled cell plus ``negative_ratio`` O cells per labeled cell.
"""

from __future__ import annotations

import gzip
import io
import json
import logging
import zlib
from dataclasses import asdict, dataclass, field

import numpy as np

from .annotation import MAX_LEN, AnnotatedSentence, check_plain, validate_tree, serialize_annotation
from .gridcodec import N_TAGS, OutputTag, LabelGrid, decode_labels, encode_labels, valid_cells
from .lexicon import KnowledgeGrid, Matcher, build_matcher, encode_knowledge, find_matches, sort_tags

logger = logging.getLogger(__name__)

MODEL_MAGIC = b"phrasewin-model"
MODEL_VERSION = 1
BOS, EOS = "<s>", "</s>"


class EmptyCorpus(ValueError):
    pass


class ModelFormatError(ValueError):
    pass


def row_bucket(n: int) -> str:
    if n <= 5:
        return str(n)
    return "6-10" if n <= 10 else "11+"


@dataclass(frozen=True)
class FeatureConfig:
    window: int = 2
    d_max: int = MAX_LEN
    use_knowledge: bool = True
    hash_bits: int = 18


@dataclass
class TrainConfig:
    epochs: int = 10
    lr: float = 0.1
    decay: bool = False
    negative_ratio: float = 2.0
    seed: int = 0
    d_max: int = MAX_LEN
    shuffle: bool = True
    use_knowledge: bool = True
    window: int = 2
    hash_bits: int = 18

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.negative_ratio < 0:
            raise ValueError("negative_ratio must be >= 0")

    def feature_config(self) -> FeatureConfig:
        return FeatureConfig(self.window, self.d_max, self.use_knowledge, self.hash_bits)


# --- features -------------------------------------------------------------

def _char(text, k):
    if k < 0:
        return BOS
    if k >= len(text):
        return EOS
    return text[k]


class _KnowledgeIndex:
    """Lookups over a knowledge grid restricted to rows <= d_max."""

    def __init__(self, kg: KnowledgeGrid, d_max: int):
        self.cells = {key: sort_tags(tags) for key, tags in sorted(kg.cells.items()) if key[0] <= d_max}
        starts, ends = {}, {}
        for (m, j), tags in self.cells.items():
            starts.setdefault(j, set()).update(tags)
            ends.setdefault(j + m, set()).update(tags)
        self.starts = {k: sort_tags(v) for k, v in starts.items()}
        self.ends = {k: sort_tags(v) for k, v in ends.items()}

    def covering(self, n, i):
        """Tags of length-``n`` hits ``(n, j)`` with ``j < i < j + n``."""
        found = set()
        for j in range(max(0, i - n + 1), i):
            found.update(self.cells.get((n, j), ()))
        return sort_tags(found)


def column_features(text: str, kindex: _KnowledgeIndex | None, i: int, window: int) -> list:
    feats = ["bias"]
    for o in range(-window, window + 1):
        feats.append(f"c{o}={_char(text, i + o)}")
    for o in range(-window, window):
        feats.append(f"b{o}={_char(text, i + o)}|{_char(text, i + o + 1)}")
    if kindex is not None:
        for (m, j), tags in kindex.cells.items():
            o = j - i
            if -window <= o <= window:
                feats.extend(f"k{m}@{o}={t.stem}" for t in tags)
        feats.extend(f"kend={t.stem}" for t in kindex.ends.get(i, ()))
    return feats


def cell_features(kindex: _KnowledgeIndex | None, n: int, i: int) -> list:
    """Knowledge features specific to the candidate span ``[i, i + n)``."""
    if kindex is None:
        return []
    feats = []
    bucket = row_bucket(n)
    hit = kindex.cells.get((n, i))
    if hit:
        feats.append("hit")
        feats.append(f"hit*row={bucket}")
        feats.extend(f"hit={t.stem}" for t in hit)
    for t in kindex.covering(n, i):
        feats.append(f"kcov={t.stem}")
        feats.append(f"kcov*row={bucket}={t.stem}")
    feats.extend(f"kright={t.stem}" for t in kindex.starts.get(i + n, ()))
    feats.extend(f"klast={t.stem}" for t in kindex.ends.get(i + n, ()))
    return feats


def extract_features(text: str, kg: KnowledgeGrid | None, n: int, i: int,
                     cfg: FeatureConfig = FeatureConfig()) -> frozenset:
    """Feature names for cell ``(n, i)``.

    Columns past the sentence end only get padding and position items.
    """
    position = [f"row={row_bucket(n)}", f"pos={n},{i}"]
    if i >= len(text):
        return frozenset(["bias", f"c0={EOS}", *position])
    kindex = _KnowledgeIndex(kg, cfg.d_max) if (cfg.use_knowledge and kg is not None) else None
    return frozenset(column_features(text, kindex, i, cfg.window) + position + cell_features(kindex, n, i))


class FeatureHasher:
    def __init__(self, bits: int):
        self.bits = bits
        self.mask = (1 << bits) - 1
        self._memo = {}

    def __call__(self, name: str) -> int:
        h = self._memo.get(name)
        if h is None:
            h = zlib.crc32(name.encode("utf-8")) & self.mask
            self._memo[name] = h
        return h


@dataclass
class SentenceFeatures:
    """Hashed features for every valid cell of one sentence."""

    text: str
    col_ids: np.ndarray   # concatenated column-context ids, column by column
    col_ptr: np.ndarray   # start offset of each column in col_ids
    col_of: np.ndarray    # column owning each entry of col_ids
    cell_flat: np.ndarray  # flat cell index (n - 1) * L + i for each cell feature
    cell_ids: np.ndarray
    n_feats: np.ndarray   # (L, L) active feature count per cell (0 when invalid)


def featurize(model: "TaggerModel", text: str, kg: KnowledgeGrid | None) -> SentenceFeatures:
    cfg, L, hasher = model.feature_config, model.max_len, model.hasher
    kindex = _KnowledgeIndex(kg, cfg.d_max) if (cfg.use_knowledge and kg is not None) else None
    length = len(text)
    col_ids, col_ptr, col_of = [], [], []
    col_counts = np.zeros(L, dtype=np.int64)
    for i in range(length):
        names = column_features(text, kindex, i, cfg.window)
        col_ptr.append(len(col_ids))
        col_ids.extend(hasher(x) for x in names)
        col_of.extend([i] * len(names))
        col_counts[i] = len(names)
    cell_flat, cell_ids = [], []
    cell_counts = np.zeros((L, L), dtype=np.int64)
    if kindex is not None:
        for n in range(1, min(length, L) + 1):
            for i in range(length):
                names = cell_features(kindex, n, i)
                if names:
                    cell_flat.extend([(n - 1) * L + i] * len(names))
                    cell_ids.extend(hasher(x) for x in names)
                    cell_counts[n - 1, i] = len(names)
    valid = valid_cells(length, L)
    n_feats = np.where(valid, col_counts[None, :] + 2 + cell_counts, 0)
    return SentenceFeatures(
        text,
        np.asarray(col_ids, dtype=np.int64),
        np.asarray(col_ptr, dtype=np.int64),
        np.asarray(col_of, dtype=np.int64),
        np.asarray(cell_flat, dtype=np.int64),
        np.asarray(cell_ids, dtype=np.int64),
        n_feats,
    )


# --- model ----------------------------------------------------------------

class TaggerModel:
    def __init__(self, feature_config: FeatureConfig = FeatureConfig(), max_len: int = MAX_LEN,
                 weights: np.ndarray | None = None):
        self.feature_config = feature_config
        self.max_len = max_len
        self.hasher = FeatureHasher(feature_config.hash_bits)
        size = 1 << feature_config.hash_bits
        if weights is None:
            weights = np.zeros((size, N_TAGS), dtype=np.float64)
        if weights.shape != (size, N_TAGS):
            raise ModelFormatError(f"weight matrix shape {weights.shape} does not match config")
        self.weights = weights
        L = max_len
        self._row_ids = np.array([self.hasher(f"row={row_bucket(n)}") for n in range(1, L + 1)])
        self._pos_ids = np.array([[self.hasher(f"pos={n},{i}") for i in range(L)] for n in range(1, L + 1)])

    # scoring

    def cell_logits(self, sf: SentenceFeatures, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Logits for the cells ``(rows[k], cols[k])``; rows are 1-based."""
        W = self.weights
        out = np.zeros((len(rows), N_TAGS))
        if len(sf.text):
            col_scores = np.add.reduceat(W[sf.col_ids], sf.col_ptr, axis=0)
            out += col_scores[cols]
        out += W[self._row_ids[rows - 1]]
        out += W[self._pos_ids[rows - 1, cols]]
        sel, where = self._cell_lookup(sf, rows, cols)
        if len(sel):
            np.add.at(out, where, W[sf.cell_ids[sel]])
        return out

    def _cell_lookup(self, sf, rows, cols):
        L = self.max_len
        slot = np.full(L * L, -1, dtype=np.int64)
        slot[(rows - 1) * L + cols] = np.arange(len(rows))
        where = slot[sf.cell_flat]
        sel = np.nonzero(where >= 0)[0]
        return sel, where[sel]

    def grid_logits(self, sf: SentenceFeatures) -> np.ndarray:
        """(L, L, N_TAGS) logits; invalid cells stay zero."""
        L = self.max_len
        rows, cols = np.nonzero(valid_cells(len(sf.text), L))
        out = np.zeros((L, L, N_TAGS))
        out[rows, cols] = self.cell_logits(sf, rows + 1, cols)
        return out

    def loss_and_grad(self, sf: SentenceFeatures, gold: LabelGrid, mask: np.ndarray):
        """Summed masked cross entropy and its sparse gradient.

        Returns ``(loss, ids, grads)``: the gradient w.r.t. ``weights[ids[k]]``
        is ``grads[k]`` (ids may repeat; contributions add).
        """
        loss, ids, grads, _ = self._loss_grad(sf, gold, mask)
        return loss, ids, grads

    def _loss_grad(self, sf, gold, mask, normalize=False):
        rows0, cols = np.nonzero(mask)
        rows = rows0 + 1
        logits = self.cell_logits(sf, rows, cols)
        target = gold.tags[rows0, cols].astype(np.int64)
        logp = log_softmax(logits)
        loss = float(-logp[np.arange(len(rows)), target].sum())
        g = np.exp(logp)
        g[np.arange(len(rows)), target] -= 1.0
        if normalize:
            g = g / sf.n_feats[rows0, cols][:, None]
        length = len(sf.text)
        col_g = np.zeros((max(length, 1), N_TAGS))
        np.add.at(col_g, cols, g)
        sel, where = self._cell_lookup(sf, rows, cols)
        ids = np.concatenate([
            sf.col_ids, self._row_ids[rows0], self._pos_ids[rows0, cols], sf.cell_ids[sel],
        ])
        grads = np.concatenate([col_g[sf.col_of], g, g, g[where]])
        return loss, ids, grads, len(rows)

    def sgd_step(self, sf, gold, mask, lr: float):
        loss, ids, grads, cells = self._loss_grad(sf, gold, mask, normalize=True)
        np.add.at(self.weights, ids, -lr * grads)
        return loss, cells

    # persistence

    def config_dict(self) -> dict:
        return {"feature_config": asdict(self.feature_config), "max_len": self.max_len,
                "labels": [t.name for t in OutputTag], "version": MODEL_VERSION}

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    def to_bytes(self) -> bytes:
        ids, tags = np.nonzero(self.weights)
        header = json.dumps(self.config_dict(), sort_keys=True).encode("utf-8")
        buf = io.BytesIO()
        buf.write(MODEL_MAGIC + b"\n")
        buf.write(len(header).to_bytes(8, "little"))
        buf.write(header)
        buf.write(len(ids).to_bytes(8, "little"))
        buf.write(ids.astype("<u4").tobytes())
        buf.write(tags.astype("<u1").tobytes())
        buf.write(self.weights[ids, tags].astype("<f8").tobytes())
        return gzip.compress(buf.getvalue(), mtime=0)

    @classmethod
    def from_bytes(cls, data: bytes) -> "TaggerModel":
        try:
            raw = memoryview(gzip.decompress(data))
        except OSError as exc:
            raise ModelFormatError(f"not a model file: {exc}") from None
        head = len(MODEL_MAGIC) + 1
        if bytes(raw[:head]) != MODEL_MAGIC + b"\n":
            raise ModelFormatError("bad magic")
        pos = head
        hlen = int.from_bytes(raw[pos:pos + 8], "little")
        pos += 8
        header = json.loads(bytes(raw[pos:pos + hlen]))
        pos += hlen
        if header.get("version") != MODEL_VERSION:
            raise ModelFormatError(f"unsupported model version {header.get('version')}")
        if header["labels"] != [t.name for t in OutputTag]:
            raise ModelFormatError("label set mismatch")
        count = int.from_bytes(raw[pos:pos + 8], "little")
        pos += 8
        ids = np.frombuffer(raw[pos:pos + 4 * count], dtype="<u4")
        pos += 4 * count
        tags = np.frombuffer(raw[pos:pos + count], dtype="<u1")
        pos += count
        vals = np.frombuffer(raw[pos:pos + 8 * count], dtype="<f8")
        model = cls(FeatureConfig(**header["feature_config"]), header["max_len"])
        model.weights[ids.astype(np.int64), tags.astype(np.int64)] = vals
        return model

    @classmethod
    def load(cls, path) -> "TaggerModel":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def score_cell(model: TaggerModel, features) -> np.ndarray:
    """Logits for one cell: per tag, the sum of the weights of its features."""
    ids = [model.hasher(name) for name in sorted(features)]
    return model.weights[ids].sum(axis=0) if ids else np.zeros(N_TAGS)


def loss(logits: np.ndarray, gold: LabelGrid, mask: np.ndarray) -> float:
    """Sum over masked cells of ``-log p(gold tag)``; logits shaped (L, L, N_TAGS)."""
    rows, cols = np.nonzero(mask)
    logp = log_softmax(logits[rows, cols])
    return float(-logp[np.arange(len(rows)), gold.tags[rows, cols].astype(np.int64)].sum())


def sample_mask(gold: LabelGrid, negative_ratio: float, seed) -> np.ndarray:
    """All labeled valid cells plus ``negative_ratio`` sampled O cells per labeled cell.

    ``seed`` may be an int or a ``numpy.random.Generator`` (consumed in place).
    """
    rng = np.random.default_rng(seed)
    valid = gold.valid_mask()
    positive = valid & (gold.tags != 0)
    n_pos = int(positive.sum())
    mask = positive.copy()
    negatives = np.flatnonzero(valid & (gold.tags == 0))
    k = min(int(round(negative_ratio * n_pos)), len(negatives))
    if k:
        mask.flat[rng.choice(negatives, size=k, replace=False)] = True
    return mask


# --- training and prediction ---------------------------------------------

@dataclass
class EpochLog:
    epoch: int
    avg_loss: float
    masked_cells: int

    def line(self) -> str:
        return f"{self.epoch}\t{self.avg_loss:.6f}\t{self.masked_cells}"


def knowledge_grid(text: str, matcher: Matcher | None, max_len: int = MAX_LEN,
                   d_max: int | None = None) -> KnowledgeGrid:
    matches = find_matches(matcher, text) if matcher is not None else []
    return encode_knowledge(matches, len(text), max_len, d_max)


def _matcher_for(lexicon):
    return build_matcher(lexicon) if lexicon is not None and len(lexicon) else None


def train(corpus, lexicon, cfg: TrainConfig = TrainConfig(), max_len: int = MAX_LEN,
          on_epoch=None):
    """Fit a :class:`TaggerModel`; returns ``(model, [EpochLog, ...])``."""
    corpus = list(corpus)
    if not corpus:
        raise EmptyCorpus("training corpus is empty")
    fcfg = cfg.feature_config()
    model = TaggerModel(fcfg, max_len)
    matcher = _matcher_for(lexicon) if fcfg.use_knowledge else None
    prepared = []
    for sent in corpus:
        kg = knowledge_grid(sent.text, matcher, max_len, fcfg.d_max)
        prepared.append((featurize(model, sent.text, kg), encode_labels(sent, max_len)))

    rng = np.random.default_rng(cfg.seed)
    history = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(prepared)) if cfg.shuffle else range(len(prepared))
        lr = cfg.lr / epoch if cfg.decay else cfg.lr
        total, cells = 0.0, 0
        for k in order:
            sf, gold = prepared[k]
            mask = sample_mask(gold, cfg.negative_ratio, rng)
            if not mask.any():
                continue
            step_loss, step_cells = model.sgd_step(sf, gold, mask, lr)
            total += step_loss
            cells += step_cells
        entry = EpochLog(epoch, total / cells if cells else 0.0, cells)
        logger.info("epoch %d avg loss %.4f over %d cells", epoch, entry.avg_loss, cells)
        history.append(entry)
        if on_epoch is not None:
            on_epoch(entry)
    return model, history


@dataclass
class Prediction:
    grid: LabelGrid
    report: object
    annotation: AnnotatedSentence

    @property
    def text(self) -> str:
        return serialize_annotation(self.annotation)


def predict(model: TaggerModel, text: str, matcher: Matcher | None = None,
            use_scores: bool = False) -> Prediction:
    """Tag one sentence: per-cell argmax, forced O outside the sentence, then decode."""
    L = model.max_len
    check_plain(text, L)
    kg = knowledge_grid(text, matcher, L, model.feature_config.d_max) if model.feature_config.use_knowledge else None
    sf = featurize(model, text, kg)
    logits = model.grid_logits(sf)
    valid = valid_cells(len(text), L)
    tags = np.where(valid, logits.argmax(axis=-1), 0).astype(np.int8)
    grid = LabelGrid(len(text), L, tags)
    scores = None
    if use_scores:
        logp = log_softmax(logits)
        picked = np.take_along_axis(logp, tags[..., None].astype(np.int64), axis=-1)[..., 0]
        scores = {}
        for n in range(1, L + 1):
            for i in range(max(0, len(text) - n + 1)):
                scores[(n, i)] = float(picked[n - 1, i:i + n].mean())
    report = decode_labels(grid, scores)
    annotation = AnnotatedSentence(text, validate_tree(report.spans))
    return Prediction(grid, report, annotation)


def predict_corpus(model: TaggerModel, texts, lexicon=None):
    matcher = _matcher_for(lexicon) if model.feature_config.use_knowledge else None
    return [predict(model, t, matcher) for t in texts]
