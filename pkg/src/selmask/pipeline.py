"""Corpus -> whole-word-masked MLM examples.

Sentences are packed into ``[CLS] ... [SEP]`` sequences, each word gets a task
score and a masking probability, units (words, or tokens for ``random_tm``) are
sampled with counter-based randomness, and selected units receive the 80/10/10
corruption with a single fate draw per unit.
"""

from __future__ import annotations

import json
import logging
import math
import os
import shutil
import tempfile
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import islice

import numpy as np

from . import rng
from ._accel import NUMBA_ENABLED, njit
from .embeddings import EmbeddingTable
from .errors import ConfigError
from .lexicon import SeedLexicon
from .maskfn import MaskFnConfig, probabilities
from .scorer import ScoreModel
from .text import DEFAULT_NORMALIZATION, Normalization
from .tokenizer import Vocab, WordGroupedSequence, tokenize_text

logger = logging.getLogger(__name__)

IGNORE_INDEX = -100
STRATEGIES = ("selective", "random_tm", "random_wwm")
FATE_MASK, FATE_REPLACE, FATE_KEEP = 0, 1, 2
FATE_NAMES = ("mask", "replace", "keep")
MASK_PROB, REPLACE_PROB = 0.8, 0.1


@dataclass(frozen=True)
class SequenceConfig:
    max_seq_len: int = 128
    max_predictions: int | None = None
    rng_seed: int = 12345
    strategy: str = "selective"
    target_rate: float = 0.15

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.max_seq_len < 8:
            raise ConfigError("max_seq_len must be at least 8")
        if self.max_predictions is None:
            object.__setattr__(self, "max_predictions",
                               max(1, math.ceil(1.5 * self.target_rate * self.max_seq_len)))
        if self.max_predictions < 1:
            raise ConfigError("max_predictions must be at least 1")


@dataclass
class MaskedExample:
    input_ids: list
    label_ids: list
    attention_len: int
    masked_positions: list
    doc_id: int
    seq_index: int

    def to_json(self) -> str:
        return json.dumps({
            "input_ids": self.input_ids,
            "label_ids": self.label_ids,
            "attention_len": self.attention_len,
            "masked_positions": self.masked_positions,
            "doc_id": self.doc_id,
            "seq_index": self.seq_index,
        }, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "MaskedExample":
        return cls(**json.loads(line))


# -- corpus reading and packing ---------------------------------------------

def read_documents(lines):
    """Group an iterable of lines into documents; blank lines separate documents."""
    doc = []
    for line in lines:
        text = line.strip()
        if text:
            doc.append(text)
        elif doc:
            yield doc
            doc = []
    if doc:
        yield doc


def iter_corpus(path):
    """Yield ``(doc_id, sentences)`` for every non-empty document of a corpus file."""
    with open(path, encoding="utf-8") as fh:
        yield from enumerate(read_documents(fh))


def _frame(vocab, ids, spans, surfaces, doc_id, seq_index):
    return WordGroupedSequence(
        [vocab.cls_id] + ids + [vocab.sep_id],
        [(s + 1, e + 1) for s, e in spans],
        list(surfaces), doc_id=doc_id, seq_index=seq_index,
    )


def build_sequences(sentences, vocab: Vocab, cfg: SequenceConfig, doc_id: int = 0,
                    normalization: Normalization = DEFAULT_NORMALIZATION):
    """Greedily pack one document's sentences into framed sequences of at most max_seq_len.

    A sentence longer than ``max_seq_len - 2`` is cut at the last word boundary that fits.
    """
    capacity = cfg.max_seq_len - 2
    ids, spans, surfaces = [], [], []
    seq_index = 0
    for sentence in sentences:
        sent = tokenize_text(vocab, sentence, normalization)
        n_words = sent.n_words
        if len(sent.token_ids) > capacity:
            n_words = 0
            while n_words < sent.n_words and sent.word_spans[n_words][1] <= capacity:
                n_words += 1
        if n_words == 0:
            continue
        length = sent.word_spans[n_words - 1][1]
        if ids and len(ids) + length > capacity:
            yield _frame(vocab, ids, spans, surfaces, doc_id, seq_index)
            seq_index += 1
            ids, spans, surfaces = [], [], []
        offset = len(ids)
        ids.extend(sent.token_ids[:length])
        spans.extend((s + offset, e + offset) for s, e in sent.word_spans[:n_words])
        surfaces.extend(sent.word_surfaces[:n_words])
    if ids:
        yield _frame(vocab, ids, spans, surfaces, doc_id, seq_index)


# -- scoring -----------------------------------------------------------------

class WordScorer:
    """Memoized word -> (score, probability) lookups for one run."""

    def __init__(self, model: ScoreModel, table: EmbeddingTable, fn: MaskFnConfig):
        self.model = model
        self.table = table
        self.fn = fn
        self._cache = {}

    def score_words(self, words) -> tuple[np.ndarray, np.ndarray]:
        missing = [w for w in dict.fromkeys(words) if w not in self._cache]
        if missing:
            scores = np.full(len(missing), self.model.oov_score)
            rows = [i for i, w in enumerate(missing) if w in self.table]
            if rows:
                X = np.stack([self.table.lookup(missing[i]) for i in rows])
                scores[rows] = self.model.score_vectors(X)
            probs = probabilities(self.fn, scores)
            for w, s, p in zip(missing, scores.tolist(), probs.tolist()):
                self._cache[w] = (s, p)
        pairs = [self._cache[w] for w in words]
        return (np.array([s for s, _ in pairs], dtype=np.float64),
                np.array([p for _, p in pairs], dtype=np.float64))


def score_sequence(seq: WordGroupedSequence, model: ScoreModel, table: EmbeddingTable,
                   fn: MaskFnConfig, scorer: WordScorer | None = None) -> WordGroupedSequence:
    """Fill ``word_scores`` and ``word_probs`` in place and return the sequence."""
    scorer = scorer or WordScorer(model, table, fn)
    scores, probs = scorer.score_words(seq.word_surfaces)
    seq.word_scores = scores.tolist()
    seq.word_probs = probs.tolist()
    return seq


def token_probabilities(seq: WordGroupedSequence) -> np.ndarray:
    """Per-position masking probability; positions outside word spans (specials) get 0."""
    out = np.zeros(len(seq.token_ids))
    for (start, end), p in zip(seq.word_spans, seq.word_probs):
        out[start:end] = p
    return out


# -- selection ---------------------------------------------------------------

@njit
def _finalize_loop(p, sizes, selected, cap):
    n = p.shape[0]
    total = 0
    for i in range(n):
        if selected[i]:
            total += sizes[i]
    while total > cap:
        worst = -1
        for i in range(n):
            if selected[i] and (worst < 0 or p[i] < p[worst] or (p[i] == p[worst] and i > worst)):
                worst = i
        selected[worst] = False
        total -= sizes[worst]
    if total == 0:
        best = -1
        for i in range(n):
            if sizes[i] <= cap and (best < 0 or p[i] > p[best]):
                best = i
        if best >= 0:
            selected[best] = True
    return selected


def _finalize_numpy(p, sizes, selected, cap):
    idx = np.flatnonzero(selected)
    total = int(sizes[idx].sum())
    if total > cap:
        # drop lowest probability first; among ties the later position goes first
        order = idx[np.lexsort((-idx, p[idx]))]
        remaining = total - np.cumsum(sizes[order])
        n_drop = int(np.argmax(remaining <= cap)) + 1
        selected[order[:n_drop]] = False
        total = int(remaining[n_drop - 1])
    if total == 0:
        fits = np.flatnonzero(sizes <= cap)
        if fits.size:
            selected[fits[np.argmax(p[fits])]] = True
    return selected


_finalize_kernel = _finalize_loop if NUMBA_ENABLED else _finalize_numpy


def finalize_selection(p, sizes, selected, cap: int) -> np.ndarray:
    """Apply the max_predictions cap and the force-one rule to a raw selection."""
    return _finalize_kernel(np.ascontiguousarray(p, dtype=np.float64),
                            np.ascontiguousarray(sizes, dtype=np.int64),
                            np.array(selected, dtype=np.bool_), int(cap))


def mask_units(seq: WordGroupedSequence, cfg: SequenceConfig):
    """Units eligible for masking and their probabilities: words, or single tokens for random_tm."""
    if cfg.strategy == "random_tm":
        units = [(i, i + 1) for s, e in seq.word_spans for i in range(s, e)]
        probs = np.full(len(units), cfg.target_rate)
    elif cfg.strategy == "random_wwm":
        units = list(seq.word_spans)
        probs = np.full(len(units), cfg.target_rate)
    else:
        if seq.word_probs is None:
            raise ValueError("selective masking needs a scored sequence")
        units = list(seq.word_spans)
        probs = np.asarray(seq.word_probs, dtype=np.float64)
    return units, probs


def select_masks(seq: WordGroupedSequence, cfg: SequenceConfig) -> list[int]:
    """Indices (into :func:`mask_units`) of the units chosen for masking."""
    units, probs = mask_units(seq, cfg)
    if not units:
        return []
    u = rng.uniform_range(cfg.rng_seed, seq.doc_id, seq.seq_index, rng.STREAM_SELECT, len(units))
    sizes = np.array([e - s for s, e in units], dtype=np.int64)
    selected = finalize_selection(probs, sizes, u < probs, cfg.max_predictions)
    return np.flatnonzero(selected).tolist()


# -- corruption --------------------------------------------------------------

def replacement_pool(vocab: Vocab) -> np.ndarray:
    special = vocab.special_ids
    return np.array([i for i in range(len(vocab)) if i not in special], dtype=np.int64)


def fate_of(u: float) -> int:
    if u < MASK_PROB:
        return FATE_MASK
    if u < MASK_PROB + REPLACE_PROB:
        return FATE_REPLACE
    return FATE_KEEP


def corrupt(seq: WordGroupedSequence, selected, vocab: Vocab, cfg: SequenceConfig,
            pool: np.ndarray | None = None, fates_out: list | None = None) -> MaskedExample:
    """80/10/10 corruption; every token of a unit shares the unit's fate draw."""
    if pool is None:
        pool = replacement_pool(vocab)
    units, _ = mask_units(seq, cfg)
    original = list(seq.token_ids)
    inputs = list(original)
    n = len(original)
    labels = [IGNORE_INDEX] * cfg.max_seq_len
    positions = []
    if selected:
        sel = np.asarray(selected, dtype=np.int64)
        fate_u = rng.uniforms(cfg.rng_seed, seq.doc_id, seq.seq_index, rng.STREAM_FATE, sel)
        repl_u = rng.uniform_range(cfg.rng_seed, seq.doc_id, seq.seq_index, rng.STREAM_REPLACE, n)
        repl = pool[(repl_u * len(pool)).astype(np.int64)]
        for unit, u in zip(sel.tolist(), fate_u.tolist()):
            fate = fate_of(u)
            if fates_out is not None:
                fates_out.append(fate)
            start, end = units[unit]
            for i in range(start, end):
                labels[i] = original[i]
                positions.append(i)
                if fate == FATE_MASK:
                    inputs[i] = vocab.mask_id
                elif fate == FATE_REPLACE:
                    inputs[i] = int(repl[i])
    inputs.extend([vocab.pad_id] * (cfg.max_seq_len - n))
    return MaskedExample(inputs, labels, n, sorted(positions), seq.doc_id, seq.seq_index)


# -- run ---------------------------------------------------------------------

@dataclass
class RunStats:
    documents: int = 0
    sequences: int = 0
    skipped_sequences: int = 0
    tokens: int = 0
    masked_tokens: int = 0
    masked_units: int = 0
    capped_sequences: int = 0
    forced_sequences: int = 0
    fates: list = field(default_factory=lambda: [0, 0, 0])
    words: int = 0
    prob_sum: float = 0.0
    seed_words: int = 0
    seed_prob_sum: float = 0.0

    def merge(self, other: "RunStats") -> None:
        for name in ("documents", "sequences", "skipped_sequences", "tokens", "masked_tokens",
                     "masked_units", "capped_sequences", "forced_sequences", "words", "prob_sum",
                     "seed_words", "seed_prob_sum"):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        self.fates = [a + b for a, b in zip(self.fates, other.fates)]

    @property
    def mask_rate(self) -> float:
        return self.masked_tokens / self.tokens if self.tokens else 0.0

    @property
    def enrichment(self) -> float:
        if not self.seed_words or not self.prob_sum:
            return float("nan")
        return (self.seed_prob_sum / self.seed_words) / (self.prob_sum / self.words)


@dataclass
class Masker:
    """Everything needed to turn documents into MaskedExamples; picklable for worker processes."""

    vocab: Vocab
    seq_cfg: SequenceConfig
    fn: MaskFnConfig | None = None
    model: ScoreModel | None = None
    table: EmbeddingTable | None = None
    lexicon: SeedLexicon | None = None
    normalization: Normalization = DEFAULT_NORMALIZATION

    def __post_init__(self):
        if self.seq_cfg.strategy == "selective" and (self.fn is None or self.model is None or self.table is None):
            raise ConfigError("selective masking needs a score model, embeddings and a masking function")
        self._pool = replacement_pool(self.vocab)
        self._scorer = WordScorer(self.model, self.table, self.fn) if self.seq_cfg.strategy == "selective" else None

    def __getstate__(self):
        state = dict(self.__dict__)
        state.pop("_scorer", None)
        state.pop("_pool", None)
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self.__post_init__()

    def process(self, doc_id: int, sentences, stats: RunStats):
        stats.documents += 1
        for seq in build_sequences(sentences, self.vocab, self.seq_cfg, doc_id, self.normalization):
            if self._scorer is not None:
                _, probs = self._scorer.score_words(seq.word_surfaces)
                seq.word_probs = probs.tolist()
                word_p = probs
            else:
                word_p = np.full(seq.n_words, self.seq_cfg.target_rate)
            stats.words += seq.n_words
            stats.prob_sum += float(word_p.sum())
            if self.lexicon is not None:
                seeds = [i for i, w in enumerate(seq.word_surfaces) if w in self.lexicon.class_lo
                         or w in self.lexicon.class_hi]
                stats.seed_words += len(seeds)
                stats.seed_prob_sum += float(word_p[seeds].sum()) if seeds else 0.0

            units, probs = mask_units(seq, self.seq_cfg)
            u = rng.uniform_range(self.seq_cfg.rng_seed, seq.doc_id, seq.seq_index, rng.STREAM_SELECT, len(units))
            sizes = np.array([e - s for s, e in units], dtype=np.int64)
            raw = u < probs
            selected = finalize_selection(probs, sizes, raw, self.seq_cfg.max_predictions)
            if not selected.any():
                stats.skipped_sequences += 1
                logger.warning("doc %d seq %d: no unit fits max_predictions, skipped", doc_id, seq.seq_index)
                continue
            if not raw.any():
                stats.forced_sequences += 1
            elif int(sizes[raw].sum()) > self.seq_cfg.max_predictions:
                stats.capped_sequences += 1
            fates = []
            example = corrupt(seq, np.flatnonzero(selected).tolist(), self.vocab, self.seq_cfg,
                              self._pool, fates)
            for f in fates:
                stats.fates[f] += 1
            stats.sequences += 1
            stats.tokens += sum(e - s for s, e in seq.word_spans)
            stats.masked_tokens += len(example.masked_positions)
            stats.masked_units += len(fates)
            yield example


@dataclass
class RunReport:
    stats: RunStats
    settings: dict

    def lines(self):
        s = self.stats
        for key, value in self.settings.items():
            yield f"{key} = {value}"
        yield f"documents = {s.documents}"
        yield f"sequences = {s.sequences}"
        yield f"skipped_sequences = {s.skipped_sequences}"
        yield f"tokens = {s.tokens}"
        yield f"masked_tokens = {s.masked_tokens}"
        yield f"masked_units = {s.masked_units}"
        yield f"realized_mask_rate = {s.mask_rate:.6f}"
        yield f"capped_sequences = {s.capped_sequences}"
        yield f"forced_sequences = {s.forced_sequences}"
        for name, count in zip(FATE_NAMES, s.fates):
            yield f"fate_{name} = {count}"
        yield f"words = {s.words}"
        yield f"seed_words = {s.seed_words}"
        yield f"mean_word_probability = {s.prob_sum / s.words if s.words else 0.0:.6f}"
        yield f"seed_enrichment = {s.enrichment:.6f}"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.lines():
                fh.write(line + "\n")


def _run_shard(masker: Masker, docs, shard_path):
    stats = RunStats()
    with open(shard_path, "w", encoding="utf-8") as fh:
        for doc_id, sentences in docs:
            for ex in masker.process(doc_id, sentences, stats):
                fh.write(ex.to_json() + "\n")
    return stats


def _batched(iterable, size):
    it = iter(iterable)
    while batch := list(islice(it, size)):
        yield batch


def run_pipeline(corpus_path, output_path, masker: Masker, workers: int = 1,
                 docs_per_shard: int = 256, settings: dict | None = None) -> RunReport:
    """Mask a whole corpus into JSONL. Output bytes do not depend on ``workers``."""
    stats = RunStats()
    if workers <= 1:
        with open(output_path, "w", encoding="utf-8") as fh:
            for doc_id, sentences in iter_corpus(corpus_path):
                for ex in masker.process(doc_id, sentences, stats):
                    fh.write(ex.to_json() + "\n")
    else:
        out_dir = os.path.dirname(os.path.abspath(output_path))
        tmp = tempfile.mkdtemp(prefix=".shards-", dir=out_dir)
        try:
            batches = list(_batched(iter_corpus(corpus_path), docs_per_shard))
            paths = [os.path.join(tmp, f"shard-{i:06d}.jsonl") for i in range(len(batches))]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_run_shard, [masker] * len(batches), batches, paths))
            for r in results:
                stats.merge(r)
            with open(output_path, "wb") as out:
                for p in paths:
                    with open(p, "rb") as fh:
                        shutil.copyfileobj(fh, out)
        finally:
            shutil.rmtree(tmp, ignore_errors=True)
    merged = {"strategy": masker.seq_cfg.strategy, "rng_seed": masker.seq_cfg.rng_seed,
              "max_seq_len": masker.seq_cfg.max_seq_len, "max_predictions": masker.seq_cfg.max_predictions,
              "target_rate": masker.seq_cfg.target_rate}
    if masker.fn is not None:
        merged.update({f"maskfn_{k}": repr(v) if isinstance(v, float) else v for k, v in masker.fn.to_dict().items()})
    merged.update(settings or {})
    return RunReport(stats, merged)


# -- calibration sample ------------------------------------------------------

def sample_token_scores(corpus_path, vocab: Vocab, model: ScoreModel, table: EmbeddingTable,
                        seq_cfg: SequenceConfig, size: int = 1_000_000,
                        normalization: Normalization = DEFAULT_NORMALIZATION) -> np.ndarray:
    """Reservoir sample of per-token word scores over the packed corpus.

    Each sampled token carries the score of the word it belongs to, so the
    sample weights words by their token count.
    """
    if size <= 0:
        raise ValueError("sample size must be positive")
    fn = MaskFnConfig.default("random_baseline")
    scorer = WordScorer(model, table, fn)
    reservoir = np.empty(min(size, 1 << 16), dtype=np.float64)
    seen = 0
    for doc_id, sentences in iter_corpus(corpus_path):
        for seq in build_sequences(sentences, vocab, seq_cfg, doc_id, normalization):
            scores, _ = scorer.score_words(seq.word_surfaces)
            per_token = np.repeat(scores, [e - s for s, e in seq.word_spans])
            n = per_token.shape[0]
            fill = min(max(size - seen, 0), n)
            if seen + fill > reservoir.shape[0]:
                grown = np.empty(min(size, max(2 * reservoir.shape[0], seen + fill)), dtype=np.float64)
                grown[:seen] = reservoir[:seen]
                reservoir = grown
            if fill:
                reservoir[seen:seen + fill] = per_token[:fill]
            if fill < n:
                idx = np.arange(seen + fill, seen + n, dtype=np.int64)
                u = rng.uniforms(seq_cfg.rng_seed, 0, 0, rng.STREAM_RESERVOIR, idx)
                j = (u * (idx + 1)).astype(np.int64)
                for t in np.flatnonzero(j < size).tolist():
                    reservoir[j[t]] = per_token[fill + t]
            seen += n
    return reservoir[:min(seen, size)].copy()
