"""WordPiece tokenization that keeps track of whole-word spans."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field

from .errors import VocabError
from .text import DEFAULT_NORMALIZATION, Normalization

PAD, UNK, CLS, SEP, MASK = "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"
SPECIAL_TOKENS = (PAD, UNK, CLS, SEP, MASK)
CONTINUATION = "##"
DEFAULT_MAX_CHARS = 100


@dataclass(frozen=True, eq=False)
class Vocab:
    tokens: tuple
    index: dict = field(init=False, repr=False)
    _cache: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tokens)})
        object.__setattr__(self, "_cache", {})
        missing = [t for t in SPECIAL_TOKENS if t not in self.index]
        if missing:
            raise VocabError(f"vocab missing special token {missing[0]}")
        if len(self.index) != len(self.tokens):
            raise VocabError("vocab has duplicate tokens")

    def __len__(self):
        return len(self.tokens)

    def __eq__(self, other):
        return isinstance(other, Vocab) and self.tokens == other.tokens

    def __hash__(self):
        return hash(self.tokens)

    @property
    def pad_id(self):
        return self.index[PAD]

    @property
    def unk_id(self):
        return self.index[UNK]

    @property
    def cls_id(self):
        return self.index[CLS]

    @property
    def sep_id(self):
        return self.index[SEP]

    @property
    def mask_id(self):
        return self.index[MASK]

    @property
    def special_ids(self) -> frozenset:
        return frozenset(self.index[t] for t in SPECIAL_TOKENS)

    def is_continuation(self, token_id: int) -> bool:
        return self.tokens[token_id].startswith(CONTINUATION)


def load_vocab(path) -> Vocab:
    """BERT vocab.txt: one token per line, id = zero-based line number."""
    with open(path, encoding="utf-8") as fh:
        tokens = [line.rstrip("\n").rstrip("\r") for line in fh]
    while tokens and tokens[-1] == "":
        tokens.pop()
    first_line = {}
    for lineno, tok in enumerate(tokens, 1):
        if tok in first_line:
            raise VocabError(f"duplicate token {tok!r} on lines {first_line[tok]} and {lineno}")
        first_line[tok] = lineno
    return Vocab(tuple(tokens))


def tokenize_word(vocab: Vocab, word: str, max_chars: int = DEFAULT_MAX_CHARS) -> list[int]:
    """Greedy longest-match-first WordPiece; any failure yields ``[UNK]``."""
    key = (word, max_chars)
    cached = vocab._cache.get(key)
    if cached is not None:
        return list(cached)
    ids = _wordpiece(vocab, word, max_chars)
    vocab._cache[key] = tuple(ids)
    return ids


def _wordpiece(vocab, word, max_chars):
    if len(word) > max_chars:
        return [vocab.unk_id]
    ids = []
    start = 0
    while start < len(word):
        end = len(word)
        found = None
        while start < end:
            piece = word[start:end]
            if start > 0:
                piece = CONTINUATION + piece
            found = vocab.index.get(piece)
            if found is not None:
                break
            end -= 1
        if found is None:
            return [vocab.unk_id]
        ids.append(found)
        start = end
    return ids


def is_punctuation(ch: str) -> bool:
    cp = ord(ch)
    if 33 <= cp <= 47 or 58 <= cp <= 64 or 91 <= cp <= 96 or 123 <= cp <= 126:
        return True
    return unicodedata.category(ch).startswith("P")


def split_words(text: str, normalization: Normalization = DEFAULT_NORMALIZATION) -> list[str]:
    """Whitespace split, then every punctuation character becomes its own word."""
    words = []
    for chunk in normalization(text).split():
        buf = []
        for ch in chunk:
            if is_punctuation(ch):
                if buf:
                    words.append("".join(buf))
                    buf = []
                words.append(ch)
            else:
                buf.append(ch)
        if buf:
            words.append("".join(buf))
    return words


@dataclass
class WordGroupedSequence:
    """Token ids partitioned into whole-word spans ``[start, end)``.

    Non-span positions must hold special tokens. ``word_scores`` and
    ``word_probs`` are filled by the pipeline.
    """

    token_ids: list
    word_spans: list
    word_surfaces: list
    word_scores: list | None = None
    word_probs: list | None = None
    doc_id: int = 0
    seq_index: int = 0

    def __len__(self):
        return len(self.token_ids)

    @property
    def n_words(self) -> int:
        return len(self.word_spans)


def tokenize_text(vocab: Vocab, text: str, normalization: Normalization = DEFAULT_NORMALIZATION,
                  max_chars: int = DEFAULT_MAX_CHARS) -> WordGroupedSequence:
    ids, spans, surfaces = [], [], []
    for word in split_words(text, normalization):
        pieces = tokenize_word(vocab, word, max_chars)
        spans.append((len(ids), len(ids) + len(pieces)))
        ids.extend(pieces)
        surfaces.append(word)
    return WordGroupedSequence(ids, spans, surfaces)


def check_partition(seq: WordGroupedSequence, vocab: Vocab) -> list[str]:
    """Return the list of span-invariant violations (empty when the sequence is well formed)."""
    problems = []
    n = len(seq.token_ids)
    covered = [False] * n
    prev_end = 0
    for start, end in seq.word_spans:
        if not (0 <= start < end <= n):
            problems.append(f"span ({start}, {end}) out of range")
            continue
        if start < prev_end:
            problems.append(f"span ({start}, {end}) overlaps or is unsorted")
        prev_end = end
        for i in range(start, end):
            covered[i] = True
            if seq.token_ids[i] in vocab.special_ids:
                problems.append(f"span ({start}, {end}) contains special token at {i}")
        if vocab.is_continuation(seq.token_ids[start]) and start > 0 and covered[start - 1]:
            problems.append(f"span ({start}, {end}) starts with a continuation token")
    for i, c in enumerate(covered):
        if not c and seq.token_ids[i] not in vocab.special_ids:
            problems.append(f"position {i} not covered by any span")
    return problems
