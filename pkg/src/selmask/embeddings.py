"""word2vec text-format embedding tables."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmbeddingFormatError
from .text import DEFAULT_NORMALIZATION, Normalization

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    words: tuple
    vectors: np.ndarray  # (vocab_size, dim) float64, read-only
    collapsed: int = 0
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {w: i for i, w in enumerate(self.words)})
        self.vectors.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def vocab_size(self) -> int:
        return len(self.words)

    def __contains__(self, word) -> bool:
        return word in self.index

    def __len__(self) -> int:
        return len(self.words)

    def __eq__(self, other):
        if not isinstance(other, EmbeddingTable):
            return NotImplemented
        return self.words == other.words and np.array_equal(self.vectors, other.vectors)

    def lookup(self, word: str):
        """Return the stored vector for ``word``, or None when absent."""
        i = self.index.get(word)
        return None if i is None else self.vectors[i]


def lookup(table: EmbeddingTable, word: str):
    return table.lookup(word)


def _parse_header(line: str):
    parts = line.split()
    if len(parts) != 2:
        raise EmbeddingFormatError(f"line 1: malformed header {line.strip()!r}, expected 'count dim'")
    try:
        count, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise EmbeddingFormatError(f"line 1: malformed header {line.strip()!r}, expected 'count dim'") from None
    if count < 0 or dim <= 0:
        raise EmbeddingFormatError(f"line 1: malformed header {line.strip()!r}")
    return count, dim


def load_embeddings(path, normalization: Normalization = DEFAULT_NORMALIZATION) -> EmbeddingTable:
    """Parse a word2vec text file: ``count dim`` header then ``word v1 .. vdim`` rows.

    Keys are normalized; when two rows collapse to the same key the first one
    wins and the collision is counted in ``collapsed``.
    """
    words = []
    rows = []
    seen = set()
    collapsed = 0
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            raise EmbeddingFormatError("line 1: missing header")
        _, dim = _parse_header(header)
        for lineno, line in enumerate(fh, 2):
            parts = line.rstrip("\n").rstrip("\r").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            word, comps = parts[0], parts[1:]
            if len(comps) != dim:
                raise EmbeddingFormatError(f"line {lineno}: expected {dim} components, got {len(comps)}")
            try:
                vec = [float(c) for c in comps]
            except ValueError as exc:
                raise EmbeddingFormatError(f"line {lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in vec):
                raise EmbeddingFormatError(f"line {lineno}: non-finite component")
            key = normalization(word)
            if key in seen:
                collapsed += 1
                continue
            seen.add(key)
            words.append(key)
            rows.append(vec)
    if collapsed:
        logger.warning("%s: %d rows collapsed onto existing keys after normalization", path, collapsed)
    vectors = np.asarray(rows, dtype=np.float64).reshape(len(rows), dim)
    return EmbeddingTable(tuple(words), vectors, collapsed)
