"""Seed word lists defining the two extremes of a task."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import LexiconError
from .text import DEFAULT_NORMALIZATION, Normalization


@dataclass(frozen=True)
class SeedLexicon:
    """Two disjoint classes of normalized seed words.

    ``class_lo`` words are anchored at score 0 and ``class_hi`` words at 10.
    Swapping the two files mirrors every score (s -> 10 - s).
    """

    class_lo: frozenset
    class_hi: frozenset
    name: str = ""

    def __post_init__(self):
        if not self.class_lo or not self.class_hi:
            raise LexiconError("empty seed class")
        both = self.class_lo & self.class_hi
        if both:
            raise LexiconError(f"word in both classes: {', '.join(sorted(both))}")

    @property
    def words(self) -> frozenset:
        return self.class_lo | self.class_hi

    def label(self, word: str) -> int:
        """-1 for class_lo, +1 for class_hi, 0 for non-seed words."""
        if word in self.class_lo:
            return -1
        if word in self.class_hi:
            return 1
        return 0

    def swapped(self) -> "SeedLexicon":
        return SeedLexicon(self.class_hi, self.class_lo, self.name)


def read_word_list(path, normalization: Normalization = DEFAULT_NORMALIZATION) -> list[str]:
    words = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            entry = line.strip()
            if not entry or entry.startswith("#"):
                continue
            if len(entry.split()) > 1:
                raise LexiconError(f"{path}:{lineno}: multi-word entry not supported: {entry!r}")
            words.append(normalization(entry))
    return words


def load_lexicon(path_lo, path_hi, normalization: Normalization = DEFAULT_NORMALIZATION,
                 name: str | None = None) -> SeedLexicon:
    lo = frozenset(read_word_list(path_lo, normalization))
    hi = frozenset(read_word_list(path_hi, normalization))
    if name is None:
        name = f"{Path(path_lo).stem}/{Path(path_hi).stem}"
    return SeedLexicon(lo, hi, name)
