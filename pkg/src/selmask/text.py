"""Word normalization shared by every input reader."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass


@dataclass(frozen=True)
class Normalization:
    """Case-folding policy applied to seed words, embedding keys and corpus text.

    The default (lowercase, NFC, accents kept) matches uncased BERT vocabularies.
    """

    lowercase: bool = True
    form: str = "NFC"
    strip_accents: bool = False

    def __call__(self, text: str) -> str:
        if self.strip_accents:
            text = unicodedata.normalize("NFD", text)
            text = "".join(ch for ch in text if unicodedata.category(ch) != "Mn")
        if self.lowercase:
            text = text.lower()
        if self.form:
            text = unicodedata.normalize(self.form, text)
        return text


DEFAULT_NORMALIZATION = Normalization()
