"""Re-derive masking statistics from a JSONL output file.

Words are recovered from the original token ids (labels at masked positions,
inputs elsewhere) by grouping each token with its ``##`` continuations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lexicon import SeedLexicon
from .pipeline import IGNORE_INDEX, MaskedExample
from .tokenizer import CONTINUATION, UNK, Vocab


@dataclass
class OutputStats:
    examples: int = 0
    tokens: int = 0
    masked_tokens: int = 0
    words: int = 0
    masked_words: int = 0
    partial_words: int = 0
    token_fates: dict = field(default_factory=lambda: {"mask": 0, "replace": 0, "keep": 0})
    word_fates: dict = field(default_factory=lambda: {"mask": 0, "replace": 0, "keep": 0, "mixed": 0})
    seed_words: int = 0
    masked_seed_words: int = 0

    @property
    def mask_rate(self) -> float:
        return self.masked_tokens / self.tokens if self.tokens else 0.0

    @property
    def enrichment(self) -> float:
        if not self.seed_words or not self.masked_words:
            return float("nan")
        return (self.masked_seed_words / self.seed_words) / (self.masked_words / self.words)

    def fate_fractions(self, level: str = "token") -> dict:
        counts = self.token_fates if level == "token" else {
            k: v for k, v in self.word_fates.items() if k != "mixed"}
        total = sum(counts.values())
        return {k: (v / total if total else 0.0) for k, v in counts.items()}

    def lines(self):
        yield f"examples = {self.examples}"
        yield f"tokens = {self.tokens}"
        yield f"masked_tokens = {self.masked_tokens}"
        yield f"realized_mask_rate = {self.mask_rate:.6f}"
        yield f"words = {self.words}"
        yield f"masked_words = {self.masked_words}"
        yield f"whole_word_violations = {self.partial_words}"
        for k, v in self.fate_fractions("token").items():
            yield f"token_fate_{k} = {v:.6f}"
        for k, v in self.word_fates.items():
            yield f"word_fate_{k}_count = {v}"
        yield f"seed_words = {self.seed_words}"
        yield f"masked_seed_words = {self.masked_seed_words}"
        yield f"seed_enrichment = {self.enrichment:.6f}"


def _fate(inp, label, mask_id):
    if inp == mask_id:
        return "mask"
    if inp == label:
        return "keep"
    return "replace"


def word_groups(original, vocab: Vocab):
    """Split non-special positions into words: a token plus its following continuations."""
    special = vocab.special_ids
    groups = []
    for i, tok in enumerate(original):
        if tok in special and tok != vocab.unk_id:
            continue
        if groups and groups[-1][-1] == i - 1 and vocab.tokens[tok].startswith(CONTINUATION):
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def surface(group, original, vocab: Vocab) -> str | None:
    pieces = [vocab.tokens[original[i]] for i in group]
    if UNK in pieces:
        return None
    return "".join(p[len(CONTINUATION):] if p.startswith(CONTINUATION) else p for p in pieces)


def analyze_examples(examples, vocab: Vocab, lexicon: SeedLexicon | None = None) -> OutputStats:
    st = OutputStats()
    seeds = lexicon.words if lexicon is not None else frozenset()
    for ex in examples:
        st.examples += 1
        n = ex.attention_len
        original = [lab if lab != IGNORE_INDEX else inp for inp, lab in zip(ex.input_ids[:n], ex.label_ids[:n])]
        masked = set(ex.masked_positions)
        for group in word_groups(original, vocab):
            hits = [i for i in group if i in masked]
            st.words += 1
            st.tokens += len(group)
            st.masked_tokens += len(hits)
            for i in hits:
                st.token_fates[_fate(ex.input_ids[i], ex.label_ids[i], vocab.mask_id)] += 1
            if hits:
                st.masked_words += 1
                if len(hits) != len(group):
                    st.partial_words += 1
                    st.word_fates["mixed"] += 1
                else:
                    kinds = {_fate(ex.input_ids[i], ex.label_ids[i], vocab.mask_id) for i in group}
                    st.word_fates[kinds.pop() if len(kinds) == 1 else "mixed"] += 1
            if seeds and surface(group, original, vocab) in seeds:
                st.seed_words += 1
                st.masked_seed_words += bool(hits)
    return st


def iter_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield MaskedExample.from_json(line)


def analyze_jsonl(path, vocab: Vocab, lexicon: SeedLexicon | None = None) -> OutputStats:
    return analyze_examples(iter_jsonl(path), vocab, lexicon)
