import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selmask.errors import VocabError
from selmask.tokenizer import (SPECIAL_TOKENS, WordGroupedSequence, load_vocab, split_words, tokenize_text,
                               tokenize_word)


def pieces(vocab, ids):
    return [vocab.tokens[i] for i in ids]


def validate_spans(seq: WordGroupedSequence, vocab) -> bool:
    """Brute-force partition check: every non-special position in exactly one span."""
    special = {vocab.index[t] for t in SPECIAL_TOKENS}
    owner = {}
    for k, (s, e) in enumerate(seq.word_spans):
        if not s < e:
            return False
        for i in range(s, e):
            if i in owner:
                return False
            owner[i] = k
    for i, tok in enumerate(seq.token_ids):
        in_span = i in owner
        if (tok in special) == in_span and tok != vocab.unk_id:
            return False
        if vocab.tokens[tok].startswith("##") and (i - 1 not in owner or owner[i - 1] != owner.get(i)):
            return False
    starts = [s for s, _ in seq.word_spans]
    return starts == sorted(starts)


def test_load_fixture_vocab(vocab):
    assert len(vocab) == 120


def test_eight_line_vocab(write):
    v = load_vocab(write("v.txt", "\n".join(list(SPECIAL_TOKENS) + ["un", "##aff", "##able"]) + "\n"))
    assert len(v) == 8
    assert pieces(v, tokenize_word(v, "unaffable")) == ["un", "##aff", "##able"]


def test_missing_special(write):
    with pytest.raises(VocabError, match=r"vocab missing special token \[MASK\]"):
        load_vocab(write("v.txt", "[PAD]\n[UNK]\n[CLS]\n[SEP]\nun\n"))


def test_duplicate_token(write):
    with pytest.raises(VocabError, match="lines 6 and 7"):
        load_vocab(write("v.txt", "\n".join(list(SPECIAL_TOKENS) + ["un", "un"]) + "\n"))


def test_unaffable(vocab):
    assert pieces(vocab, tokenize_word(vocab, "unaffable")) == ["un", "##aff", "##able"]


def test_no_prefix_is_unk(write):
    v = load_vocab(write("v.txt", "\n".join(list(SPECIAL_TOKENS) + ["un", "##aff"]) + "\n"))
    assert tokenize_word(v, "xyz") == [v.unk_id]
    # a failure after a partial match still yields a single [UNK]
    assert tokenize_word(v, "unxyz") == [v.unk_id]


def test_max_chars(vocab):
    assert tokenize_word(vocab, "a" * 101) == [vocab.unk_id]
    assert tokenize_word(vocab, "a" * 100) != [vocab.unk_id]


def test_greedy_longest_match(vocab):
    assert pieces(vocab, tokenize_word(vocab, "movie")) == ["movie"]
    assert pieces(vocab, tokenize_word(vocab, "acting")) == ["act", "##ing"]


def test_split_words():
    assert split_words("Good movie!") == ["good", "movie", "!"]
    assert split_words("") == []
    assert split_words("it's  fine,ok") == ["it", "'", "s", "fine", ",", "ok"]


def test_tokenize_text(vocab):
    seq = tokenize_text(vocab, "Good movie!")
    assert seq.word_surfaces == ["good", "movie", "!"]
    assert len(seq.word_spans) == 3
    assert validate_spans(seq, vocab)
    assert tokenize_text(vocab, "").token_ids == []


def test_corpus_lines_partition(vocab, paths):
    lines = paths["toy_corpus"].read_text().splitlines()
    for line in (lines * 5)[:10_000]:
        assert validate_spans(tokenize_text(vocab, line), vocab)


@settings(max_examples=1000, deadline=None)
@given(st.text(max_size=60))
def test_partition_on_random_unicode(vocab, text):
    seq = tokenize_text(vocab, text)
    assert validate_spans(seq, vocab)
    # word-level round trip
    for (s, e), w in zip(seq.word_spans, seq.word_surfaces):
        toks = pieces(vocab, seq.token_ids[s:e])
        if toks != ["[UNK]"]:
            assert "".join(t[2:] if t.startswith("##") else t for t in toks) == w


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=30))
def test_tokenize_word_deterministic(vocab, word):
    assert tokenize_word(vocab, word) == tokenize_word(vocab, word)
