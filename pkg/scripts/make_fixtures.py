#!/usr/bin/env python
"""Regenerate the bundled toy assets and their manifest.

Everything is synthetic and derived from a fixed seed:

* toy_embeddings.txt -- 200 words, dim 16. Positive seeds sit near +2u, negative
  seeds near -2u for a fixed unit direction u, so the two seed classes are
  linearly separable. Mildly polar non-seed words sit at +-(0.8..1.6)u, neutral
  words near 0.
* toy_vocab.txt -- 120 WordPiece tokens: specials, punctuation, single letters
  with ``##`` continuations, and a handful of whole words and suffixes.
* seeds_lo.txt / seeds_hi.txt -- 30 negative / 30 positive seed words.
* toy_corpus.txt -- 100 documents x 20 sentences of filler text with seed words
  sprinkled in at a known rate.

Usage: python scripts/make_fixtures.py [output_dir]
"""

import hashlib
import json
import string
import sys
from pathlib import Path

import numpy as np

SEED = 20240601
DIM = 16

POSITIVE = """good great excellent wonderful amazing superb brilliant lovely delightful fantastic
enjoyable charming beautiful perfect pleasant moving touching clever funny witty stunning gripping
fresh heartfelt marvelous splendid terrific outstanding inspiring memorable""".split()
NEGATIVE = """bad awful terrible horrible boring dull poor weak stupid mediocre dreadful tedious
annoying clumsy bland lame messy painful pathetic pointless predictable silly sloppy tiresome ugly
unfunny worst forgettable shallow lousy""".split()
MILD_POSITIVE = "decent fine solid nice likable agreeable warm sweet gentle engaging".split()
MILD_NEGATIVE = "flawed uneven overlong slow odd thin stale muddled noisy cheap".split()
NEUTRAL = """the a an and but or so of to in on at by for with from about as into over after before
during while when then than that this these those it its they them he she his her we our you your
i me my is was were are be been being has have had do did does will would could should may might
movie film story plot scene scenes actor actress director script cast camera music ending character
characters dialogue screen audience sequel theater ticket popcorn minute minutes hour hours night
day week year time people friend family city house car door window table room street road train
very quite rather really just also too still even almost""".split()
OOV_NAMES = "alice bob carol dave erin frank grace heidi".split()
OOV_NUMBERS = "1999 2004 42 7".split()

EXTRA_TOKENS = """the a an and but of to in it is was this that movie film story plot scene very
un ##aff ##able ##ing ##ed ##ly ##s ##er ##est ##ful ##ness ##ion ##tion ##or ##ress ##ent ##ant
##al ##ic ##le ##ous ##ive ##ment re direct act char ##acter end music cast good bad great
##ish ##ity ##ible ##ter ##ight dis
""".split()
PUNCT = list(".,!?'-")
SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
VOCAB_SIZE = 120


def make_vocab():
    letters = list(string.ascii_lowercase)
    tokens = SPECIALS + PUNCT + letters + ["##" + c for c in letters]
    for tok in EXTRA_TOKENS:
        if tok not in tokens and len(tokens) < VOCAB_SIZE:
            tokens.append(tok)
    assert len(tokens) == VOCAB_SIZE, len(tokens)
    return tokens


def make_embeddings(rng):
    u = rng.normal(size=DIM)
    u /= np.linalg.norm(u)
    words = []
    vectors = []

    def add(word, polarity):
        noise = rng.normal(scale=0.35, size=DIM)
        noise -= (noise @ u) * u * 0.5
        words.append(word)
        vectors.append(polarity * u + noise)

    for w in POSITIVE:
        add(w, rng.uniform(1.6, 2.4))
    for w in NEGATIVE:
        add(w, -rng.uniform(1.6, 2.4))
    for w in MILD_POSITIVE:
        add(w, rng.uniform(0.8, 1.6))
    for w in MILD_NEGATIVE:
        add(w, -rng.uniform(0.8, 1.6))
    for w in NEUTRAL:
        add(w, rng.normal(scale=0.3))
    order = rng.permutation(len(words))
    lines = [f"{len(words)} {DIM}"]
    for i in order:
        lines.append(words[i] + " " + " ".join(f"{v:.6f}" for v in vectors[i]))
    return "\n".join(lines) + "\n", len(words)


def make_corpus(rng, n_docs=100, sents_per_doc=20):
    zipf = 1.0 / np.arange(1, len(NEUTRAL) + 1) ** 0.6
    zipf /= zipf.sum()
    neutral = list(NEUTRAL)
    rng.shuffle(neutral)
    seeds = POSITIVE + NEGATIVE
    mild = MILD_POSITIVE + MILD_NEGATIVE
    docs = []
    for _ in range(n_docs):
        sents = []
        for _ in range(sents_per_doc):
            n = int(rng.integers(8, 15))
            words = list(rng.choice(neutral, size=n, p=zipf))
            extras = []
            if rng.random() < 0.45:
                extras.append(seeds[rng.integers(len(seeds))])
            if rng.random() < 0.30:
                extras.append(mild[rng.integers(len(mild))])
            if rng.random() < 0.10:
                extras.append(OOV_NAMES[rng.integers(len(OOV_NAMES))])
            if rng.random() < 0.05:
                extras.append(OOV_NUMBERS[rng.integers(len(OOV_NUMBERS))])
            for w in extras:
                words.insert(int(rng.integers(0, len(words) + 1)), w)
            words[0] = words[0].capitalize()
            sents.append(" ".join(words) + str(rng.choice([".", ".", ".", "!", "?"])))
        docs.append("\n".join(sents))
    return "\n\n".join(docs) + "\n"


ASSETS = {
    "toy_embeddings": ("toy_embeddings.txt", "word2vec text embeddings, 200 words x 16 dims, separable seed classes"),
    "toy_vocab": ("toy_vocab.txt", "120-token WordPiece vocab with BERT special tokens"),
    "seeds_lo": ("seeds_lo.txt", "30 negative-sentiment seed words (score 0 class)"),
    "seeds_hi": ("seeds_hi.txt", "30 positive-sentiment seed words (score 10 class)"),
    "toy_corpus": ("toy_corpus.txt", "synthetic corpus, 100 documents x 20 sentences, seed words at a known rate"),
}


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    emb, _ = make_embeddings(rng)
    contents = {
        "toy_embeddings": emb,
        "toy_vocab": "\n".join(make_vocab()) + "\n",
        "seeds_lo": "# negative sentiment seeds\n" + "\n".join(NEGATIVE) + "\n",
        "seeds_hi": "# positive sentiment seeds\n" + "\n".join(POSITIVE) + "\n",
        "toy_corpus": make_corpus(rng),
    }
    manifest = {}
    for name, (fname, desc) in ASSETS.items():
        data = contents[name].encode("utf-8")
        (out / fname).write_bytes(data)
        manifest[name] = {"path": fname, "sha256": hashlib.sha256(data).hexdigest(), "description": desc}
    (out / "MANIFEST.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "src/selmask/fixtures/data")
