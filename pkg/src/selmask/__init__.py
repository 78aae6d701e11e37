"""Task-specific selective masking for masked-language-model pre-training data."""

__version__ = "0.1.0"

from ._accel import NUMBA_ENABLED, backend
from .embeddings import EmbeddingTable, load_embeddings, lookup
from .lexicon import SeedLexicon, load_lexicon
from .maskfn import (CalibrationReport, MaskFnConfig, calibrate, expected_mask_rate, extremity,
                     probabilities, probability)
from .pipeline import (IGNORE_INDEX, MaskedExample, Masker, SequenceConfig, build_sequences, corrupt,
                       run_pipeline, score_sequence, select_masks)
from .scorer import ScoreModel, task_score, train_scorer
from .text import Normalization
from .tokenizer import Vocab, WordGroupedSequence, load_vocab, tokenize_text, tokenize_word

__all__ = [
    "NUMBA_ENABLED", "backend", "EmbeddingTable", "load_embeddings", "lookup", "SeedLexicon",
    "load_lexicon", "CalibrationReport", "MaskFnConfig", "calibrate", "expected_mask_rate", "extremity",
    "probabilities", "probability", "IGNORE_INDEX", "MaskedExample", "Masker", "SequenceConfig",
    "build_sequences", "corrupt", "run_pipeline", "score_sequence", "select_masks", "ScoreModel",
    "task_score", "train_scorer", "Normalization", "Vocab", "WordGroupedSequence", "load_vocab",
    "tokenize_text", "tokenize_word",
]
