"""Linear max-margin separator over seed-word embeddings and the distance -> score map.

The separator is trained with Pegasos-style stochastic subgradient descent on the
L2-regularized hinge loss. The bias rides along as an augmented constant feature.
After training the hyperplane is rescaled to unit normal, so ``w @ x + b`` is the
signed euclidean distance, and scores are ``clamp(5 + k * distance, 0, 10)``.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from ._accel import njit
from .embeddings import EmbeddingTable
from .errors import DataFormatError, TrainingError
from .lexicon import SeedLexicon

logger = logging.getLogger(__name__)

MODEL_MAGIC = b"SMSCORE\x00"
MODEL_VERSION = 1
_HEADER = struct.Struct("<8sII3d")

SCORE_MIN = 0.0
SCORE_MID = 5.0
SCORE_MAX = 10.0
ANCHOR_PERCENTILE = 95.0


@dataclass(frozen=True)
class TrainingStats:
    accuracy: float
    margin: float
    iterations: int
    n_train: int
    dropped: tuple = ()


@dataclass(frozen=True, eq=False)
class ScoreModel:
    w: np.ndarray
    b: float
    k: float
    oov_score: float = SCORE_MID
    stats: TrainingStats | None = field(default=None, compare=False)

    def __post_init__(self):
        w = np.ascontiguousarray(self.w, dtype=np.float64)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        if not self.k > 0:
            raise ValueError(f"scale k must be positive, got {self.k}")
        if not SCORE_MIN <= self.oov_score <= SCORE_MAX:
            raise ValueError(f"oov_score must lie in [0, 10], got {self.oov_score}")

    def __eq__(self, other):
        if not isinstance(other, ScoreModel):
            return NotImplemented
        return (np.array_equal(self.w, other.w) and self.b == other.b
                and self.k == other.k and self.oov_score == other.oov_score)

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    def distance(self, x) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) @ self.w + self.b

    def score_vectors(self, x) -> np.ndarray:
        return np.clip(SCORE_MID + self.k * self.distance(x), SCORE_MIN, SCORE_MAX)

    def with_oov_score(self, oov_score: float) -> "ScoreModel":
        return replace(self, oov_score=float(oov_score))

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(MODEL_MAGIC, MODEL_VERSION, self.dim, self.k, self.b, self.oov_score)
        return head + self.w.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "ScoreModel":
        if len(data) < _HEADER.size:
            raise DataFormatError("score model file truncated")
        magic, version, dim, k, b, oov = _HEADER.unpack_from(data)
        if magic != MODEL_MAGIC:
            raise DataFormatError("not a score model file (bad magic)")
        if version != MODEL_VERSION:
            raise DataFormatError(f"unsupported score model version {version}")
        if len(data) != _HEADER.size + 8 * dim:
            raise DataFormatError(f"score model size mismatch for dim={dim}")
        w = np.frombuffer(data, dtype="<f8", count=dim, offset=_HEADER.size).astype(np.float64)
        return cls(w, b, k, oov)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "ScoreModel":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


@njit
def _pegasos(X, y, order, lam, avg_from):
    n, d = X.shape
    w = np.zeros(d + 1)
    acc = np.zeros(d + 1)
    n_acc = 0
    for t in range(1, order.shape[0] + 1):
        i = order[t - 1]
        eta = 1.0 / (lam * t)
        z = w[d]
        for j in range(d):
            z += w[j] * X[i, j]
        shrink = 1.0 - eta * lam
        for j in range(d + 1):
            w[j] *= shrink
        if y[i] * z < 1.0:
            step = eta * y[i]
            for j in range(d):
                w[j] += step * X[i, j]
            w[d] += step
        if t > avg_from:
            for j in range(d + 1):
                acc[j] += w[j]
            n_acc += 1
    return acc / n_acc


def pegasos(X, y, *, reg_C: float = 1.0, epochs: int = 200, rng_seed: int = 0):
    """Minimize ``lam/2 |[w,b]|^2 + mean(hinge)`` with ``lam = 1/(C n)`` and step ``1/(lam t)``.

    Each epoch visits every point once in a seeded random order. The returned
    hyperplane is the average of the iterates over the second half of training.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = X.shape[0]
    lam = 1.0 / (reg_C * n)
    rng = np.random.default_rng(rng_seed)
    order = np.concatenate([rng.permutation(n) for _ in range(epochs)]).astype(np.int64)
    wb = _pegasos(X, y, order, lam, order.shape[0] // 2)
    return wb[:-1].copy(), float(wb[-1])


def hinge_objective(w, b, X, y, reg_C: float = 1.0) -> float:
    lam = 1.0 / (reg_C * len(y))
    margins = y * (X @ w + b)
    return 0.5 * lam * (float(w @ w) + b * b) + float(np.mean(np.maximum(0.0, 1.0 - margins)))


def train_scorer(lexicon: SeedLexicon, table: EmbeddingTable, reg_C: float = 1.0,
                 epochs: int = 200, rng_seed: int = 0, oov_score: float = SCORE_MID) -> ScoreModel:
    if reg_C <= 0 or epochs <= 0:
        raise ValueError("reg_C and epochs must be positive")
    # canonical order keeps training invariant to which file is lo and which is hi
    words = sorted(lexicon.words)
    kept = [w for w in words if w in table]
    dropped = tuple(w for w in words if w not in table)
    if dropped:
        logger.warning("%d seed words have no embedding and were dropped", len(dropped))
    labels = np.array([lexicon.label(w) for w in kept], dtype=np.float64)
    if not (labels < 0).any() or not (labels > 0).any():
        raise TrainingError("class has no embedded words")
    X = np.stack([table.lookup(w) for w in kept])
    if np.all(X == X[0]):
        raise TrainingError("degenerate training set")

    # train on unit-mean-norm inputs so the learned direction ignores global embedding scale
    scale = float(np.mean(np.linalg.norm(X, axis=1)))
    if not scale > 0:
        raise TrainingError("degenerate training set")
    w, b = pegasos(X / scale, labels, reg_C=reg_C, epochs=epochs, rng_seed=rng_seed)
    w = w / scale
    norm = float(np.linalg.norm(w))
    if not norm > 0:
        raise TrainingError("degenerate training set")
    w = w / norm
    b = b / norm
    dist = X @ w + b
    anchor = float(np.percentile(np.abs(dist), ANCHOR_PERCENTILE))
    if not anchor > 0:
        raise TrainingError("degenerate training set")
    k = (SCORE_MAX - SCORE_MID) / anchor
    stats = TrainingStats(
        accuracy=float(np.mean(np.sign(dist) == labels)),
        margin=float(np.min(labels * dist)),
        iterations=epochs * len(kept),
        n_train=len(kept),
        dropped=dropped,
    )
    return ScoreModel(w, b, k, oov_score, stats)


def task_score(model: ScoreModel, word: str, table: EmbeddingTable) -> float:
    x = table.lookup(word)
    if x is None:
        return model.oov_score
    return float(model.score_vectors(x))
