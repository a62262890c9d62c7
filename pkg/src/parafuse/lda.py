"""Topic models trained by collapsed Gibbs sampling, with fold-in inference.

Training consumes the corpus through the baseline token pipeline. At inference
time plain tokenization suffices: stopwords were never admitted to the
vocabulary, so unknown-word skipping removes them for free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import textproc
from ._binio import Reader, Writer
from ._kernels import fold_in, gibbs_sweep, token_log_likelihood
from .corpus import Corpus
from .errors import PersistenceError
from .seeds import DOMAIN_INFER, derive_seed, text_fingerprint

_MAGIC = b"FLDA"
_VERSION = 1

INFER_ITERATIONS = 50
INFER_BURN_IN = 20

_DIST_TOL = 1e-9


@dataclass
class LdaModel:
    n_topics: int
    vocabulary: dict[str, int]
    topic_word: np.ndarray  # (K, V) word probabilities per topic, rows sum to 1
    alpha: float
    beta: float
    seed: int
    log_likelihood: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.n_topics < 2:
            raise ValueError(f"topic count must be >= 2, got {self.n_topics}")
        if self.topic_word.shape != (self.n_topics, len(self.vocabulary)):
            raise ValueError("topic_word shape disagrees with n_topics / vocabulary")
        if not np.all(self.topic_word > 0.0):
            raise ValueError("topic_word entries must be strictly positive (smoothed)")
        row_sums = self.topic_word.sum(axis=1)
        if not np.all(np.abs(row_sums - 1.0) <= _DIST_TOL):
            raise ValueError("every topic_word row must sum to 1")


def _check_distribution(vector: np.ndarray) -> np.ndarray:
    assert vector.ndim == 1
    assert np.all(vector >= 0.0) and abs(float(vector.sum()) - 1.0) <= _DIST_TOL
    return vector


def train_lda(
    corpus: Corpus,
    n_topics: int,
    *,
    stopwords: frozenset[str],
    alpha: float | None = None,
    beta: float = 0.01,
    iterations: int = 1000,
    seed: int = 0,
) -> LdaModel:
    """Collapsed Gibbs sampling; deterministic for a fixed seed.

    Word probabilities are read out from the final sample as
    (n_kw + beta) / (n_k + V*beta). The per-iteration in-sample token
    log-likelihood is kept on the model for diagnostics.
    """
    if n_topics < 2:
        raise ValueError(f"topic count must be >= 2, got {n_topics}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    if alpha is None:
        alpha = 50.0 / n_topics

    docs_tokens = [
        [t.surface for t in textproc.remove_stopwords(textproc.tokenize(p.text), stopwords)]
        for p in corpus
    ]
    vocabulary = {term: i for i, term in enumerate(sorted({t for doc in docs_tokens for t in doc}))}
    if not vocabulary:
        raise ValueError("vocabulary is empty after pre-processing")

    words = np.array([vocabulary[t] for doc in docs_tokens for t in doc], dtype=np.int32)
    doc_ids = np.array([d for d, doc in enumerate(docs_tokens) for _ in doc], dtype=np.int32)
    n_docs = len(docs_tokens)
    n_words = len(vocabulary)

    rng = np.random.default_rng(seed)
    assignments = rng.integers(0, n_topics, words.shape[0]).astype(np.int32)

    topic_word = np.zeros((n_topics, n_words), dtype=np.int64)
    topic_total = np.zeros(n_topics, dtype=np.int64)
    doc_topic = np.zeros((n_docs, n_topics), dtype=np.int64)
    np.add.at(topic_word, (assignments, words), 1)
    np.add.at(topic_total, assignments, 1)
    np.add.at(doc_topic, (doc_ids, assignments), 1)

    doc_sizes = doc_topic.sum(axis=1)
    history = np.empty(iterations, dtype=np.float64)
    for it in range(iterations):
        gibbs_sweep(words, doc_ids, assignments, topic_word, topic_total, doc_topic,
                    float(alpha), float(beta), rng.random(words.shape[0]))
        history[it] = token_log_likelihood(words, doc_ids, topic_word, topic_total,
                                           doc_topic, doc_sizes, float(alpha), float(beta))

    phi = (topic_word + beta) / (topic_total + n_words * beta)[:, None]
    return LdaModel(
        n_topics=n_topics,
        vocabulary=vocabulary,
        topic_word=phi,
        alpha=float(alpha),
        beta=float(beta),
        seed=seed,
        log_likelihood=history,
    )


def infer_topics(model: LdaModel, text: str) -> np.ndarray:
    """Topic distribution for an arbitrary text; deterministic per (model seed, text).

    Unknown words are skipped; a text with no known words maps to the uniform
    distribution.
    """
    word_ids = np.array(
        [model.vocabulary[t.surface] for t in textproc.tokenize(text) if t.surface in model.vocabulary],
        dtype=np.int32,
    )
    if word_ids.shape[0] == 0:
        return _check_distribution(np.full(model.n_topics, 1.0 / model.n_topics))

    rng = np.random.default_rng(derive_seed(model.seed, DOMAIN_INFER, text_fingerprint(text)))
    assignments = rng.integers(0, model.n_topics, word_ids.shape[0]).astype(np.int32)
    uniforms = rng.random((INFER_ITERATIONS, word_ids.shape[0]))
    theta = fold_in(word_ids, model.topic_word, float(model.alpha), assignments, uniforms, INFER_BURN_IN)
    return _check_distribution(theta)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity of two topic distributions; in [0, 1] for non-negative input."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))


# -- persistence ---------------------------------------------------------------


def save_lda(model: LdaModel, path: str | Path) -> None:
    writer = Writer(_MAGIC, _VERSION)
    writer.u32(model.n_topics)
    writer.u32(len(model.vocabulary))
    writer.f64(model.alpha)
    writer.f64(model.beta)
    writer.i64(model.seed)
    for term, _ in sorted(model.vocabulary.items(), key=lambda item: item[1]):
        writer.string(term)
    writer.f64_array(model.topic_word)
    writer.finish(path)


def load_lda(path: str | Path) -> LdaModel:
    reader = Reader(path, _MAGIC, _VERSION)
    n_topics = reader.u32()
    n_words = reader.u32()
    alpha = reader.f64()
    beta = reader.f64()
    seed = reader.i64()
    vocabulary = {reader.string(): i for i in range(n_words)}
    if len(vocabulary) != n_words:
        raise PersistenceError(f"{path}: vocabulary table contains duplicate terms")
    topic_word = reader.f64_array(n_topics * n_words).reshape(n_topics, n_words)
    reader.done()
    return LdaModel(n_topics=n_topics, vocabulary=vocabulary, topic_word=topic_word,
                    alpha=alpha, beta=beta, seed=seed)
