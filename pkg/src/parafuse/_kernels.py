"""Hot sampling kernels for topic-model training and inference.

The kernels are written in nopython-compatible numpy style and compiled with
numba's @njit by default. Setting the environment variable

    PARAFUSE_DISABLE_NUMBA=1

(or running without numba installed) executes the very same functions in the
interpreter instead. Both paths consume randomness drawn outside the kernels,
so they produce bit-identical results; the interpreted path is simply orders
of magnitude slower (see benchmarks/bench_kernels.py).
"""

from __future__ import annotations

import os
import warnings

import numpy as np

_FLAG = os.environ.get("PARAFUSE_DISABLE_NUMBA", "").strip().lower()
NUMBA_REQUESTED = _FLAG not in {"1", "true", "yes"}

if NUMBA_REQUESTED:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - depends on environment
        warnings.warn("numba is not importable; sampling kernels will run interpreted and slow")
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False


def _maybe_jit(func):
    if NUMBA_ENABLED:
        return njit(cache=True)(func)
    return func


@_maybe_jit
def gibbs_sweep(words, docs, assignments, topic_word, topic_total, doc_topic, alpha, beta, uniforms):
    """One collapsed Gibbs sweep over all tokens, in place.

    words/docs/assignments are parallel int32 arrays over token slots;
    topic_word is the K x V count matrix, topic_total its row sums, and
    doc_topic the D x K per-document counts. uniforms supplies one uniform
    draw per token.
    """
    n_topics = topic_word.shape[0]
    vocab_beta = topic_word.shape[1] * beta
    probs = np.empty(n_topics, dtype=np.float64)
    for i in range(words.shape[0]):
        w = words[i]
        d = docs[i]
        old = assignments[i]
        topic_word[old, w] -= 1
        topic_total[old] -= 1
        doc_topic[d, old] -= 1

        total = 0.0
        for k in range(n_topics):
            p = (topic_word[k, w] + beta) / (topic_total[k] + vocab_beta) * (doc_topic[d, k] + alpha)
            probs[k] = p
            total += p
        threshold = uniforms[i] * total
        acc = 0.0
        new = n_topics - 1
        for k in range(n_topics):
            acc += probs[k]
            if threshold < acc:
                new = k
                break

        assignments[i] = new
        topic_word[new, w] += 1
        topic_total[new] += 1
        doc_topic[d, new] += 1


@_maybe_jit
def token_log_likelihood(words, docs, topic_word, topic_total, doc_topic, doc_sizes, alpha, beta):
    """In-sample log-likelihood of all tokens under the current count state."""
    n_topics = topic_word.shape[0]
    vocab_beta = topic_word.shape[1] * beta
    topics_alpha = n_topics * alpha
    total = 0.0
    for i in range(words.shape[0]):
        w = words[i]
        d = docs[i]
        doc_denom = doc_sizes[d] + topics_alpha
        p = 0.0
        for k in range(n_topics):
            p += (doc_topic[d, k] + alpha) / doc_denom * (topic_word[k, w] + beta) / (topic_total[k] + vocab_beta)
        total += np.log(p)
    return total


@_maybe_jit
def fold_in(words, topic_word_probs, alpha, assignments, uniforms, burn_in):
    """Fold-in Gibbs sampling for one new document with frozen word probabilities.

    Returns the topic distribution averaged over the post-burn-in iterations:
    theta[k] = (n_k + alpha) / (N + K*alpha) per sample.
    """
    n_topics = topic_word_probs.shape[0]
    n_words = words.shape[0]
    iterations = uniforms.shape[0]

    counts = np.zeros(n_topics, dtype=np.int64)
    for i in range(n_words):
        counts[assignments[i]] += 1

    probs = np.empty(n_topics, dtype=np.float64)
    theta = np.zeros(n_topics, dtype=np.float64)
    denom = n_words + n_topics * alpha
    for it in range(iterations):
        for i in range(n_words):
            w = words[i]
            old = assignments[i]
            counts[old] -= 1
            total = 0.0
            for k in range(n_topics):
                p = topic_word_probs[k, w] * (counts[k] + alpha)
                probs[k] = p
                total += p
            threshold = uniforms[it, i] * total
            acc = 0.0
            new = n_topics - 1
            for k in range(n_topics):
                acc += probs[k]
                if threshold < acc:
                    new = k
                    break
            assignments[i] = new
            counts[new] += 1
        if it >= burn_in:
            for k in range(n_topics):
                theta[k] += (counts[k] + alpha) / denom

    samples = iterations - burn_in
    for k in range(n_topics):
        theta[k] /= samples
    return theta


def python_impl(kernel):
    """The interpreted implementation behind a (possibly jitted) kernel."""
    return getattr(kernel, "py_func", kernel)
