#!/usr/bin/env python3
"""Benchmark the sampling kernels: numba-compiled vs interpreted numpy.

Both paths run the identical function bodies on identical inputs (randomness
is drawn outside the kernels), so outputs are checked for bit equality before
timings are reported. Run from the repository root:

    python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from parafuse import _kernels
from parafuse._kernels import NUMBA_ENABLED, fold_in, gibbs_sweep, python_impl

N_TOKENS = 6000
N_DOCS = 200
N_WORDS = 800
N_TOPICS = 20
TRAIN_SWEEPS = 10
INFER_TOKENS = 60
INFER_ITERS = 50
INFER_CALLS = 50


def _train_state(seed: int):
    rng = np.random.default_rng(seed)
    words = rng.integers(0, N_WORDS, N_TOKENS).astype(np.int32)
    docs = rng.integers(0, N_DOCS, N_TOKENS).astype(np.int32)
    z = rng.integers(0, N_TOPICS, N_TOKENS).astype(np.int32)
    topic_word = np.zeros((N_TOPICS, N_WORDS), dtype=np.int64)
    topic_total = np.zeros(N_TOPICS, dtype=np.int64)
    doc_topic = np.zeros((N_DOCS, N_TOPICS), dtype=np.int64)
    np.add.at(topic_word, (z, words), 1)
    np.add.at(topic_total, z, 1)
    np.add.at(doc_topic, (docs, z), 1)
    uniforms = rng.random((TRAIN_SWEEPS, N_TOKENS))
    return words, docs, z, topic_word, topic_total, doc_topic, uniforms


def run_train(kernel) -> tuple[float, np.ndarray]:
    words, docs, z, topic_word, topic_total, doc_topic, uniforms = _train_state(0)
    start = time.perf_counter()
    for sweep in range(TRAIN_SWEEPS):
        kernel(words, docs, z, topic_word, topic_total, doc_topic, 0.5, 0.01, uniforms[sweep])
    return time.perf_counter() - start, topic_word.copy()


def run_infer(kernel) -> tuple[float, np.ndarray]:
    rng = np.random.default_rng(1)
    phi = rng.random((N_TOPICS, N_WORDS))
    phi /= phi.sum(axis=1, keepdims=True)
    words = rng.integers(0, N_WORDS, INFER_TOKENS).astype(np.int32)
    start = time.perf_counter()
    acc = np.zeros(N_TOPICS)
    for call in range(INFER_CALLS):
        z = rng.integers(0, N_TOPICS, INFER_TOKENS).astype(np.int32)
        uniforms = rng.random((INFER_ITERS, INFER_TOKENS))
        acc += kernel(words, phi, 0.5, z, uniforms, 20)
    return time.perf_counter() - start, acc


def main() -> None:
    if not NUMBA_ENABLED:
        print("numba is disabled or unavailable; nothing to compare against.")
        print("unset PARAFUSE_DISABLE_NUMBA and install numba to benchmark the compiled path.")
        return

    # Warm up compilation outside the timed region.
    run_train(gibbs_sweep)
    run_infer(fold_in)

    rows = []
    for name, kernel in (("gibbs_sweep", gibbs_sweep), ("fold_in", fold_in)):
        runner = run_train if name == "gibbs_sweep" else run_infer
        jit_time, jit_out = runner(kernel)
        py_time, py_out = runner(python_impl(kernel))
        assert np.array_equal(jit_out, py_out), f"{name}: jit and interpreted outputs differ"
        rows.append((name, jit_time, py_time))

    print("kernel\tnumba_s\tnumpy_s\tspeedup")
    for name, jit_time, py_time in rows:
        print(f"{name}\t{jit_time:.4f}\t{py_time:.4f}\t{py_time / jit_time:.0f}x")
    print("\noutputs verified bit-identical across both paths")


if __name__ == "__main__":
    main()
