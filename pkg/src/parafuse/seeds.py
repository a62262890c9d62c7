"""Derived random streams.

A single top-level seed reproduces an entire run: every randomized stage
(topic-model training, weight tuning rounds, inference fold-in) draws from its
own sub-stream derived here, so stages can run in any order, or in parallel,
without perturbing each other's randomness.
"""

from __future__ import annotations

import hashlib

import numpy as np

_U64 = 0xFFFFFFFFFFFFFFFF

# Stream domains, part of the documented derivation path.
DOMAIN_LDA = 1
DOMAIN_INFER = 2


def derive_seed(root: int, *path: int) -> int:
    """Stable integer seed for the sub-stream named by `path` under `root`.

    Values fit in a signed 64-bit field so they persist in artifact headers.
    """
    entropy = [root & _U64] + [p & _U64 for p in path]
    ss = np.random.SeedSequence(entropy)
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def text_fingerprint(text: str) -> int:
    """Stable 64-bit fingerprint of a text, independent of interpreter hash salting."""
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")
