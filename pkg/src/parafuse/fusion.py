"""Candidate pooling, per-question Z-score normalization, and the weighted
linear combination that produces the final ranking.

Normalization scope is the candidate pool of one question: that is exactly the
population whose scores the combination compares. Columns with zero variance
contribute nothing and are mapped to zero rather than dropped, so matrix shape
and weight indexing never change.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import InputError
from .features import EvaluatorSet, FEATURE_COLUMN, FEATURE_ORDER, FeatureId, N_FEATURES, QUERY_FEATURES, QUERY_TARGET, QueryBundle
from .index import InvertedIndex, IndexVariant, score_query

_SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class WeightVector:
    """Eleven non-negative fusion weights summing to one, in FEATURE_ORDER order."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != N_FEATURES:
            raise ValueError(f"expected {N_FEATURES} weights, got {len(self.values)}")
        if any(v < 0.0 for v in self.values):
            raise ValueError("weights must be non-negative")
        if abs(sum(self.values) - 1.0) > _SIMPLEX_TOL:
            raise ValueError(f"weights must sum to 1, got {sum(self.values)!r}")

    @classmethod
    def uniform(cls) -> "WeightVector":
        return cls(values=(1.0 / N_FEATURES,) * N_FEATURES)

    @classmethod
    def from_array(cls, values: np.ndarray) -> "WeightVector":
        return cls(values=tuple(float(v) for v in values))

    @classmethod
    def from_mapping(cls, mapping: Mapping[FeatureId, float]) -> "WeightVector":
        if set(mapping) != set(FEATURE_ORDER):
            raise ValueError("weight mapping must cover exactly the eleven features")
        return cls(values=tuple(float(mapping[f]) for f in FEATURE_ORDER))

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)

    def as_mapping(self) -> dict[FeatureId, float]:
        return {f: v for f, v in zip(FEATURE_ORDER, self.values)}

    def __getitem__(self, feature: FeatureId) -> float:
        return self.values[FEATURE_COLUMN[feature]]


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-question candidates (ascending para_id) by eleven feature scores."""

    q_id: str
    candidates: tuple[str, ...]
    raw: np.ndarray
    normalized: np.ndarray | None = None

    def __post_init__(self) -> None:
        if list(self.candidates) != sorted(self.candidates):
            raise ValueError("candidates must be sorted ascending by para_id")
        if self.raw.shape != (len(self.candidates), N_FEATURES):
            raise ValueError(f"raw matrix must be |candidates| x {N_FEATURES}")
        if self.normalized is not None and self.normalized.shape != self.raw.shape:
            raise ValueError("normalized matrix must match the raw shape")


@dataclass(frozen=True)
class RankedList:
    q_id: str
    entries: tuple[tuple[str, float], ...]  # (para_id, combined score), best first


def collect_candidates(
    question_text: str,
    bundle: QueryBundle,
    indices: Mapping[IndexVariant, InvertedIndex],
    evaluators: EvaluatorSet,
    k: int,
    q_id: str = "",
) -> FeatureMatrix:
    """Raw feature matrix over the union of the six queries' top-k hits.

    A query feature scores a candidate by its retrieval confidence, or zero if
    that query did not return the candidate; evaluator features score every
    pool member.
    """
    hits_per_feature: dict[FeatureId, dict[str, float]] = {}
    for feature in QUERY_FEATURES:
        hits = score_query(indices[QUERY_TARGET[feature]], bundle[feature], k)
        hits_per_feature[feature] = {h.para_id: h.confidence for h in hits}

    pool = sorted({pid for hits in hits_per_feature.values() for pid in hits})
    raw = np.zeros((len(pool), N_FEATURES), dtype=np.float64)
    for feature, hits in hits_per_feature.items():
        col = FEATURE_COLUMN[feature]
        for row, pid in enumerate(pool):
            raw[row, col] = hits.get(pid, 0.0)
    if pool:
        raw[:, len(QUERY_FEATURES):] = evaluators.evaluate(question_text, pool)
    return FeatureMatrix(q_id=q_id, candidates=tuple(pool), raw=raw)


def zscore_normalize(matrix: FeatureMatrix) -> FeatureMatrix:
    """Per-column Z-scores over the candidate pool, population standard deviation.

    Zero-variance columns (including every column of a single-candidate pool)
    become all-zero.
    """
    if matrix.raw.shape[0] == 0:
        return replace(matrix, normalized=matrix.raw.copy())
    mean = matrix.raw.mean(axis=0)
    std = matrix.raw.std(axis=0)  # population
    # A constant column must map to zero even when rounding in the mean leaves
    # std at a stray ulp instead of exactly 0 (e.g. 28 copies of 4.2).
    degenerate = (std == 0.0) | (matrix.raw.max(axis=0) == matrix.raw.min(axis=0))
    safe = np.where(degenerate, 1.0, std)
    normalized = (matrix.raw - mean) / safe
    normalized[:, degenerate] = 0.0
    return replace(matrix, normalized=normalized)


def combine(matrix: FeatureMatrix, weights: WeightVector) -> RankedList:
    """Weighted sum of normalized columns; descending score, ties by ascending para_id."""
    if matrix.normalized is None:
        raise ValueError("matrix must be normalized before combining")
    scores = matrix.normalized @ weights.as_array()
    order = np.argsort(-scores, kind="stable")  # candidates are pre-sorted ascending
    entries = tuple((matrix.candidates[i], float(scores[i])) for i in order)
    return RankedList(q_id=matrix.q_id, entries=entries)


# -- weight and matrix files ----------------------------------------------------


def save_weights(weights: WeightVector, path: str | Path) -> None:
    lines = [f"{f.value}\t{w!r}\n" for f, w in zip(FEATURE_ORDER, weights.values)]
    Path(path).write_text("".join(lines), encoding="utf-8")


def load_weights(path: str | Path) -> WeightVector:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"weight file not found: {p}")
    by_name = {f.value: f for f in FEATURE_ORDER}
    mapping: dict[FeatureId, float] = {}
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2 or fields[0] not in by_name:
            raise InputError(f"{p}:{lineno}: expected `feature_id<TAB>weight`, got {line!r}")
        feature = by_name[fields[0]]
        if feature in mapping:
            raise InputError(f"{p}:{lineno}: duplicate feature {fields[0]!r}")
        try:
            mapping[feature] = float(fields[1])
        except ValueError as exc:
            raise InputError(f"{p}:{lineno}: bad weight value {fields[1]!r}") from exc
    missing = [f.value for f in FEATURE_ORDER if f not in mapping]
    if missing:
        raise InputError(f"{p}: missing weights for {missing}")
    try:
        return WeightVector.from_mapping(mapping)
    except ValueError as exc:
        raise InputError(f"{p}: {exc}") from exc


def format_matrix(matrix: FeatureMatrix, normalized: bool = False) -> str:
    """Tab-separated dump of a feature matrix, one candidate per row."""
    table = matrix.normalized if normalized else matrix.raw
    if normalized and table is None:
        raise ValueError("matrix has no normalized scores yet")
    lines = ["\t".join(["para_id"] + [f.value for f in FEATURE_ORDER])]
    for row, pid in enumerate(matrix.candidates):
        lines.append("\t".join([pid] + [repr(float(v)) for v in table[row]]))
    return "\n".join(lines) + "\n"
