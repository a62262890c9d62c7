"""Shared fixtures: default lexicons and one small end-to-end pipeline state
that the feature/fusion/tuner tests reuse instead of rebuilding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

from parafuse import (
    Corpus,
    EvaluatorSet,
    IndexVariant,
    LdaModel,
    QuestionSet,
    build_index,
    collect_candidates,
    gen_synthetic,
    generate_queries,
    train_lda,
    zscore_normalize,
)
from parafuse.cli import _DATA
from parafuse.corpus import Paragraph
from parafuse.fusion import FeatureMatrix
from parafuse.textproc import LexiconSet


@pytest.fixture(scope="session")
def lexicons() -> LexiconSet:
    return LexiconSet.load(
        _DATA / "stopwords.txt",
        _DATA / "lemmas.tsv",
        _DATA / "synonyms.tsv",
        _DATA / "gazetteer.txt",
    )


@dataclass
class PipelineState:
    corpus: Corpus
    questions: QuestionSet
    lexicons: LexiconSet
    indices: dict[IndexVariant, object]
    model_10: LdaModel
    model_100: LdaModel
    evaluators: EvaluatorSet
    matrices: dict[str, FeatureMatrix]  # normalized
    k: int


@pytest.fixture(scope="session")
def pipeline(lexicons) -> PipelineState:
    """Small but complete pipeline: 120 paragraphs, 12 questions, both models."""
    corpus, questions = gen_synthetic(120, 12, seed=3)
    indices = {variant: build_index(corpus, variant, lexicons) for variant in IndexVariant}
    model_10 = train_lda(corpus, 10, stopwords=lexicons.stopwords, iterations=250, seed=31)
    model_100 = train_lda(corpus, 100, stopwords=lexicons.stopwords, iterations=250, seed=32)
    evaluators = EvaluatorSet(corpus, lexicons, model_10, model_100)
    matrices = {}
    for question in questions:
        bundle = generate_queries(question.text, lexicons)
        matrix = collect_candidates(question.text, bundle, indices, evaluators, 50, q_id=question.q_id)
        matrices[question.q_id] = zscore_normalize(matrix)
    return PipelineState(
        corpus=corpus,
        questions=questions,
        lexicons=lexicons,
        indices=indices,
        model_10=model_10,
        model_100=model_100,
        evaluators=evaluators,
        matrices=matrices,
        k=50,
    )


@pytest.fixture(scope="session")
def two_topic_model() -> tuple[LdaModel, list[str], list[str]]:
    """Topic model trained on two disjoint vocabularies, for purity checks."""
    rng = np.random.default_rng(42)
    vocab_a = [f"alpha{i}" for i in range(15)]
    vocab_b = [f"beta{i}" for i in range(15)]
    paragraphs = []
    for d in range(40):
        pool = vocab_a if d % 2 == 0 else vocab_b
        words = [pool[int(rng.integers(len(pool)))] for _ in range(25)]
        paragraphs.append(Paragraph("x", f"x:{d + 1}", " ".join(words)))
    model = train_lda(Corpus(paragraphs), 2, stopwords=frozenset(), iterations=500, seed=11)
    return model, vocab_a, vocab_b
