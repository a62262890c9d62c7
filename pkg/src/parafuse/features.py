"""The fixed registry of eleven features: six query generators and five
evaluators. Feature order is load-bearing: it defines the column order of
every feature matrix and the index of each fusion weight.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import textproc
from .corpus import Corpus, Paragraph
from .index import IndexVariant, Query
from .lda import LdaModel, cosine, infer_topics
from .textproc import LexiconSet, Token


class FeatureId(enum.Enum):
    Q_BASELINE = "q_baseline"
    Q_LEMMA = "q_lemma"
    Q_NGRAMS = "q_ngrams"
    Q_NGRAMS_COREF = "q_ngrams_coref"
    Q_NAMED_ENTITIES = "q_named_entities"
    Q_SYNONYMS = "q_synonyms"
    EV_COMMON_1G = "ev_common_1g"
    EV_COMMON_2G = "ev_common_2g"
    EV_COMMON_3G = "ev_common_3g"
    EV_LDA_10 = "ev_lda_10"
    EV_LDA_100 = "ev_lda_100"


FEATURE_ORDER: tuple[FeatureId, ...] = tuple(FeatureId)
N_FEATURES = len(FEATURE_ORDER)
FEATURE_COLUMN: dict[FeatureId, int] = {f: i for i, f in enumerate(FEATURE_ORDER)}
QUERY_FEATURES: tuple[FeatureId, ...] = FEATURE_ORDER[:6]
EVALUATOR_FEATURES: tuple[FeatureId, ...] = FEATURE_ORDER[6:]

# Which index each query feature is answered by. The two extra query
# generators run against the baseline index.
QUERY_TARGET: dict[FeatureId, IndexVariant] = {
    FeatureId.Q_BASELINE: IndexVariant.BASELINE,
    FeatureId.Q_LEMMA: IndexVariant.LEMMA,
    FeatureId.Q_NGRAMS: IndexVariant.NGRAMS,
    FeatureId.Q_NGRAMS_COREF: IndexVariant.NGRAMS_COREF,
    FeatureId.Q_NAMED_ENTITIES: IndexVariant.BASELINE,
    FeatureId.Q_SYNONYMS: IndexVariant.BASELINE,
}


@dataclass(frozen=True)
class QueryBundle:
    queries: Mapping[FeatureId, Query]

    def __post_init__(self) -> None:
        if set(self.queries) != set(QUERY_FEATURES):
            raise ValueError("bundle must hold exactly the six query features")
        for feature, query in self.queries.items():
            if query.target_variant is not QUERY_TARGET[feature]:
                raise ValueError(f"{feature.value} must target {QUERY_TARGET[feature].value}")

    def __getitem__(self, feature: FeatureId) -> Query:
        return self.queries[feature]


def _baseline_tokens(text: str, lexicons: LexiconSet) -> list[Token]:
    return textproc.remove_stopwords(textproc.tokenize(text), lexicons.stopwords)


def generate_queries(question_text: str, lexicons: LexiconSet) -> QueryBundle:
    """One query per query feature. A generator may yield an empty query; it
    then scores zero downstream.

    Questions are single sentences, so no coreference pass is applied on the
    query side: the ngrams-coref query reuses the ngrams terms.
    """
    base = _baseline_tokens(question_text, lexicons)
    base_terms = tuple(t.surface for t in base)
    ngram_terms = base_terms + tuple(textproc.extract_ngrams(base, 2)) + tuple(textproc.extract_ngrams(base, 3))

    entity_terms: list[str] = []
    for entity in textproc.extract_named_entities(question_text, lexicons.gazetteer):
        words = entity.lower().split()
        for word in words:
            entity_terms.append(word)
        if len(words) > 1:
            entity_terms.append(" ".join(words))

    queries = {
        FeatureId.Q_BASELINE: Query(base_terms, IndexVariant.BASELINE),
        FeatureId.Q_LEMMA: Query(tuple(t.surface for t in textproc.lemmatize(base, lexicons.lemmas)), IndexVariant.LEMMA),
        FeatureId.Q_NGRAMS: Query(ngram_terms, IndexVariant.NGRAMS),
        FeatureId.Q_NGRAMS_COREF: Query(ngram_terms, IndexVariant.NGRAMS_COREF),
        FeatureId.Q_NAMED_ENTITIES: Query(tuple(entity_terms), IndexVariant.BASELINE),
        FeatureId.Q_SYNONYMS: Query(tuple(t.surface for t in textproc.expand_synonyms(base, lexicons.synonyms)), IndexVariant.BASELINE),
    }
    return QueryBundle(queries)


def overlap_score(question_terms: Sequence[Token], paragraph_terms: Sequence[Token], n: int) -> int:
    """Number of distinct n-grams shared by the two term streams (set semantics)."""
    if n not in (1, 2, 3):
        raise ValueError(f"overlap n-gram size must be 1, 2 or 3, got {n}")
    return len(set(textproc.extract_ngrams(question_terms, n)) & set(textproc.extract_ngrams(paragraph_terms, n)))


def lda_score(cache: "TopicVectorCache", question_text: str, paragraph: Paragraph) -> float:
    """Cosine similarity between the question's and the paragraph's topic vectors."""
    return cosine(infer_topics(cache.model, question_text), cache.vector(paragraph))


class TopicVectorCache:
    """Per-paragraph topic vectors for one model, inferred once and reused."""

    def __init__(self, model: LdaModel):
        self.model = model
        self._vectors: dict[str, np.ndarray] = {}

    def vector(self, paragraph: Paragraph) -> np.ndarray:
        found = self._vectors.get(paragraph.para_id)
        if found is None:
            found = infer_topics(self.model, paragraph.text)
            self._vectors[paragraph.para_id] = found
        return found

    def warm(self, corpus: Corpus) -> None:
        for paragraph in corpus:
            self.vector(paragraph)


class EvaluatorSet:
    """Computes the five evaluator columns for question/paragraph pairs.

    Paragraph-side token streams, n-gram sets, and topic vectors are cached;
    candidate pools for different questions overlap heavily.
    """

    def __init__(self, corpus: Corpus, lexicons: LexiconSet, model_10: LdaModel, model_100: LdaModel):
        self.corpus = corpus
        self.lexicons = lexicons
        self.cache_10 = TopicVectorCache(model_10)
        self.cache_100 = TopicVectorCache(model_100)
        self._para_ngrams: dict[tuple[str, int], frozenset[str]] = {}

    def _ngrams(self, paragraph: Paragraph, n: int) -> frozenset[str]:
        key = (paragraph.para_id, n)
        found = self._para_ngrams.get(key)
        if found is None:
            tokens = _baseline_tokens(paragraph.text, self.lexicons)
            found = frozenset(textproc.extract_ngrams(tokens, n))
            self._para_ngrams[key] = found
        return found

    def evaluate(self, question_text: str, para_ids: Sequence[str]) -> np.ndarray:
        """Evaluator scores for the given candidates; shape (len(para_ids), 5),
        columns in EVALUATOR_FEATURES order."""
        q_tokens = _baseline_tokens(question_text, self.lexicons)
        q_ngrams = {n: set(textproc.extract_ngrams(q_tokens, n)) for n in (1, 2, 3)}
        q_vec_10 = infer_topics(self.cache_10.model, question_text)
        q_vec_100 = infer_topics(self.cache_100.model, question_text)

        scores = np.zeros((len(para_ids), len(EVALUATOR_FEATURES)), dtype=np.float64)
        for row, para_id in enumerate(para_ids):
            paragraph = self.corpus.get(para_id)
            for col, n in enumerate((1, 2, 3)):
                scores[row, col] = len(q_ngrams[n] & self._ngrams(paragraph, n))
            scores[row, 3] = cosine(q_vec_10, self.cache_10.vector(paragraph))
            scores[row, 4] = cosine(q_vec_100, self.cache_100.vector(paragraph))
        return scores
