"""Paragraph retrieval engine fusing multi-index scores with evolution-tuned weights."""

from .corpus import Corpus, Paragraph, Question, QuestionSet, gen_synthetic, load_corpus, load_questions
from .errors import InputError, PersistenceError
from .features import FEATURE_ORDER, EvaluatorSet, FeatureId, generate_queries
from .fusion import FeatureMatrix, RankedList, WeightVector, collect_candidates, combine, zscore_normalize
from .index import IndexVariant, InvertedIndex, build_index, load_index, save_index, score_query
from .lda import LdaModel, cosine, infer_topics, load_lda, save_lda, train_lda
from .tuner import DeConfig, cross_validate, differential_evolution, mrr, project_to_simplex, tune_weights

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "DeConfig",
    "EvaluatorSet",
    "FEATURE_ORDER",
    "FeatureId",
    "FeatureMatrix",
    "IndexVariant",
    "InputError",
    "InvertedIndex",
    "LdaModel",
    "Paragraph",
    "PersistenceError",
    "Question",
    "QuestionSet",
    "RankedList",
    "WeightVector",
    "build_index",
    "collect_candidates",
    "combine",
    "cosine",
    "cross_validate",
    "differential_evolution",
    "gen_synthetic",
    "generate_queries",
    "infer_topics",
    "load_corpus",
    "load_index",
    "load_lda",
    "load_questions",
    "mrr",
    "project_to_simplex",
    "save_index",
    "save_lda",
    "score_query",
    "train_lda",
    "tune_weights",
    "zscore_normalize",
]
