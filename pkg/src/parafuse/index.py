"""The four inverted-index variants: building, querying, and persistence.

Retrieval scoring is a classic TF-IDF practical scoring function, pinned here
so rankings are reproducible bit-for-bit:

    confidence(q, d) = coord(q, d) * sum_{t in q and d} sqrt(tf(t, d)) * idf(t)^2 / sqrt(len(d))
    idf(t)           = 1 + ln(n_docs / (df(t) + 1))
    coord(q, d)      = |matched query terms| / |distinct query terms|

Only documents matching at least one term are returned; ties break by
ascending para_id.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from . import textproc
from ._binio import Reader, Writer
from .corpus import Corpus
from .errors import PersistenceError
from .textproc import LexiconSet

_MAGIC = b"FIDX"
_VERSION = 1


class IndexVariant(enum.Enum):
    BASELINE = "baseline"
    LEMMA = "lemma"
    NGRAMS = "ngrams"
    NGRAMS_COREF = "ngrams_coref"


_VARIANT_TAG = {v: i for i, v in enumerate(IndexVariant)}
_TAG_VARIANT = {i: v for v, i in _VARIANT_TAG.items()}


@dataclass(frozen=True)
class Query:
    terms: tuple[str, ...]  # multiset; duplicates allowed
    target_variant: IndexVariant


@dataclass(frozen=True)
class Hit:
    para_id: str
    confidence: float


@dataclass
class InvertedIndex:
    variant: IndexVariant
    postings: dict[str, list[tuple[str, int]]]  # term -> [(para_id, tf)] sorted by para_id
    doc_lengths: dict[str, int]
    n_docs: int

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))


def pipeline_terms(text: str, variant: IndexVariant, lexicons: LexiconSet) -> list[str]:
    """The per-variant term pipeline applied to one text."""
    if variant is IndexVariant.NGRAMS_COREF:
        text = textproc.resolve_coreferences(text)
    tokens = textproc.remove_stopwords(textproc.tokenize(text), lexicons.stopwords)
    if variant is IndexVariant.LEMMA:
        tokens = textproc.lemmatize(tokens, lexicons.lemmas)
    terms = [t.surface for t in tokens]
    if variant in (IndexVariant.NGRAMS, IndexVariant.NGRAMS_COREF):
        terms += textproc.extract_ngrams(tokens, 2)
        terms += textproc.extract_ngrams(tokens, 3)
    return terms


def build_index(corpus: Corpus, variant: IndexVariant, lexicons: LexiconSet) -> InvertedIndex:
    if len(corpus) == 0:
        raise ValueError("cannot index an empty corpus")
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}
    for paragraph in corpus:
        terms = pipeline_terms(paragraph.text, variant, lexicons)
        doc_lengths[paragraph.para_id] = len(terms)
        for term, tf in sorted(Counter(terms).items()):
            postings.setdefault(term, []).append((paragraph.para_id, tf))
    for plist in postings.values():
        plist.sort(key=lambda entry: entry[0])
    return InvertedIndex(variant=variant, postings=postings, doc_lengths=doc_lengths, n_docs=len(corpus))


def score_query(index: InvertedIndex, query: Query, k: int) -> list[Hit]:
    """Top-k hits by descending confidence, ties by ascending para_id."""
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if query.target_variant is not index.variant:
        raise ValueError(f"query targets {query.target_variant.value!r} but index is {index.variant.value!r}")
    distinct = sorted(set(query.terms))
    if not distinct:
        return []

    sums: dict[str, float] = {}
    matches: dict[str, int] = {}
    for term in distinct:
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = 1.0 + math.log(index.n_docs / (len(plist) + 1.0))
        weight = idf * idf
        for para_id, tf in plist:
            sums[para_id] = sums.get(para_id, 0.0) + math.sqrt(tf) * weight
            matches[para_id] = matches.get(para_id, 0) + 1

    n_terms = len(distinct)
    hits = [
        Hit(para_id, (matches[para_id] / n_terms) * total / math.sqrt(index.doc_lengths[para_id]))
        for para_id, total in sums.items()
    ]
    hits.sort(key=lambda h: (-h.confidence, h.para_id))
    return hits[:k]


# -- persistence ---------------------------------------------------------------


def save_index(index: InvertedIndex, path: str | Path) -> None:
    writer = Writer(_MAGIC, _VERSION)
    writer.u8(_VARIANT_TAG[index.variant])
    writer.u32(index.n_docs)

    doc_ids = sorted(index.doc_lengths)
    doc_row = {pid: i for i, pid in enumerate(doc_ids)}
    writer.u32(len(doc_ids))
    for pid in doc_ids:
        writer.string(pid)
        writer.u32(index.doc_lengths[pid])

    writer.u32(len(index.postings))
    for term in sorted(index.postings):
        writer.string(term)
        plist = index.postings[term]  # already sorted by para_id
        writer.u32(len(plist))
        for para_id, tf in plist:
            writer.u32(doc_row[para_id])
            writer.u32(tf)
    writer.finish(path)


def load_index(path: str | Path) -> InvertedIndex:
    reader = Reader(path, _MAGIC, _VERSION)
    tag = reader.u8()
    if tag not in _TAG_VARIANT:
        raise PersistenceError(f"{path}: unknown index variant tag {tag}")
    variant = _TAG_VARIANT[tag]
    n_docs = reader.u32()

    doc_ids = []
    doc_lengths: dict[str, int] = {}
    for _ in range(reader.u32()):
        pid = reader.string()
        doc_ids.append(pid)
        doc_lengths[pid] = reader.u32()

    postings: dict[str, list[tuple[str, int]]] = {}
    for _ in range(reader.u32()):
        term = reader.string()
        postings[term] = [(doc_ids[reader.u32()], reader.u32()) for _ in range(reader.u32())]
    reader.done()

    if n_docs != len(doc_lengths):
        raise PersistenceError(f"{path}: n_docs header disagrees with document table")
    return InvertedIndex(variant=variant, postings=postings, doc_lengths=doc_lengths, n_docs=n_docs)
