"""Paragraph corpus and question set: loading, validation, persistence, and a
deterministic synthetic generator used as the test substrate.

File formats are line-delimited JSON records, one per line (see FORMATS.md).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import InputError
from . import textproc


@dataclass(frozen=True)
class Paragraph:
    doc_id: str
    para_id: str
    text: str

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise InputError("paragraph has empty doc_id")
        if not self.para_id:
            raise InputError("paragraph has empty para_id")
        if not self.text.strip():
            raise InputError(f"paragraph {self.para_id!r} has empty text")


@dataclass(frozen=True)
class CorpusStats:
    paragraph_count: int
    token_count: int


class Corpus:
    """Immutable ordered collection of paragraphs, addressable by para_id."""

    def __init__(self, paragraphs: Sequence[Paragraph]):
        self.paragraphs: tuple[Paragraph, ...] = tuple(paragraphs)
        self._by_id: dict[str, Paragraph] = {}
        for p in self.paragraphs:
            if p.para_id in self._by_id:
                raise InputError(f"duplicate para_id {p.para_id!r}")
            self._by_id[p.para_id] = p

    def __len__(self) -> int:
        return len(self.paragraphs)

    def __iter__(self) -> Iterator[Paragraph]:
        return iter(self.paragraphs)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Corpus) and self.paragraphs == other.paragraphs

    def __contains__(self, para_id: str) -> bool:
        return para_id in self._by_id

    def get(self, para_id: str) -> Paragraph:
        return self._by_id[para_id]

    def stats(self) -> CorpusStats:
        tokens = sum(len(textproc.tokenize(p.text)) for p in self.paragraphs)
        return CorpusStats(paragraph_count=len(self.paragraphs), token_count=tokens)


@dataclass(frozen=True)
class Question:
    q_id: str
    text: str
    gold_para_ids: frozenset[str]

    def __post_init__(self) -> None:
        if not self.q_id:
            raise InputError("question has empty q_id")
        if not self.text.strip():
            raise InputError(f"question {self.q_id!r} has empty text")
        if not self.gold_para_ids:
            raise InputError(f"question {self.q_id!r} has no gold paragraph ids")


class QuestionSet:
    """Immutable ordered collection of questions with unique ids."""

    def __init__(self, questions: Sequence[Question]):
        self.questions: tuple[Question, ...] = tuple(questions)
        seen = set()
        for q in self.questions:
            if q.q_id in seen:
                raise InputError(f"duplicate q_id {q.q_id!r}")
            seen.add(q.q_id)

    def __len__(self) -> int:
        return len(self.questions)

    def __iter__(self) -> Iterator[Question]:
        return iter(self.questions)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, QuestionSet) and self.questions == other.questions


# -- line-delimited record IO -------------------------------------------------


def _read_records(path: str | Path, keys: tuple[str, ...], what: str) -> list[dict]:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{what} file not found: {p}")
    records = []
    with p.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{p}:{lineno}: malformed record: {exc.msg}") from exc
            if not isinstance(record, dict) or set(record) != set(keys):
                raise InputError(f"{p}:{lineno}: expected exactly the fields {list(keys)}")
            records.append(record)
    if not records:
        raise InputError(f"{p}: file contains no records")
    return records


def load_corpus(path: str | Path) -> Corpus:
    """Load and validate a corpus file; record order is preserved."""
    records = _read_records(path, ("doc_id", "para_id", "text"), "corpus")
    paragraphs = []
    for record in records:
        if not all(isinstance(record[k], str) for k in ("doc_id", "para_id", "text")):
            raise InputError(f"{path}: corpus fields must all be strings: {record!r}")
        paragraphs.append(Paragraph(record["doc_id"], record["para_id"], record["text"]))
    return Corpus(paragraphs)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for p in corpus:
            handle.write(json.dumps({"doc_id": p.doc_id, "para_id": p.para_id, "text": p.text}, ensure_ascii=False))
            handle.write("\n")


def load_questions(path: str | Path, corpus: Corpus) -> QuestionSet:
    """Load and validate questions; every gold id must resolve in `corpus`."""
    records = _read_records(path, ("q_id", "text", "gold"), "question")
    questions = []
    for record in records:
        gold = record["gold"]
        if not isinstance(record["q_id"], str) or not isinstance(record["text"], str):
            raise InputError(f"{path}: q_id and text must be strings: {record!r}")
        if not isinstance(gold, list) or not all(isinstance(g, str) for g in gold):
            raise InputError(f"{path}: gold must be a list of para_id strings: {record!r}")
        for g in gold:
            if g not in corpus:
                raise InputError(f"question {record['q_id']!r} references unknown paragraph {g!r}")
        questions.append(Question(record["q_id"], record["text"], frozenset(gold)))
    return QuestionSet(questions)


def save_questions(questions: QuestionSet, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for q in questions:
            record = {"q_id": q.q_id, "text": q.text, "gold": sorted(q.gold_para_ids)}
            handle.write(json.dumps(record, ensure_ascii=False))
            handle.write("\n")


# -- synthetic corpus ----------------------------------------------------------
#
# Four disjoint topic vocabularies give the topic models signal; named people
# and cities feed the entity and coreference heuristics; plural forms exercise
# the lemma lexicon; and question-side synonym substitution gives the
# expansion query something to recover. The default lexicons shipped under
# data/ cover these words, so the whole feature set is live on generated data.

TOPIC_POOLS: tuple[tuple[str, ...], ...] = (
    (
        "farm", "crop", "harvest", "grain", "wheat", "livestock", "dairy",
        "pasture", "soil", "irrigation", "orchard", "vineyard",
    ),
    (
        "fishery", "vessel", "harbour", "catch", "quota", "trawler", "herring",
        "salmon", "net", "coast", "fleet", "dock",
    ),
    (
        "railway", "engine", "locomotive", "freight", "carriage", "track", "station",
        "tunnel", "bridge", "cargo", "signal", "wagon",
    ),
    (
        "budget", "loan", "bank", "tariff", "subsidy", "levy", "surplus", "deficit",
        "audit", "treasury", "bond", "pension",
    ),
)

# Question-side substitutions; the shipped synonym lexicon lists both directions.
SUBSTITUTIONS: dict[str, str] = {
    "vessel": "ship",
    "harbour": "port",
    "quota": "allocation",
    "fleet": "flotilla",
    "railway": "railroad",
    "engine": "motor",
    "freight": "haulage",
    "carriage": "coach",
    "budget": "funds",
    "subsidy": "grant",
    "tariff": "duty",
    "loan": "advance",
    "crop": "produce",
    "harvest": "yield",
    "farm": "homestead",
    "pasture": "grassland",
}

# Plural forms the generator may emit; the shipped lemma lexicon maps them back.
PLURALS: dict[str, str] = {
    "farm": "farms", "crop": "crops", "harvest": "harvests", "grain": "grains",
    "orchard": "orchards", "vineyard": "vineyards", "seed": "seeds", "silo": "silos",
    "vessel": "vessels", "quota": "quotas", "harbour": "harbours", "trawler": "trawlers",
    "net": "nets", "fleet": "fleets", "buoy": "buoys", "dock": "docks",
    "railway": "railways", "engine": "engines", "locomotive": "locomotives",
    "station": "stations", "tunnel": "tunnels", "bridge": "bridges", "signal": "signals",
    "wagon": "wagons", "tram": "trams", "budget": "budgets", "loan": "loans",
    "bank": "banks", "tariff": "tariffs", "subsidy": "subsidies", "levy": "levies",
    "audit": "audits", "bond": "bonds", "pension": "pensions", "invoice": "invoices",
}

SURNAMES = (
    "Varga", "Lindqvist", "Moreau", "Keller", "Rossi", "Novak", "Almeida", "Petrov",
)
CITIES = (
    "Brussels", "Strasbourg", "Lisbon", "Vienna", "Copenhagen", "Dublin",
)
BODIES = ("committee", "assembly", "delegation", "chamber", "bureau", "secretariat")
VERBS = (
    "discussed", "approved", "rejected", "presented", "reviewed", "considered",
    "amended", "debated", "endorsed", "postponed", "examined", "questioned",
)
TAILS = (
    "required further review", "remained under discussion",
    "was adopted without amendment", "faced strong opposition",
    "was referred back for revision",
)

_DROPOUT = 0.3
_PARAS_PER_DOC = 5


def _pick(rng: np.random.Generator, items: Sequence[str]) -> str:
    return items[int(rng.integers(len(items)))]


def _noun(rng: np.random.Generator, pool: Sequence[str]) -> str:
    word = _pick(rng, pool)
    plural = PLURALS.get(word)
    if plural is not None and rng.random() < 0.3:
        return plural
    return word


def _sentence(rng: np.random.Generator, pool: Sequence[str], entity: str | None) -> tuple[list[str], str | None]:
    """One sentence as a word list (no final period); returns the active entity."""
    year = str(2001 + int(rng.integers(6)))
    form = rng.random()
    if entity is not None and form < 0.30:
        pronoun = _pick(rng, ("He", "She"))
        words = [pronoun, _pick(rng, VERBS), "the", _noun(rng, pool), _noun(rng, pool),
                 "before", "the", _pick(rng, BODIES)]
        return words, entity
    if form < 0.60:
        surname = _pick(rng, SURNAMES)
        words = ["Minister", surname, _pick(rng, VERBS), "the", _noun(rng, pool),
                 _noun(rng, pool), "in", _pick(rng, CITIES), "in", year]
        return words, surname
    if form < 0.85:
        words = ["The", _pick(rng, BODIES), _pick(rng, VERBS), "the", _noun(rng, pool),
                 _noun(rng, pool), "and", "the", _noun(rng, pool), _noun(rng, pool)]
        return words, entity
    words = ["The", _noun(rng, pool), _noun(rng, pool)] + _pick(rng, TAILS).split() + ["in", year]
    return words, entity


def gen_synthetic(n_paragraphs: int, n_questions: int, seed: int) -> tuple[Corpus, QuestionSet]:
    """Deterministic synthetic corpus plus questions.

    Each question is one sentence of its gold paragraph, perturbed by token
    dropout (rate 0.3) and by synonym substitution wherever the built-in
    substitution table allows.
    """
    if n_paragraphs < 1 or n_questions < 1:
        raise InputError("n_paragraphs and n_questions must be positive")
    if n_questions > n_paragraphs:
        raise InputError(f"cannot draw {n_questions} questions from {n_paragraphs} paragraphs")

    rng = np.random.default_rng(seed)
    paragraphs = []
    sentence_bank: list[list[list[str]]] = []
    for p in range(n_paragraphs):
        doc_id = f"d{p // _PARAS_PER_DOC:03d}"
        para_id = f"{doc_id}:{p % _PARAS_PER_DOC + 1}"
        pool = TOPIC_POOLS[int(rng.integers(len(TOPIC_POOLS)))]
        entity = None
        sentences = []
        for _ in range(2 + int(rng.integers(3))):
            words, entity = _sentence(rng, pool, entity)
            sentences.append(words)
        text = " ".join(" ".join(words) + "." for words in sentences)
        paragraphs.append(Paragraph(doc_id, para_id, text))
        sentence_bank.append(sentences)
    corpus = Corpus(paragraphs)

    gold_rows = rng.choice(n_paragraphs, size=n_questions, replace=False)
    questions = []
    for qi, row in enumerate(gold_rows):
        row = int(row)
        sentences = sentence_bank[row]
        words = list(sentences[int(rng.integers(len(sentences)))])
        for _ in range(8):
            keep = rng.random(len(words)) >= _DROPOUT
            if int(keep.sum()) >= 3:
                break
        else:
            keep = np.ones(len(words), dtype=bool)
        kept = [w for w, k in zip(words, keep) if k]
        perturbed = [SUBSTITUTIONS.get(w.lower(), w) for w in kept]
        questions.append(
            Question(
                q_id=f"q{qi + 1:03d}",
                text=" ".join(perturbed) + "?",
                gold_para_ids=frozenset({paragraphs[row].para_id}),
            )
        )
    return corpus, QuestionSet(questions)
