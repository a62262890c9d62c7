"""Text pre-processing for indexing and query generation.

Tokenization, stopword removal, lexicon-driven lemmatization, n-gram
extraction, synonym expansion, and two deliberately simple heuristics standing
in for full NLP components: named-entity extraction (capitalized-run rule plus
an optional gazetteer) and pronoun coreference resolution (most recent entity
mention wins).

Pipeline order is fixed as tokenize -> stopwords -> lemmatize.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, NamedTuple, Sequence

from .errors import InputError


class Token(NamedTuple):
    surface: str
    position: int


_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)
_CHUNK_RE = re.compile(r"\S+")
_SENT_END_RE = re.compile(r"[.!?]+(?:\s+|$)")

# Third-person pronouns eligible for coreference replacement.
PRONOUNS = frozenset({"he", "she", "it", "they", "him", "her", "them", "his", "its", "their"})

# Closed-class words whose capitalization at sentence start carries no entity
# evidence; they are stripped from the front of a sentence-initial run.
_CLOSED_CLASS = frozenset(
    """a an the this that these those my our your his her its their he she it they him
    them we you i me us when what where who whom whose which why how while if after
    before during since until in on at as for to of with by from and but or nor so yet
    is are was were be been being do does did no not any all some each both""".split()
)


def tokenize(text: str) -> list[Token]:
    """Split on non-alphanumeric boundaries and lowercase; digits are kept."""
    return [Token(m.group(), i) for i, m in enumerate(_WORD_RE.finditer(text.lower()))]


def remove_stopwords(tokens: Sequence[Token], stoplist: frozenset[str] | set[str]) -> list[Token]:
    """Order-preserving filter; positions are renumbered consecutively."""
    return [Token(t.surface, i) for i, t in enumerate(t for t in tokens if t.surface not in stoplist)]


def lemmatize(tokens: Sequence[Token], lexicon: Mapping[str, str]) -> list[Token]:
    """Replace each surface by its lexicon lemma; unknown surfaces pass through."""
    return [Token(lexicon.get(t.surface, t.surface), t.position) for t in tokens]


def extract_ngrams(tokens: Sequence[Token], n: int) -> list[str]:
    """Contiguous n-grams joined by a single space; yields max(0, len-n+1) items."""
    if n < 1:
        raise ValueError(f"n-gram size must be >= 1, got {n}")
    surfaces = [t.surface for t in tokens]
    return [" ".join(surfaces[i : i + n]) for i in range(len(surfaces) - n + 1)]


def expand_synonyms(tokens: Sequence[Token], lexicon: Mapping[str, tuple[str, ...]]) -> list[Token]:
    """Original tokens plus, appended, the deduplicated synonyms of each of them."""
    out = [Token(t.surface, i) for i, t in enumerate(tokens)]
    seen = {t.surface for t in tokens}
    for t in tokens:
        for syn in lexicon.get(t.surface, ()):
            if syn not in seen:
                seen.add(syn)
                out.append(Token(syn, len(out)))
    return out


# -- sentence / mention machinery -------------------------------------------


@dataclass(frozen=True)
class _Chunk:
    """One whitespace-delimited chunk: core word plus its exact span in the text."""

    core: str
    start: int  # span of the core word, punctuation margins excluded
    end: int
    sentence: int
    index_in_sentence: int


def _sentence_starts(text: str) -> list[int]:
    starts = [0]
    for m in _SENT_END_RE.finditer(text):
        if m.end() < len(text):
            starts.append(m.end())
    return starts


def _chunks(text: str) -> list[_Chunk]:
    starts = _sentence_starts(text)
    chunks: list[_Chunk] = []
    sent = 0
    idx_in_sent = 0
    for m in _CHUNK_RE.finditer(text):
        while sent + 1 < len(starts) and m.start() >= starts[sent + 1]:
            sent += 1
            idx_in_sent = 0
        raw = m.group()
        head = 0
        tail = len(raw)
        while head < tail and not raw[head].isalnum():
            head += 1
        while tail > head and not raw[tail - 1].isalnum():
            tail -= 1
        core = raw[head:tail]
        if core:
            chunks.append(_Chunk(core, m.start() + head, m.start() + tail, sent, idx_in_sent))
        idx_in_sent += 1
    return chunks


@dataclass(frozen=True)
class _Mention:
    surface: str
    start: int
    end: int
    sentence: int
    sentence_initial: bool  # run reduced to exactly the first word of its sentence


def _capitalized_runs(text: str) -> list[_Mention]:
    """Maximal runs of capitalized words, with two refinements: a sentence-initial
    closed-class word is stripped from the front of a run (its capital carries no
    evidence), and pronouns never participate in runs."""
    mentions = []
    run: list[_Chunk] = []

    def flush() -> None:
        nonlocal run
        if run:
            if run[0].index_in_sentence == 0 and run[0].core.lower() in _CLOSED_CLASS:
                run = run[1:]
        if run:
            surface = " ".join(c.core for c in run)
            initial = len(run) == 1 and run[0].index_in_sentence == 0
            mentions.append(_Mention(surface, run[0].start, run[-1].end, run[0].sentence, initial))
        run = []

    for chunk in _chunks(text):
        capitalized = chunk.core[0].isupper() and chunk.core.lower() not in PRONOUNS
        if capitalized and run and (chunk.sentence != run[-1].sentence or chunk.index_in_sentence != run[-1].index_in_sentence + 1):
            flush()
        if capitalized:
            run.append(chunk)
        else:
            flush()
    flush()
    return mentions


def extract_named_entities(text: str, gazetteer: Sequence[str] = ()) -> list[str]:
    """Entity strings in order of occurrence, multiword entities space-joined.

    Rule matches are capitalized runs, except a run that is solely the first
    word of a sentence (unreliable: might be plain sentence capitalization).
    Gazetteer entries match case-insensitively anywhere and bypass that
    exclusion.
    """
    found: dict[tuple[int, int], str] = {}
    for m in _capitalized_runs(text):
        if not m.sentence_initial:
            found[(m.start, m.end)] = m.surface

    if gazetteer:
        chunks = _chunks(text)
        lowered = [c.core.lower() for c in chunks]
        entries = sorted({tuple(e.lower().split()) for e in gazetteer if e.strip()}, key=len, reverse=True)
        for entry in entries:
            width = len(entry)
            for i in range(len(chunks) - width + 1):
                if tuple(lowered[i : i + width]) == entry:
                    span = (chunks[i].start, chunks[i + width - 1].end)
                    found.setdefault(span, " ".join(c.core for c in chunks[i : i + width]))

    return [found[span] for span in sorted(found)]


def resolve_coreferences(text: str) -> str:
    """Replace each third-person pronoun by the most recent entity mention found
    within the current or two preceding sentences; pronouns with no antecedent in
    range are left alone.

    Unlike extract_named_entities, a mention that is solely the first word of
    its sentence does count here: subjects usually open the sentence, and they
    are exactly what the pronouns refer back to.
    """
    mentions = _capitalized_runs(text)
    if not mentions:
        return text

    replacements: list[tuple[int, int, str]] = []
    for chunk in _chunks(text):
        if chunk.core.lower() not in PRONOUNS:
            continue
        antecedent = None
        for m in mentions:
            if m.end <= chunk.start and chunk.sentence - m.sentence <= 2:
                antecedent = m
            elif m.start >= chunk.start:
                break
        if antecedent is not None:
            replacements.append((chunk.start, chunk.end, antecedent.surface))

    if not replacements:
        return text
    parts = []
    cursor = 0
    for start, end, surface in replacements:
        parts.append(text[cursor:start])
        parts.append(surface)
        cursor = end
    parts.append(text[cursor:])
    return "".join(parts)


# -- lexicon files -----------------------------------------------------------


def _read_lines(path: str | Path, what: str) -> list[tuple[int, str]]:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{what} file not found: {p}")
    lines = p.read_text(encoding="utf-8").splitlines()
    return [(i + 1, line.strip()) for i, line in enumerate(lines) if line.strip()]


def load_stopwords(path: str | Path) -> frozenset[str]:
    """One lowercase word per line."""
    words = set()
    for lineno, line in _read_lines(path, "stopword"):
        if line != line.lower() or len(line.split()) != 1:
            raise InputError(f"{path}:{lineno}: stopword entries must be single lowercase words, got {line!r}")
        words.add(line)
    return frozenset(words)


def load_lemma_lexicon(path: str | Path) -> dict[str, str]:
    """TSV of `surface<TAB>lemma`; lemmas must themselves be valid single tokens."""
    lexicon: dict[str, str] = {}
    for lineno, line in _read_lines(path, "lemma lexicon"):
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise InputError(f"{path}:{lineno}: expected `surface<TAB>lemma`, got {line!r}")
        surface, lemma = fields
        if _WORD_RE.fullmatch(lemma) is None or lemma != lemma.lower():
            raise InputError(f"{path}:{lineno}: lemma {lemma!r} is not a valid lowercase token")
        if surface in lexicon:
            raise InputError(f"{path}:{lineno}: duplicate surface form {surface!r}")
        lexicon[surface] = lemma
    return lexicon


def load_synonym_lexicon(path: str | Path) -> dict[str, tuple[str, ...]]:
    """TSV of `term<TAB>syn1,syn2,...`; a term may not list itself."""
    lexicon: dict[str, tuple[str, ...]] = {}
    for lineno, line in _read_lines(path, "synonym lexicon"):
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise InputError(f"{path}:{lineno}: expected `term<TAB>syn1,syn2,...`, got {line!r}")
        term = fields[0]
        if term in lexicon:
            raise InputError(f"{path}:{lineno}: duplicate term {term!r}")
        syns = []
        for syn in fields[1].split(","):
            syn = syn.strip()
            if not syn:
                continue
            if syn == term:
                raise InputError(f"{path}:{lineno}: term {term!r} lists itself as a synonym")
            if syn not in syns:
                syns.append(syn)
        lexicon[term] = tuple(syns)
    return lexicon


def load_gazetteer(path: str | Path) -> tuple[str, ...]:
    """One entity per line; matched case-insensitively."""
    return tuple(line for _, line in _read_lines(path, "gazetteer"))


@dataclass(frozen=True)
class LexiconSet:
    """The full bundle of lexicons the pipelines consume."""

    stopwords: frozenset[str]
    lemmas: Mapping[str, str]
    synonyms: Mapping[str, tuple[str, ...]]
    gazetteer: tuple[str, ...] = ()

    @classmethod
    def load(
        cls,
        stopwords: str | Path,
        lemmas: str | Path,
        synonyms: str | Path,
        gazetteer: str | Path | None = None,
    ) -> "LexiconSet":
        return cls(
            stopwords=load_stopwords(stopwords),
            lemmas=load_lemma_lexicon(lemmas),
            synonyms=load_synonym_lexicon(synonyms),
            gazetteer=load_gazetteer(gazetteer) if gazetteer is not None else (),
        )
