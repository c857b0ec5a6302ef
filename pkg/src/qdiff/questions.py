"""Question records, keyword extraction, and near-duplicate removal.

Questions arrive as JSON lines with optional precomputed keywords and
embeddings. When keywords are absent they are extracted with a classical
corpus-weighted term score (stopword-filtered unigrams and bigrams ranked
by tf-idf); extraction is pure, so the same text and corpus statistics
always produce the same keyword list.

De-duplication scans the set in input order and drops a question iff its
similarity with some earlier kept question exceeds the threshold, so the
first occurrence always wins and survivors keep their original order.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Sequence, TextIO

from .errors import ConfigurationError, ParseError

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:[-'][a-z0-9]+)*")

# Compact English stopword list; enough to strip glue words from exam text.
STOPWORDS = frozenset(
    """a about above after again against all am an and any are aren't as at be
    because been before being below between both but by can cannot could
    couldn't did didn't do does doesn't doing don't down during each few for
    from further had hadn't has hasn't have haven't having he her here hers
    herself him himself his how i if in into is isn't it its itself just let's
    me more most mustn't my myself no nor not of off on once only or other
    ought our ours ourselves out over own same shan't she should shouldn't so
    some such than that the their theirs them themselves then there these they
    this those through to too under until up very was wasn't we were weren't
    what when where which while who whom why will with won't would wouldn't
    you your yours yourself yourselves""".split()
)


class Template(str, Enum):
    SINGLE_TOPIC = "SINGLE_TOPIC"
    MULTI_TOPIC = "MULTI_TOPIC"
    MEMORY_BASED = "MEMORY_BASED"
    ANALYTICAL = "ANALYTICAL"


def _normalize_keywords(keywords: Iterable[str]) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for kw in keywords:
        norm = kw.strip().casefold()
        if norm and norm not in seen:
            seen[norm] = None
    return tuple(seen)


@dataclass(frozen=True)
class Question:
    """A single exam question with its extracted keyword list.

    Keywords are lower-cased, de-duplicated, and order-stable. Embeddings,
    when present, are unit-normalized at construction.
    """

    id: str
    text: str
    template: Template
    keywords: tuple[str, ...] = ()
    embedding: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "keywords", _normalize_keywords(self.keywords))
        if self.embedding is not None:
            vec = tuple(float(x) for x in self.embedding)
            norm = math.sqrt(sum(x * x for x in vec))
            if norm == 0.0:
                raise ValueError(f"question {self.id!r}: zero-norm embedding")
            object.__setattr__(self, "embedding", tuple(x / norm for x in vec))

    def with_keywords(self, keywords: Sequence[str]) -> "Question":
        return replace(self, keywords=tuple(keywords))


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.casefold())


@dataclass(frozen=True)
class CorpusStats:
    """Document frequencies over the ingested corpus, for idf weighting."""

    document_count: int
    doc_frequency: dict[str, int] = field(default_factory=dict)

    def idf(self, term: str) -> float:
        df = self.doc_frequency.get(term, 0)
        return math.log((1 + self.document_count) / (1 + df)) + 1.0


def _candidate_terms(tokens: Sequence[str]) -> list[str]:
    """Stopword-filtered unigrams plus bigrams of adjacent content words."""
    candidates = [tok for tok in tokens if tok not in STOPWORDS]
    for left, right in zip(tokens, tokens[1:]):
        if left not in STOPWORDS and right not in STOPWORDS:
            candidates.append(f"{left} {right}")
    return candidates


def build_corpus_stats(texts: Iterable[str]) -> CorpusStats:
    """Document frequency of every candidate term across ``texts``."""
    doc_frequency: Counter[str] = Counter()
    count = 0
    for text in texts:
        count += 1
        doc_frequency.update(set(_candidate_terms(tokenize(text))))
    return CorpusStats(document_count=count, doc_frequency=dict(doc_frequency))


def extract(text: str, corpus_stats: CorpusStats, max_k: int = 5) -> list[str]:
    """Top ``max_k`` keywords of ``text`` by tf-idf against the corpus.

    Ties break on first occurrence order, then alphabetically. Empty or
    stopword-only text yields an empty list, which is not an error.
    """
    if max_k < 1:
        raise ValueError(f"max_k must be >= 1, got {max_k}")
    tokens = tokenize(text)
    candidates = _candidate_terms(tokens)
    if not candidates:
        return []
    tf = Counter(candidates)
    first_pos = {}
    for pos, term in enumerate(candidates):
        first_pos.setdefault(term, pos)
    scored = sorted(
        tf,
        key=lambda term: (-tf[term] * corpus_stats.idf(term), first_pos[term], term),
    )
    return scored[:max_k]


Similarity = Callable[[Question, Question], float]


def cosine_similarity(a: Question, b: Question) -> float:
    """Cosine of the two embeddings (already unit-normalized: plain dot)."""
    for q in (a, b):
        if q.embedding is None:
            raise ConfigurationError(
                f"cosine similarity requires embeddings; question {q.id!r} has none"
            )
    if len(a.embedding) != len(b.embedding):
        raise ConfigurationError(
            f"embedding dimension mismatch between {a.id!r} and {b.id!r}"
        )
    return sum(x * y for x, y in zip(a.embedding, b.embedding))


def token_jaccard(a: Question, b: Question) -> float:
    """Jaccard overlap of the questions' token sets; offline fallback plug."""
    sa, sb = set(tokenize(a.text)), set(tokenize(b.text))
    if not sa and not sb:
        return 0.0
    return len(sa & sb) / len(sa | sb)


def deduplicate(
    questions: Sequence[Question],
    threshold: float = 0.97,
    similarity: Similarity | None = None,
) -> list[Question]:
    """Drop near-duplicates, keeping the first occurrence.

    When no plug is given, cosine similarity is used if every question
    carries an embedding, otherwise token-set Jaccard. A question is
    dropped iff its similarity with an earlier kept question is strictly
    greater than ``threshold``.
    """
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    if similarity is None:
        similarity = (
            cosine_similarity
            if questions and all(q.embedding is not None for q in questions)
            else token_jaccard
        )
    if similarity is cosine_similarity:
        for q in questions:
            if q.embedding is None:
                raise ConfigurationError(
                    f"cosine similarity requires embeddings; "
                    f"question {q.id!r} has none"
                )
    kept: list[Question] = []
    for question in questions:
        if all(similarity(question, earlier) <= threshold for earlier in kept):
            kept.append(question)
    return kept


def _question_from_obj(obj: dict, line_number: int) -> Question:
    try:
        template = Template(obj["template"])
    except KeyError:
        raise ParseError("missing field 'template'", line_number) from None
    except ValueError:
        raise ParseError(
            f"unknown template {obj['template']!r}", line_number
        ) from None
    for req in ("id", "text"):
        if req not in obj:
            raise ParseError(f"missing field {req!r}", line_number)
    embedding = obj.get("embedding")
    return Question(
        id=str(obj["id"]),
        text=str(obj["text"]),
        template=template,
        keywords=tuple(obj.get("keywords") or ()),
        embedding=tuple(embedding) if embedding is not None else None,
    )


def load_questions(lines: Iterable[str]) -> list[Question]:
    """Parse a JSON-lines question stream, enforcing unique ids."""
    out: list[Question] = []
    seen: set[str] = set()
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", line_number) from None
        question = _question_from_obj(obj, line_number)
        if question.id in seen:
            raise ParseError(f"duplicate question id {question.id!r}", line_number)
        seen.add(question.id)
        out.append(question)
    return out


def load_questions_file(path: str) -> list[Question]:
    with open(path, encoding="utf-8") as handle:
        return load_questions(handle)


def write_questions(questions: Iterable[Question], stream: TextIO) -> None:
    for q in questions:
        obj: dict = {
            "id": q.id,
            "text": q.text,
            "template": q.template.value,
            "keywords": list(q.keywords),
        }
        if q.embedding is not None:
            obj["embedding"] = list(q.embedding)
        stream.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")
