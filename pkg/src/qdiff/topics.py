"""Ranked topic distribution table and keyword-to-topic assignment.

The table is an ingested artifact produced by corpus pre-training: one
entry per topic with its document frequency and a handful of
representative terms. Ranks are always recomputed from the frequencies
(descending, ties broken by ascending topic id) so a stale rank column in
a file can never drift from the data.

Topic assignment is pluggable. The default assigner scores each topic by
exact token overlap between the keyword and the topic's representative
terms, which keeps inference deterministic and dependency-free; a heavier
embedding-based assigner can be swapped in through the same callable
signature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, TextIO

from .errors import NotFoundError, ParseError

COMMENT_PREFIX = "#"

# An assigner maps (table, keyword) to a topic_id, or None for no topic.
TopicAssigner = Callable[["TopicTable", str], "int | None"]


def normalize_term(raw: str) -> str:
    return raw.strip().casefold()


def keyword_tokens(keyword: str) -> frozenset[str]:
    """Case-folded tokens of a keyword, split on whitespace and underscores."""
    return frozenset(keyword.casefold().replace("_", " ").split())


@dataclass(frozen=True)
class TopicEntry:
    topic_id: int
    label: str
    doc_frequency: int
    representative_terms: tuple[str, ...]


@dataclass(frozen=True)
class TopicTable:
    """Topics sorted by document frequency descending, ties by topic id."""

    entries: tuple[TopicEntry, ...]
    _ranks: dict[int, int]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def total_topics(self) -> int:
        return len(self.entries)

    @classmethod
    def from_entries(cls, entries: Iterable[TopicEntry]) -> "TopicTable":
        ordered = tuple(
            sorted(entries, key=lambda e: (-e.doc_frequency, e.topic_id))
        )
        seen: set[int] = set()
        for entry in ordered:
            if entry.topic_id in seen:
                raise ParseError(f"duplicate topic_id {entry.topic_id}")
            seen.add(entry.topic_id)
            if entry.doc_frequency < 1:
                raise ParseError(
                    f"topic {entry.topic_id}: doc_frequency must be >= 1, "
                    f"got {entry.doc_frequency}"
                )
            if not entry.representative_terms:
                raise ParseError(f"topic {entry.topic_id}: no representative terms")
        ranks = {entry.topic_id: i + 1 for i, entry in enumerate(ordered)}
        return cls(entries=ordered, _ranks=ranks)

    def rank_of(self, topic_id: int) -> int:
        """1-based rank of the topic; rank 1 is the most frequent topic."""
        rank = self._ranks.get(topic_id)
        if rank is None:
            raise NotFoundError(f"unknown topic_id: {topic_id}")
        return rank


def token_overlap_assigner(table: TopicTable, keyword: str) -> int | None:
    """Default assigner: argmax of |keyword tokens ∩ representative terms|.

    Ties resolve to the lower topic id; zero overlap everywhere yields
    None. Invariant to keyword case and surrounding whitespace.
    """
    tokens = keyword_tokens(keyword)
    if not tokens:
        return None
    best_id: int | None = None
    best_score = 0
    for entry in table.entries:
        score = len(tokens.intersection(entry.representative_terms))
        if score == 0:
            continue
        if score > best_score or (score == best_score and entry.topic_id < best_id):
            best_id, best_score = entry.topic_id, score
    return best_id


def assign_topic(
    table: TopicTable, keyword: str, assigner: TopicAssigner | None = None
) -> int | None:
    """Assign a topic id to a keyword; None when no topic matches."""
    if not keyword.strip():
        raise ValueError("keyword must be non-empty")
    return (assigner or token_overlap_assigner)(table, keyword)


def load_topic_table(lines: Iterable[str]) -> TopicTable:
    """Parse a topic-table TSV stream.

    Format: ``topic_id<TAB>label<TAB>doc_frequency<TAB>term1,term2,...``
    with ``#`` comments and blank lines skipped. Duplicate topic ids and
    non-positive frequencies are rejected with the offending value named.
    """
    entries: list[TopicEntry] = []
    seen_ids: set[int] = set()
    for line_number, line in enumerate(lines, start=1):
        stripped = line.rstrip("\n").rstrip("\r")
        if not stripped.strip() or stripped.lstrip().startswith(COMMENT_PREFIX):
            continue
        fields = stripped.split("\t")
        if len(fields) != 4:
            raise ParseError(
                f"expected 4 tab-separated fields, got {len(fields)}", line_number
            )
        try:
            topic_id = int(fields[0])
        except ValueError:
            raise ParseError(f"bad topic_id {fields[0]!r}", line_number) from None
        try:
            doc_frequency = int(fields[2])
        except ValueError:
            raise ParseError(
                f"bad doc_frequency {fields[2]!r}", line_number
            ) from None
        if topic_id in seen_ids:
            raise ParseError(f"duplicate topic_id {topic_id}", line_number)
        seen_ids.add(topic_id)
        if doc_frequency < 1:
            raise ParseError(
                f"doc_frequency must be >= 1, got {doc_frequency}", line_number
            )
        terms = tuple(
            t for t in (normalize_term(part) for part in fields[3].split(",")) if t
        )
        if not terms:
            raise ParseError("no representative terms", line_number)
        entries.append(
            TopicEntry(
                topic_id=topic_id,
                label=fields[1].strip(),
                doc_frequency=doc_frequency,
                representative_terms=terms,
            )
        )
    return TopicTable.from_entries(entries)


def load_topic_table_file(path: str) -> TopicTable:
    with open(path, encoding="utf-8") as handle:
        return load_topic_table(handle)


def write_topic_table(table: TopicTable, stream: TextIO) -> None:
    """Write the table in rank order; reloading round-trips the ranks."""
    for entry in table.entries:
        terms = ",".join(entry.representative_terms)
        stream.write(
            f"{entry.topic_id}\t{entry.label}\t{entry.doc_frequency}\t{terms}\n"
        )
