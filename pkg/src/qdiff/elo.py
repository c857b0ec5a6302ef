"""Pairwise-judgment ELO leaderboard with percentile difficulty labels.

The board is event-sourced: an append-only list of judgments is the source
of truth, and the live ratings are a pure fold over it. Replayed judgment
ids are ignored, so folding a log with duplicates reproduces the same
board as the deduplicated log.

Updates use the classical logistic ELO (base 10, scale 400). Every
decisive judgment moves the winner up and the loser down by the same
amount, so total rating is conserved.
"""

from __future__ import annotations

import bisect
import json
import random
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Iterator, TextIO

from .errors import NotFoundError, ParseError

DEFAULT_K_FACTOR = 20.0
DEFAULT_INITIAL_RATING = 1000.0


class Winner(str, Enum):
    LEFT = "LEFT"
    RIGHT = "RIGHT"


@dataclass(frozen=True)
class Judgment:
    """One pairwise "which is harder" decision."""

    judgment_id: str
    left: str
    right: str
    winner: Winner
    annotator: str
    timestamp: datetime

    def __post_init__(self) -> None:
        if self.left == self.right:
            raise ValueError(
                f"judgment {self.judgment_id!r}: left and right are the same "
                f"question {self.left!r}"
            )

    def to_json(self) -> str:
        return json.dumps(
            {
                "judgment_id": self.judgment_id,
                "left": self.left,
                "right": self.right,
                "winner": self.winner.value,
                "annotator": self.annotator,
                "timestamp": self.timestamp.astimezone(timezone.utc).isoformat(),
            },
            ensure_ascii=False,
            sort_keys=True,
        )

    @classmethod
    def from_obj(cls, obj: dict, line_number: int | None = None) -> "Judgment":
        try:
            return cls(
                judgment_id=str(obj["judgment_id"]),
                left=str(obj["left"]),
                right=str(obj["right"]),
                winner=Winner(obj["winner"]),
                annotator=str(obj["annotator"]),
                timestamp=datetime.fromisoformat(obj["timestamp"]),
            )
        except KeyError as exc:
            raise ParseError(f"missing field {exc.args[0]!r}", line_number) from None
        except ValueError as exc:
            raise ParseError(str(exc), line_number) from None


def expected_score(r_a: float, r_b: float) -> float:
    """Win probability of a rating-r_a player against r_b; in (0, 1)."""
    return 1.0 / (1.0 + 10.0 ** ((r_b - r_a) / 400.0))


class EloBoard:
    """Ratings, comparison counts, and the judgment log for a question set."""

    def __init__(
        self,
        question_ids: Iterable[str],
        k_factor: float = DEFAULT_K_FACTOR,
        initial_rating: float = DEFAULT_INITIAL_RATING,
    ):
        ids = list(question_ids)
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate question ids on board")
        self.k_factor = k_factor
        self.initial_rating = initial_rating
        self.ratings: dict[str, float] = {q: initial_rating for q in ids}
        self.comparison_counts: dict[str, int] = {q: 0 for q in ids}
        self.judgments: list[Judgment] = []
        self._seen_ids: set[str] = set()
        self._judged_pairs: set[tuple[str, str]] = set()
        self._annotator_pairs: dict[str, set[tuple[str, str]]] = {}

    def __len__(self) -> int:
        return len(self.ratings)

    @staticmethod
    def _pair_key(a: str, b: str) -> tuple[str, str]:
        return (a, b) if a <= b else (b, a)

    def has_judged(self, a: str, b: str, annotator: str | None = None) -> bool:
        key = self._pair_key(a, b)
        if annotator is None:
            return key in self._judged_pairs
        return key in self._annotator_pairs.get(annotator, ())

    def apply(self, judgment: Judgment) -> bool:
        """Apply one judgment; returns False for a replayed judgment_id.

        The winner gains k * (1 - E_winner) and the loser loses the same
        amount, so the board total is unchanged.
        """
        if judgment.judgment_id in self._seen_ids:
            return False
        for q in (judgment.left, judgment.right):
            if q not in self.ratings:
                raise NotFoundError(f"unknown question id: {q!r}")
        if judgment.winner is Winner.LEFT:
            winner, loser = judgment.left, judgment.right
        else:
            winner, loser = judgment.right, judgment.left
        delta = self.k_factor * (
            1.0 - expected_score(self.ratings[winner], self.ratings[loser])
        )
        self.ratings[winner] += delta
        self.ratings[loser] -= delta
        self.comparison_counts[judgment.left] += 1
        self.comparison_counts[judgment.right] += 1
        self.judgments.append(judgment)
        self._seen_ids.add(judgment.judgment_id)
        key = self._pair_key(judgment.left, judgment.right)
        self._judged_pairs.add(key)
        self._annotator_pairs.setdefault(judgment.annotator, set()).add(key)
        return True

    def next_pair(
        self, rng_seed: int, annotator: str | None = None
    ) -> tuple[str, str]:
        """Schedule the most informative next pair, deterministically.

        Among the questions with the lowest comparison count one is picked
        uniformly (seeded); its partner is the closest-rated question it
        has not yet been judged against (ties to the lexicographically
        smaller id). A pair already judged by ``annotator`` is only
        returned when no alternative partner exists.
        """
        if len(self.ratings) < 2:
            raise ValueError("need at least 2 questions to schedule a pair")
        min_count = min(self.comparison_counts.values())
        candidates = sorted(
            q for q, c in self.comparison_counts.items() if c == min_count
        )
        pick = candidates[random.Random(rng_seed).randrange(len(candidates))]
        others = [q for q in self.ratings if q != pick]

        def closest(pool: list[str]) -> str:
            return min(
                pool, key=lambda q: (abs(self.ratings[q] - self.ratings[pick]), q)
            )

        unjudged = [q for q in others if not self.has_judged(pick, q)]
        if unjudged:
            return (pick, closest(unjudged))
        if annotator is not None:
            fresh = [q for q in others if not self.has_judged(pick, q, annotator)]
            if fresh:
                return (pick, closest(fresh))
        return (pick, closest(others))

    def difficulty_labels(self, scale_max: float = 10.0) -> dict[str, float]:
        """Percentile-rank labels, monotone in rating, scaled to [0, scale_max]."""
        if not self.ratings:
            raise ValueError("board has no questions")
        ordered = sorted(self.ratings.values())
        n = len(ordered)
        labels: dict[str, float] = {}
        for q, rating in self.ratings.items():
            lower = _count_lower(ordered, rating)
            equal = _count_equal(ordered, rating)
            labels[q] = (lower + 0.5 * equal) / n * scale_max
        return labels

    def leaderboard(self) -> list[tuple[str, float, int]]:
        """(question_id, rating, comparisons) sorted by rating desc, id asc."""
        return sorted(
            (
                (q, self.ratings[q], self.comparison_counts[q])
                for q in self.ratings
            ),
            key=lambda row: (-row[1], row[0]),
        )

    @classmethod
    def from_log(
        cls,
        question_ids: Iterable[str],
        judgments: Iterable[Judgment],
        k_factor: float = DEFAULT_K_FACTOR,
        initial_rating: float = DEFAULT_INITIAL_RATING,
    ) -> "EloBoard":
        board = cls(question_ids, k_factor=k_factor, initial_rating=initial_rating)
        for judgment in judgments:
            board.apply(judgment)
        return board


def _count_lower(sorted_ratings: list[float], value: float) -> int:
    return bisect.bisect_left(sorted_ratings, value)


def _count_equal(sorted_ratings: list[float], value: float) -> int:
    return bisect.bisect_right(sorted_ratings, value) - bisect.bisect_left(
        sorted_ratings, value
    )


def read_judgment_log(lines: Iterable[str]) -> Iterator[Judgment]:
    """Parse a JSON-lines judgment log; malformed lines raise ParseError."""
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", line_number) from None
        yield Judgment.from_obj(obj, line_number)


def read_judgment_log_file(path: str) -> list[Judgment]:
    with open(path, encoding="utf-8") as handle:
        return list(read_judgment_log(handle))


def append_judgment(judgment: Judgment, stream: TextIO) -> None:
    stream.write(judgment.to_json() + "\n")
