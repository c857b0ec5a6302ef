"""File-based pipeline stages: every stage is a pure function of its input
files plus the configuration, and stages talk only through the documented
TSV/JSONL formats. Re-running a stage with unchanged inputs must produce
byte-identical output, so nothing here may depend on wall-clock time,
filesystem paths, or unordered iteration.
"""

from __future__ import annotations

from typing import Iterable, Sequence, TextIO

import numpy as np

from .config import PipelineConfig
from .elo import EloBoard
from .errors import ParseError
from .linkgraph import LinkGraph
from .metrics import FEATURE_NAMES, FeatureVector, featurize_question
from .questions import Question, build_corpus_stats, deduplicate, extract
from .topics import TopicTable

FEATURE_COLUMNS = ("question_id",) + FEATURE_NAMES + ("missing_count",)


def format_number(value: float) -> str:
    """Render a number with 6 significant digits; integers stay bare."""
    value = float(value)
    if value == 0.0:
        value = 0.0  # collapse -0.0
    return format(value, ".6g")


def prepare_questions(
    questions: Sequence[Question], config: PipelineConfig
) -> list[Question]:
    """De-duplicate, then fill in missing keyword lists by extraction.

    Corpus statistics for the extractor are built over the kept questions,
    one document per question. Questions that already carry keywords pass
    through untouched.
    """
    kept = deduplicate(questions, config.dedup_threshold)
    stats = build_corpus_stats(q.text for q in kept)
    prepared = []
    for question in kept:
        if question.keywords:
            prepared.append(question)
        else:
            prepared.append(
                question.with_keywords(
                    extract(question.text, stats, config.max_keywords)
                )
            )
    return prepared


def featurize_questions(
    questions: Sequence[Question],
    graph: LinkGraph,
    table: TopicTable,
    config: PipelineConfig,
) -> list[FeatureVector]:
    metrics_config = config.metrics_config()
    return [
        featurize_question(
            q.id, q.keywords, graph, table, config.root_topic, metrics_config
        )
        for q in questions
    ]


def write_features_tsv(
    features: Iterable[FeatureVector], config: PipelineConfig, stream: TextIO
) -> None:
    stream.writelines(config.echo_lines())
    stream.write("\t".join(FEATURE_COLUMNS) + "\n")
    for fv in features:
        rendered = "\t".join(format_number(v) for v in fv.values())
        stream.write(f"{fv.question_id}\t{rendered}\n")


def read_features_tsv(
    lines: Iterable[str],
) -> tuple[list[str], np.ndarray, tuple[str, ...]]:
    """Parse a features TSV into (question_ids, matrix, feature_names)."""
    header: list[str] | None = None
    ids: list[str] = []
    rows: list[list[float]] = []
    for line_number, line in enumerate(lines, start=1):
        stripped = line.rstrip("\n")
        if not stripped.strip() or stripped.startswith("#"):
            continue
        fields = stripped.split("\t")
        if header is None:
            if fields[0] != "question_id":
                raise ParseError(
                    "first data line must be the header starting with "
                    "'question_id'",
                    line_number,
                )
            header = fields
            continue
        if len(fields) != len(header):
            raise ParseError(
                f"expected {len(header)} fields, got {len(fields)}", line_number
            )
        ids.append(fields[0])
        try:
            rows.append([float(v) for v in fields[1:]])
        except ValueError:
            raise ParseError("non-numeric feature value", line_number) from None
    if header is None:
        raise ParseError("missing header line")
    matrix = np.asarray(rows, dtype=float) if rows else np.empty((0, len(header) - 1))
    return ids, matrix, tuple(header[1:])


def write_labels_tsv(
    labels: dict[str, float], config: PipelineConfig, stream: TextIO
) -> None:
    stream.writelines(config.echo_lines())
    stream.write("question_id\tlabel\n")
    for question_id in sorted(labels):
        stream.write(f"{question_id}\t{format_number(labels[question_id])}\n")


def read_labels_tsv(lines: Iterable[str]) -> dict[str, float]:
    labels: dict[str, float] = {}
    for line_number, line in enumerate(lines, start=1):
        stripped = line.rstrip("\n")
        if not stripped.strip() or stripped.startswith("#"):
            continue
        fields = stripped.split("\t")
        if len(fields) != 2:
            raise ParseError(
                f"expected 2 tab-separated fields, got {len(fields)}", line_number
            )
        if fields == ["question_id", "label"]:
            continue
        try:
            labels[fields[0]] = float(fields[1])
        except ValueError:
            raise ParseError(f"bad label {fields[1]!r}", line_number) from None
    return labels


def write_leaderboard_tsv(
    board: EloBoard, config: PipelineConfig, stream: TextIO
) -> None:
    labels = board.difficulty_labels(config.label_scale_max)
    stream.writelines(config.echo_lines())
    stream.write("question_id\trating\tcomparisons\tlabel\n")
    for question_id, rating, comparisons in board.leaderboard():
        stream.write(
            f"{question_id}\t{format_number(rating)}\t{comparisons}"
            f"\t{format_number(labels[question_id])}\n"
        )


def write_predictions_tsv(
    predictions: Sequence[tuple[str, float]], config: PipelineConfig, stream: TextIO
) -> None:
    stream.writelines(config.echo_lines())
    stream.write("question_id\tprediction\n")
    for question_id, value in predictions:
        stream.write(f"{question_id}\t{format_number(value)}\n")


def join_features_labels(
    ids: Sequence[str], X: np.ndarray, labels: dict[str, float]
) -> tuple[list[str], np.ndarray, np.ndarray, list[str], list[str]]:
    """Inner-join features with labels on question_id.

    Returns (joined_ids, X_joined, y, feature_orphans, label_orphans);
    orphans are ids present on only one side, in deterministic order.
    """
    joined_ids = [q for q in ids if q in labels]
    keep = [i for i, q in enumerate(ids) if q in labels]
    feature_orphans = [q for q in ids if q not in labels]
    label_orphans = sorted(set(labels) - set(ids))
    X_joined = X[keep] if keep else np.empty((0, X.shape[1] if X.ndim == 2 else 0))
    y = np.asarray([labels[q] for q in joined_ids], dtype=float)
    return joined_ids, X_joined, y, feature_orphans, label_orphans
