"""Command-line pipeline orchestrator.

Subcommands wire the stages together through files: ingest-graph,
build-topics, extract-keywords, featurize, elo-rank, train, predict, and
serve. Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

from . import elo, linkgraph, pipeline, regression, topics
from .config import PipelineConfig, load_config_file
from .errors import QdiffError
from .questions import load_questions_file, write_questions

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the pipeline contract wants 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="qdiff",
        description="Question difficulty toolkit: knowledge-graph metrics, "
        "pairwise ELO labels, and a linear difficulty predictor.",
    )
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument(
        "--out", default=".", help="output directory (default: current)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-graph", help="validate an edge list, write cache")
    p.add_argument("--edges", required=True, help="edge-list TSV")

    p = sub.add_parser("build-topics", help="validate a topic table, write it back")
    p.add_argument("--topics", required=True, help="topic table TSV")

    p = sub.add_parser(
        "extract-keywords", help="de-duplicate questions and fill in keywords"
    )
    p.add_argument("--questions", required=True, help="questions JSONL")

    p = sub.add_parser("featurize", help="compute the per-question feature TSV")
    p.add_argument("--graph", help="edge-list TSV (default: config graph_path)")
    p.add_argument("--topics", help="topic table TSV")
    p.add_argument("--questions", help="questions JSONL")
    p.add_argument("--root", help="root topic title")

    p = sub.add_parser("elo-rank", help="fold a judgment log into labels")
    p.add_argument("--questions", help="questions JSONL")
    p.add_argument("--log", required=True, help="judgment log JSONL")

    p = sub.add_parser("train", help="fit the difficulty model with k-fold CV")
    p.add_argument("--features", required=True, help="features TSV")
    p.add_argument("--labels", required=True, help="labels TSV")

    p = sub.add_parser("predict", help="apply a saved model to a features TSV")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--features", required=True, help="features TSV")

    p = sub.add_parser("serve", help="start the pairwise annotation service")
    p.add_argument("--questions", help="questions JSONL")
    p.add_argument("--log", required=True, help="judgment log JSONL (append)")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui-dir", help="static assets directory for the web UI")

    return parser


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    config = load_config_file(args.config) if args.config else PipelineConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    for attr, field in (
        ("graph", "graph_path"),
        ("topics", "topic_table_path"),
        ("questions", "questions_path"),
        ("root", "root_topic"),
    ):
        if getattr(args, attr, None) is not None:
            overrides[field] = getattr(args, attr)
    return config.override(**overrides)


def _required(value: str | None, what: str) -> str:
    if not value:
        raise QdiffError(f"missing {what}: pass the flag or set it in --config")
    return value


def _write_text(path: Path, render) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    buffer = io.StringIO()
    render(buffer)
    path.write_text(buffer.getvalue(), encoding="utf-8")


def _cmd_ingest_graph(args, config: PipelineConfig, out_dir: Path) -> int:
    graph = linkgraph.load_graph_file(args.edges)
    cache = out_dir / "graph.tsv"
    _write_text(cache, lambda s: linkgraph.write_canonical(graph, s))
    print(
        f"nodes={graph.node_count} edges={graph.edge_count} "
        f"dropped_duplicates={graph.dropped_duplicates} "
        f"dropped_self_loops={graph.dropped_self_loops}"
    )
    print(f"wrote {cache}")
    return EXIT_OK


def _cmd_build_topics(args, config: PipelineConfig, out_dir: Path) -> int:
    table = topics.load_topic_table_file(args.topics)
    path = out_dir / "topics.tsv"
    _write_text(path, lambda s: topics.write_topic_table(table, s))
    print(f"topics={len(table)}")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_extract_keywords(args, config: PipelineConfig, out_dir: Path) -> int:
    questions = load_questions_file(args.questions)
    prepared = pipeline.prepare_questions(questions, config)
    path = out_dir / "questions_keywords.jsonl"
    _write_text(path, lambda s: write_questions(prepared, s))
    print(f"questions={len(questions)} kept={len(prepared)}")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_featurize(args, config: PipelineConfig, out_dir: Path) -> int:
    graph = linkgraph.load_graph_file(_required(config.graph_path, "--graph"))
    table = topics.load_topic_table_file(
        _required(config.topic_table_path, "--topics")
    )
    questions = load_questions_file(
        _required(config.questions_path, "--questions")
    )
    _required(config.root_topic, "--root")
    prepared = pipeline.prepare_questions(questions, config)
    features = pipeline.featurize_questions(prepared, graph, table, config)
    path = out_dir / "features.tsv"
    _write_text(path, lambda s: pipeline.write_features_tsv(features, config, s))
    print(f"questions={len(questions)} kept={len(prepared)} rows={len(features)}")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_elo_rank(args, config: PipelineConfig, out_dir: Path) -> int:
    questions = load_questions_file(_required(config.questions_path, "--questions"))
    judgments = elo.read_judgment_log_file(args.log)
    board = elo.EloBoard.from_log(
        (q.id for q in questions),
        judgments,
        k_factor=config.elo_k,
        initial_rating=config.initial_rating,
    )
    leaderboard_path = out_dir / "leaderboard.tsv"
    labels_path = out_dir / "labels.tsv"
    _write_text(
        leaderboard_path, lambda s: pipeline.write_leaderboard_tsv(board, config, s)
    )
    labels = board.difficulty_labels(config.label_scale_max)
    _write_text(labels_path, lambda s: pipeline.write_labels_tsv(labels, config, s))
    print(f"judgments={len(board.judgments)} questions={len(board)}")
    print(f"wrote {leaderboard_path}")
    print(f"wrote {labels_path}")
    return EXIT_OK


def _cmd_train(args, config: PipelineConfig, out_dir: Path) -> int:
    with open(args.features, encoding="utf-8") as handle:
        ids, X, feature_names = pipeline.read_features_tsv(handle)
    with open(args.labels, encoding="utf-8") as handle:
        labels = pipeline.read_labels_tsv(handle)
    joined_ids, Xj, y, feature_orphans, label_orphans = (
        pipeline.join_features_labels(ids, X, labels)
    )
    for orphan in feature_orphans:
        print(f"warning: no label for question {orphan}", file=sys.stderr)
    for orphan in label_orphans:
        print(f"warning: no features for question {orphan}", file=sys.stderr)
    if len(joined_ids) < config.cv_folds:
        raise QdiffError(
            f"joined dataset has {len(joined_ids)} rows, "
            f"fewer than cv_folds={config.cv_folds}"
        )
    model = regression.fit(
        Xj, y, feature_names=feature_names, ridge_epsilon=config.ridge_epsilon
    )
    report = regression.cross_validate(
        Xj, y, k=config.cv_folds, seed=config.seed,
        ridge_epsilon=config.ridge_epsilon,
    )
    model_obj = model.to_json_obj() | {"config": config.echo_dict()}
    model_path = out_dir / "model.json"
    model_text = json.dumps(model_obj, indent=2, sort_keys=True) + "\n"
    _write_text(model_path, lambda s: s.write(model_text))
    report_obj = report.to_json_obj() | {"config": config.echo_dict()}
    report_json = out_dir / "cv_report.json"
    report_text = json.dumps(report_obj, indent=2, sort_keys=True) + "\n"
    _write_text(report_json, lambda s: s.write(report_text))
    report_tsv = out_dir / "cv_report.tsv"

    def render_report(stream) -> None:
        stream.writelines(config.echo_lines())
        report.write_tsv(stream)

    _write_text(report_tsv, render_report)
    report.write_tsv(sys.stdout)
    print(f"wrote {model_path}")
    print(f"wrote {report_json}")
    print(f"wrote {report_tsv}")
    return EXIT_OK


def _cmd_predict(args, config: PipelineConfig, out_dir: Path) -> int:
    with open(args.model, encoding="utf-8") as handle:
        model = regression.load_model(handle)
    with open(args.features, encoding="utf-8") as handle:
        ids, X, feature_names = pipeline.read_features_tsv(handle)
    if feature_names != model.feature_names:
        raise QdiffError(
            "feature columns do not match the model: "
            f"{list(feature_names)} vs {list(model.feature_names)}"
        )
    predictions = (
        list(zip(ids, model.predict_many(X))) if len(ids) else []
    )
    path = out_dir / "predictions.tsv"
    _write_text(
        path, lambda s: pipeline.write_predictions_tsv(predictions, config, s)
    )
    print(f"predictions={len(predictions)}")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_serve(args, config: PipelineConfig, out_dir: Path) -> int:
    from .service import AnnotationService, run_server

    questions = load_questions_file(_required(config.questions_path, "--questions"))
    service = AnnotationService(questions, args.log, config)
    print(f"serving on http://{args.host}:{args.port} (log: {args.log})")
    run_server(service, host=args.host, port=args.port, ui_dir=args.ui_dir)
    return EXIT_OK


_COMMANDS = {
    "ingest-graph": _cmd_ingest_graph,
    "build-topics": _cmd_build_topics,
    "extract-keywords": _cmd_extract_keywords,
    "featurize": _cmd_featurize,
    "elo-rank": _cmd_elo_rank,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
        out_dir = Path(args.out)
        return _COMMANDS[args.command](args, config, out_dir)
    except (QdiffError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
