"""qdiff: estimate exam-question difficulty from knowledge-graph metrics.

The pipeline: ingest a hyperlink graph and a ranked topic table, extract
keywords per question, compute four difficulty metrics (retrieval cost,
saliency, coherence, superficiality) aggregated into a feature vector,
collect pairwise human judgments on an ELO leaderboard, and fit a linear
difficulty predictor evaluated with k-fold cross-validation.
"""

from .config import PipelineConfig, load_config_file
from .elo import EloBoard, Judgment, Winner, expected_score
from .linkgraph import LinkGraph, TraversalMode, load_graph, normalize_title
from .metrics import (
    FEATURE_NAMES,
    FeatureVector,
    MetricsConfig,
    RhoNormalization,
    coherence,
    featurize_question,
    retrieval_cost,
    saliency,
    superficiality,
)
from .questions import (
    CorpusStats,
    Question,
    Template,
    build_corpus_stats,
    deduplicate,
    extract,
    load_questions,
)
from .regression import CvReport, RegressionModel, cross_validate, fit
from .topics import TopicTable, assign_topic, load_topic_table

__version__ = "0.1.0"

__all__ = [
    "CorpusStats",
    "CvReport",
    "EloBoard",
    "FEATURE_NAMES",
    "FeatureVector",
    "Judgment",
    "LinkGraph",
    "MetricsConfig",
    "PipelineConfig",
    "Question",
    "RegressionModel",
    "RhoNormalization",
    "Template",
    "TopicTable",
    "TraversalMode",
    "Winner",
    "assign_topic",
    "build_corpus_stats",
    "coherence",
    "cross_validate",
    "deduplicate",
    "expected_score",
    "extract",
    "featurize_question",
    "fit",
    "load_config_file",
    "load_graph",
    "load_questions",
    "load_topic_table",
    "normalize_title",
    "retrieval_cost",
    "saliency",
    "superficiality",
]
