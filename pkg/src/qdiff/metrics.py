"""The four per-keyword difficulty metrics and their per-question aggregates.

For each keyword of a question we compute:

* retrieval cost (rho): how scarce the keyword's topic is in the training
  corpus, from its rank in the topic distribution table;
* saliency (eta): the keyword article's in-link count relative to the mean
  in-link count of its in-linking neighbors;
* superficiality (omega): hop distance from the subject's root article to
  the keyword article.

For each unordered keyword pair we compute coherence (lambda): the Jaccard
overlap of the two articles' in-link sets.

Any value can come back MISSING (None): unresolved titles, keywords with
no topic, empty in-link neighborhoods, unreachable articles. Aggregation
skips missing samples; a metric with nothing left to aggregate is imputed
(default 0.0) and the vector's missing_count records how much was lost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Sequence

from .errors import NotFoundError
from .linkgraph import LinkGraph, TraversalMode
from .topics import TopicAssigner, TopicTable, assign_topic


class RhoNormalization(str, Enum):
    """Rank-to-cost mapping variants.

    PAPER is the verbatim formula 1 - rank/size, which never reaches 1.
    ENDPOINT rescales to 1 - (rank-1)/(size-1) so that the best rank maps
    to exactly 1 and the worst to exactly 0.
    """

    PAPER = "PAPER"
    ENDPOINT = "ENDPOINT"


def retrieval_cost(
    rank: int,
    corpus_size: int,
    normalization: RhoNormalization = RhoNormalization.PAPER,
) -> float:
    """Topic prominence in [0, 1]; rank 1 (most frequent) scores highest."""
    if corpus_size < 1:
        raise ValueError(f"corpus_size must be >= 1, got {corpus_size}")
    if not 1 <= rank <= corpus_size:
        raise ValueError(f"rank {rank} out of range [1, {corpus_size}]")
    if normalization is RhoNormalization.PAPER:
        return 1.0 - rank / corpus_size
    if corpus_size < 2:
        raise ValueError("ENDPOINT normalization requires corpus_size >= 2")
    return 1.0 - (rank - 1) / (corpus_size - 1)


def saliency(c: int, c_gamma: Sequence[int]) -> float | None:
    """In-link count of the article over the mean in-link count across its
    in-linking neighbors; None when the neighborhood is empty or linkless."""
    if c < 0 or any(x < 0 for x in c_gamma):
        raise ValueError("in-link counts must be non-negative")
    n = len(c_gamma)
    total = sum(c_gamma)
    if n == 0 or total == 0:
        return None
    # Single integer division: exact whenever the true ratio is integral.
    return (c * n) / total


def coherence(links_a: frozenset | set, links_b: frozenset | set) -> float:
    """Jaccard overlap of two in-link sets; two empty sets score 0."""
    union = len(links_a | links_b)
    if union == 0:
        return 0.0
    return len(links_a & links_b) / union


def superficiality(dist: int | None) -> int | None:
    """Hop count from the root article; unreachable stays None."""
    return dist


@dataclass(frozen=True)
class MetricSample:
    """Per-keyword metric values; None marks a MISSING value."""

    keyword: str
    rho: float | None
    eta: float | None
    omega: int | None


@dataclass(frozen=True)
class MetricsConfig:
    rho_normalization: RhoNormalization = RhoNormalization.PAPER
    omega_mode: TraversalMode = TraversalMode.DIRECTED
    # Retry an unreachable target with undirected edges before giving up.
    omega_fallback_undirected: bool = True
    impute_value: float = 0.0
    assigner: TopicAssigner | None = None


FEATURE_NAMES: tuple[str, ...] = (
    "rho_min", "rho_max", "rho_mean", "rho_sum",
    "eta_min", "eta_max", "eta_mean", "eta_sum",
    "lambda_min", "lambda_max", "lambda_mean", "lambda_sum",
    "omega_min", "omega_max", "omega_mean", "omega_std", "omega_sum",
)


@dataclass(frozen=True)
class FeatureVector:
    """The 17 aggregated metric values plus a data-quality counter."""

    question_id: str
    rho_min: float
    rho_max: float
    rho_mean: float
    rho_sum: float
    eta_min: float
    eta_max: float
    eta_mean: float
    eta_sum: float
    lambda_min: float
    lambda_max: float
    lambda_mean: float
    lambda_sum: float
    omega_min: float
    omega_max: float
    omega_mean: float
    omega_std: float
    omega_sum: float
    missing_count: int

    def values(self) -> tuple[float, ...]:
        """The 17 feature values followed by missing_count, in column order."""
        return tuple(getattr(self, f.name) for f in fields(self))[1:]


def _aggregate(values: list[float], impute: float) -> tuple[float, float, float, float]:
    if not values:
        return (impute, impute, impute, impute)
    return (min(values), max(values), sum(values) / len(values), sum(values))


def _population_std(values: list[float]) -> float:
    mean = sum(values) / len(values)
    return math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))


def compute_samples(
    question_keywords: Sequence[str],
    graph: LinkGraph,
    table: TopicTable,
    root: str,
    config: MetricsConfig = MetricsConfig(),
) -> list[MetricSample]:
    """Per-keyword rho/eta/omega; unresolvable pieces come back None."""
    samples: list[MetricSample] = []
    for keyword in question_keywords:
        topic_id = assign_topic(table, keyword, config.assigner)
        rho = (
            None
            if topic_id is None
            else retrieval_cost(
                table.rank_of(topic_id), len(table), config.rho_normalization
            )
        )

        node = graph.resolve(keyword)
        eta: float | None = None
        omega: int | None = None
        if node is not None:
            gamma = graph.in_links_by_id(node)
            eta = saliency(
                len(gamma), [graph.in_link_count_by_id(g) for g in sorted(gamma)]
            )
            title = graph.title_of(node)
            dist = graph.distance_from_root(root, title, config.omega_mode)
            if (
                dist is None
                and config.omega_mode is TraversalMode.DIRECTED
                and config.omega_fallback_undirected
            ):
                dist = graph.distance_from_root(
                    root, title, TraversalMode.UNDIRECTED
                )
            omega = superficiality(dist)
        samples.append(
            MetricSample(keyword=keyword, rho=rho, eta=eta, omega=omega)
        )
    return samples


def compute_pair_coherences(
    question_keywords: Sequence[str], graph: LinkGraph
) -> list[float | None]:
    """Coherence for each unordered keyword pair, in (i, j) i<j order.

    A pair involving an unresolved keyword is MISSING; a resolved pair of
    linkless articles scores 0, not MISSING.
    """
    nodes = [graph.resolve(kw) for kw in question_keywords]
    out: list[float | None] = []
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            if nodes[i] is None or nodes[j] is None:
                out.append(None)
            else:
                out.append(
                    coherence(
                        graph.in_links_by_id(nodes[i]),
                        graph.in_links_by_id(nodes[j]),
                    )
                )
    return out


def featurize_question(
    question_id: str,
    question_keywords: Sequence[str],
    graph: LinkGraph,
    table: TopicTable,
    root: str,
    config: MetricsConfig = MetricsConfig(),
) -> FeatureVector:
    """Aggregate the per-keyword metrics of one question into a FeatureVector.

    missing_count is the number of metric values that came back MISSING
    (one per keyword for rho/eta/omega, one per pair for lambda), plus one
    for the pair metric when the question has no keyword pairs at all.
    """
    if not question_keywords:
        raise ValueError(f"question {question_id!r} has no keywords")
    if graph.resolve(root) is None:
        raise NotFoundError(f"root topic does not resolve: {root!r}")

    samples = compute_samples(question_keywords, graph, table, root, config)
    pair_lambdas = compute_pair_coherences(question_keywords, graph)

    rhos = [s.rho for s in samples if s.rho is not None]
    etas = [s.eta for s in samples if s.eta is not None]
    omegas = [float(s.omega) for s in samples if s.omega is not None]
    lambdas = [v for v in pair_lambdas if v is not None]

    missing = (
        sum(1 for s in samples if s.rho is None)
        + sum(1 for s in samples if s.eta is None)
        + sum(1 for s in samples if s.omega is None)
        + sum(1 for v in pair_lambdas if v is None)
        + (1 if not pair_lambdas else 0)
    )

    impute = config.impute_value
    rho_agg = _aggregate(rhos, impute)
    eta_agg = _aggregate(etas, impute)
    lam_agg = _aggregate(lambdas, impute)
    om_agg = _aggregate(omegas, impute)
    om_std = _population_std(omegas) if omegas else impute

    return FeatureVector(
        question_id=question_id,
        rho_min=rho_agg[0], rho_max=rho_agg[1], rho_mean=rho_agg[2], rho_sum=rho_agg[3],
        eta_min=eta_agg[0], eta_max=eta_agg[1], eta_mean=eta_agg[2], eta_sum=eta_agg[3],
        lambda_min=lam_agg[0], lambda_max=lam_agg[1],
        lambda_mean=lam_agg[2], lambda_sum=lam_agg[3],
        omega_min=om_agg[0], omega_max=om_agg[1], omega_mean=om_agg[2],
        omega_std=om_std, omega_sum=om_agg[3],
        missing_count=missing,
    )
