"""Pipeline configuration: defaults, JSON loading, and provenance echo.

Every TSV artifact the pipeline writes starts with ``#``-prefixed header
lines echoing the semantic configuration (modes, thresholds, seeds), so an
output file always records how it was produced. File paths are not echoed:
they would make otherwise identical outputs differ between machines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from typing import Any

from .errors import ConfigurationError
from .linkgraph import TraversalMode
from .metrics import MetricsConfig, RhoNormalization

# Fields that name input files; excluded from artifact echo headers.
PATH_FIELDS = ("graph_path", "topic_table_path", "questions_path")


@dataclass(frozen=True)
class PipelineConfig:
    graph_path: str | None = None
    topic_table_path: str | None = None
    questions_path: str | None = None
    root_topic: str = ""
    rho_normalization: RhoNormalization = RhoNormalization.PAPER
    omega_mode: TraversalMode = TraversalMode.DIRECTED
    omega_fallback_undirected: bool = True
    dedup_threshold: float = 0.97
    max_keywords: int = 5
    elo_k: float = 20.0
    initial_rating: float = 1000.0
    label_scale_max: float = 10.0
    cv_folds: int = 5
    seed: int = 0
    ridge_epsilon: float = 1e-8
    impute_value: float = 0.0
    pair_timeout_seconds: float = 600.0

    def __post_init__(self) -> None:
        if not 0 < self.dedup_threshold <= 1:
            raise ConfigurationError(
                f"dedup_threshold must be in (0, 1], got {self.dedup_threshold}"
            )
        if self.max_keywords < 1:
            raise ConfigurationError(
                f"max_keywords must be >= 1, got {self.max_keywords}"
            )
        if self.cv_folds < 2:
            raise ConfigurationError(f"cv_folds must be >= 2, got {self.cv_folds}")
        if self.elo_k <= 0:
            raise ConfigurationError(f"elo_k must be positive, got {self.elo_k}")
        if self.label_scale_max <= 0:
            raise ConfigurationError(
                f"label_scale_max must be positive, got {self.label_scale_max}"
            )
        if self.pair_timeout_seconds <= 0:
            raise ConfigurationError(
                f"pair_timeout_seconds must be positive, "
                f"got {self.pair_timeout_seconds}"
            )

    def metrics_config(self) -> MetricsConfig:
        return MetricsConfig(
            rho_normalization=self.rho_normalization,
            omega_mode=self.omega_mode,
            omega_fallback_undirected=self.omega_fallback_undirected,
            impute_value=self.impute_value,
        )

    def echo_dict(self) -> dict[str, object]:
        """Semantic config (no paths) as plain JSON-ready values."""
        out: dict[str, object] = {}
        for f in sorted(fields(self), key=lambda f: f.name):
            if f.name in PATH_FIELDS:
                continue
            value = getattr(self, f.name)
            if isinstance(value, (RhoNormalization, TraversalMode)):
                value = value.value
            out[f.name] = value
        return out

    def echo_lines(self) -> list[str]:
        """``# key=value`` provenance header lines, sorted by key."""
        return [f"# {key}={value}\n" for key, value in self.echo_dict().items()]

    def override(self, **changes: Any) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _coerce(name: str, value: Any) -> Any:
    if name == "rho_normalization" and isinstance(value, str):
        return RhoNormalization(value)
    if name == "omega_mode" and isinstance(value, str):
        return TraversalMode(value)
    return value


def config_from_obj(obj: dict) -> PipelineConfig:
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(obj) - known
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    try:
        return PipelineConfig(**{k: _coerce(k, v) for k, v in obj.items()})
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None


def load_config_file(path: str) -> PipelineConfig:
    with open(path, encoding="utf-8") as handle:
        try:
            obj = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"bad config JSON in {path}: {exc}") from None
    if not isinstance(obj, dict):
        raise ConfigurationError(f"config root must be a JSON object: {path}")
    return config_from_obj(obj)
