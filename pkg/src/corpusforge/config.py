"""Pipeline configuration: a single YAML file with nested sections, plus
``${ENV_VAR}`` interpolation so endpoints and API keys can live in the
environment. Validation failures report full field paths."""

from __future__ import annotations

import hashlib
import json
import os
import re
from pathlib import Path

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PathsConfig(StrictModel):
    output_dir: str = "out"
    cache_dir: str = "cache"
    eval_transcripts: str | None = None
    reference_vocab: str | None = None
    terms: str | None = None
    pool: str | None = None
    reference: str | None = None
    hypothesis: str | None = None


class ModelEntryConfig(StrictModel):
    id: str
    endpoint: str | None = None
    api_key: str | None = None
    temperature: float = 1.0
    top_p: float = 1.0


class GenerationConfig(StrictModel):
    domain_seed: str = ""
    scenario_multiplier: int = Field(default=4, ge=1)
    prompt_languages: list[str] = Field(default_factory=lambda: ["en", "ja", "zh"])
    sentences_per_prompt: int = Field(default=10, ge=1)
    models: list[ModelEntryConfig] = Field(default_factory=list)
    template_dir: str | None = None
    target_lang: str = "en"


class LengthConstraintConfig(StrictModel):
    min_words: int = Field(ge=1)
    max_words: int = Field(ge=1)

    @model_validator(mode="after")
    def _ordered(self):
        if self.min_words > self.max_words:
            raise ValueError("min_words must not exceed max_words")
        return self


def _default_length_constraints() -> dict[str, "LengthConstraintConfig"]:
    return {
        "en": LengthConstraintConfig(min_words=5, max_words=200),
        "ja": LengthConstraintConfig(min_words=5, max_words=100),
        "zh": LengthConstraintConfig(min_words=5, max_words=100),
    }


class BudgetConfig(StrictModel):
    kind: str = "duration"
    hours: float | None = None
    seconds: float | None = None
    count: int | None = None

    @model_validator(mode="after")
    def _check(self):
        if self.kind not in ("duration", "count"):
            raise ValueError("kind must be 'duration' or 'count'")
        if self.kind == "count" and (self.count is None or self.count < 1):
            raise ValueError("count budget needs a positive 'count'")
        return self

    def limit(self) -> float:
        if self.kind == "count":
            return float(self.count)
        if self.seconds is not None:
            if self.seconds <= 0:
                raise ValueError("budget seconds must be positive")
            return float(self.seconds)
        hours = 50.0 if self.hours is None else self.hours
        if hours <= 0:
            raise ValueError("budget hours must be positive")
        return hours * 3600.0


class SelectionConfig(StrictModel):
    weights: str = "6:3:1"
    clusters: int = Field(default=1000, ge=1)
    per_cluster_take: int = Field(default=200, ge=1)
    cluster_pool_cap: int = Field(default=60_000, ge=1)
    budget: BudgetConfig = Field(default_factory=BudgetConfig)
    speaking_rate_wpm: float = Field(default=160.0, gt=0)
    renormalize_every: int = Field(default=1, ge=1)
    kmeans_max_iters: int = Field(default=100, ge=1)
    kmeans_metric: str = "sq_euclidean"


class LMConfig(StrictModel):
    order: int = Field(default=3, ge=1)
    k: float = Field(default=0.1, gt=0)
    train_path: str | None = None
    endpoint: str | None = None


class EmbeddingConfig(StrictModel):
    endpoint: str | None = None
    mock_dim: int = Field(default=16, ge=2)


class RespellConfig(StrictModel):
    ratio: float = Field(default=0.6, ge=0.0, le=1.0)


class TTSConfig(StrictModel):
    endpoint: str | None = None
    command: str | None = None
    speakers: list[str] = Field(default_factory=lambda: [f"speaker{i:02d}" for i in range(19)])
    sample_rate: int = Field(default=16000, ge=1)


class TermsExtractionConfig(StrictModel):
    min_frequency: int = Field(default=2, ge=1)


class EvaluationConfig(StrictModel):
    insertion_attribution: str = "hypothesis"
    emit_alignments: bool = False


class MetricsConfig(StrictModel):
    mattr_window: int = Field(default=50, ge=1)
    distinct_orders: list[int] = Field(default_factory=lambda: [2])


class PipelineConfig(StrictModel):
    paths: PathsConfig = Field(default_factory=PathsConfig)
    generation: GenerationConfig = Field(default_factory=GenerationConfig)
    length_constraints: dict[str, LengthConstraintConfig] = Field(
        default_factory=_default_length_constraints
    )
    selection: SelectionConfig = Field(default_factory=SelectionConfig)
    lm: LMConfig = Field(default_factory=LMConfig)
    embedding: EmbeddingConfig = Field(default_factory=EmbeddingConfig)
    respell: RespellConfig = Field(default_factory=RespellConfig)
    tts: TTSConfig = Field(default_factory=TTSConfig)
    terms: TermsExtractionConfig = Field(default_factory=TermsExtractionConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)
    seed: int = 0

    def resolve(self, name: str, base: Path) -> Path | None:
        """Resolve a paths-section entry relative to the config file."""
        value = getattr(self.paths, name)
        if value is None:
            return None
        path = Path(value)
        return path if path.is_absolute() else base / path


_ENV_PATTERN = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


def _interpolate(node, path: str):
    if isinstance(node, str):
        def sub(match):
            name = match.group(1)
            if name not in os.environ:
                raise ConfigError(f"{path}: environment variable {name} is not set")
            return os.environ[name]
        return _ENV_PATTERN.sub(sub, node)
    if isinstance(node, dict):
        return {k: _interpolate(v, f"{path}.{k}" if path else str(k)) for k, v in node.items()}
    if isinstance(node, list):
        return [_interpolate(v, f"{path}.{i}") for i, v in enumerate(node)]
    return node


def _format_validation_error(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"])
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def load_config(path: str | Path, seed_override: int | None = None) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    raw = _interpolate(raw, "")
    try:
        cfg = PipelineConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(_format_validation_error(exc)) from exc
    if seed_override is not None:
        cfg = cfg.model_copy(update={"seed": seed_override})
    return cfg


def config_hash(cfg: PipelineConfig) -> str:
    """sha256 over the canonical JSON of the effective configuration;
    changes iff any effective parameter changes."""
    blob = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
