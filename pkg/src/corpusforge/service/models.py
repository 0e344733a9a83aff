"""Request/response models for the service API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class CommandRequest(BaseModel):
    config_path: str
    seed: int | None = None
    mock_backends: bool = False


class MetricsRequest(CommandRequest):
    corpus: str | None = None


class EvaluateRequest(CommandRequest):
    reference: str | None = None
    hypothesis: str | None = None


class CommandResponse(BaseModel):
    command: str
    config_hash: str
    seed: int
    artifacts: dict[str, str] = Field(default_factory=dict)
    stats: dict = Field(default_factory=dict)
    warnings: list[dict] = Field(default_factory=list)


class HealthResponse(BaseModel):
    status: str
    version: str


class ChatMessage(BaseModel):
    role: str
    content: str


class CompletionRequest(BaseModel):
    model: str
    messages: list[ChatMessage]
    temperature: float = 1.0
    top_p: float = 1.0


class CompletionResponse(BaseModel):
    text: str


class EmbeddingRequest(BaseModel):
    texts: list[str]


class EmbeddingResponse(BaseModel):
    vectors: list[list[float]]


class ScoreRequest(BaseModel):
    sentences: list[str]


class SentenceScoreModel(BaseModel):
    perplexity: float
    token_logprobs: list[float]


class ScoreResponse(BaseModel):
    scores: list[SentenceScoreModel]


class TTSRequest(BaseModel):
    text: str
    speaker: str = "speaker00"
