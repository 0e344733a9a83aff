"""FastAPI service wrapping the pipeline stages, plus deterministic mock
model endpoints (completion, embeddings, LM scoring, TTS) that speak the
same wire formats the adapters consume. The CLI drives this app either
in-process or over the network."""

from __future__ import annotations

import hashlib
import math
from pathlib import Path
from typing import Callable

from fastapi import FastAPI, HTTPException, Response

from .. import __version__
from ..audio import MockTTS
from ..config import load_config
from ..embeddings import HashEmbeddingBackend
from ..errors import (
    ConfigError, CorpusForgeError, MalformedRecordError, MissingPrerequisiteError,
    TransportError, UndefinedMetricError,
)
from ..llm import MockLLM, ModelConfig
from ..stages import (
    StageContext, StageResult, stage_evaluate, stage_extract_terms, stage_filter,
    stage_generate, stage_metrics, stage_respell, stage_synthesize,
)
from ..wer import PairingError
from .models import (
    CommandRequest, CommandResponse, CompletionRequest, CompletionResponse,
    EmbeddingRequest, EmbeddingResponse, EvaluateRequest, HealthResponse,
    MetricsRequest, ScoreRequest, ScoreResponse, SentenceScoreModel, TTSRequest,
)


def _context(request: CommandRequest) -> StageContext:
    config_path = Path(request.config_path)
    cfg = load_config(config_path, seed_override=request.seed)
    return StageContext(cfg, config_path, request.mock_backends)


def _to_response(result: StageResult) -> CommandResponse:
    return CommandResponse(
        command=result.command,
        config_hash=result.config_hash,
        seed=result.seed,
        artifacts=result.artifacts,
        stats=result.stats,
        warnings=result.warnings,
    )


def _run(fn: Callable[[], StageResult]) -> CommandResponse:
    try:
        return _to_response(fn())
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except MissingPrerequisiteError as exc:
        raise HTTPException(status_code=409, detail=str(exc))
    except FileNotFoundError as exc:
        raise HTTPException(status_code=404, detail=str(exc))
    except TransportError as exc:
        raise HTTPException(status_code=502, detail=str(exc))
    except (MalformedRecordError, UndefinedMetricError, PairingError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    except CorpusForgeError as exc:
        raise HTTPException(status_code=500, detail=str(exc))


def _mock_token_logprob(context: str, token: str) -> float:
    digest = hashlib.sha256(f"{context}\x1f{token}".encode("utf-8")).digest()
    step = int.from_bytes(digest[:4], "big") % 4000
    return -(1.0 + step / 1000.0)


def create_app(mock_seed: int = 0, mock_dim: int = 16) -> FastAPI:
    app = FastAPI(title="corpusforge", version=__version__)
    mock_llm = MockLLM(seed=mock_seed)
    mock_embeddings = HashEmbeddingBackend(dim=mock_dim)
    mock_tts = MockTTS()

    @app.get("/v1/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/v1/commands/extract-terms", response_model=CommandResponse)
    def extract_terms(request: CommandRequest) -> CommandResponse:
        return _run(lambda: stage_extract_terms(_context(request)))

    @app.post("/v1/commands/generate", response_model=CommandResponse)
    def generate(request: CommandRequest) -> CommandResponse:
        return _run(lambda: stage_generate(_context(request)))

    @app.post("/v1/commands/filter", response_model=CommandResponse)
    def filter_command(request: CommandRequest) -> CommandResponse:
        return _run(lambda: stage_filter(_context(request)))

    @app.post("/v1/commands/respell", response_model=CommandResponse)
    def respell_command(request: CommandRequest) -> CommandResponse:
        return _run(lambda: stage_respell(_context(request)))

    @app.post("/v1/commands/synthesize", response_model=CommandResponse)
    def synthesize_command(request: CommandRequest) -> CommandResponse:
        return _run(lambda: stage_synthesize(_context(request)))

    @app.post("/v1/commands/metrics", response_model=CommandResponse)
    def metrics_command(request: MetricsRequest) -> CommandResponse:
        return _run(lambda: stage_metrics(_context(request), corpus_path=request.corpus))

    @app.post("/v1/commands/evaluate", response_model=CommandResponse)
    def evaluate_command(request: EvaluateRequest) -> CommandResponse:
        return _run(lambda: stage_evaluate(
            _context(request), reference=request.reference, hypothesis=request.hypothesis,
        ))

    # Deterministic mock model services speaking the adapter wire formats.

    @app.post("/v1/mock/llm", response_model=CompletionResponse)
    def mock_completion(request: CompletionRequest) -> CompletionResponse:
        prompt = "\n".join(m.content for m in request.messages if m.role == "user")
        model = ModelConfig(id=request.model, temperature=request.temperature,
                            top_p=request.top_p)
        try:
            return CompletionResponse(text=mock_llm.complete(prompt, model))
        except CorpusForgeError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/v1/mock/embeddings", response_model=EmbeddingResponse)
    def mock_embed(request: EmbeddingRequest) -> EmbeddingResponse:
        return EmbeddingResponse(vectors=mock_embeddings.embed_texts(request.texts))

    @app.post("/v1/mock/lm-score", response_model=ScoreResponse)
    def mock_lm_score(request: ScoreRequest) -> ScoreResponse:
        scores = []
        for sentence in request.sentences:
            tokens = sentence.split() or [""]
            logprobs = []
            context = ""
            for token in tokens:
                logprobs.append(_mock_token_logprob(context, token))
                context = f"{context} {token}".strip()
            perplexity = math.exp(-sum(logprobs) / len(logprobs))
            scores.append(SentenceScoreModel(perplexity=perplexity, token_logprobs=logprobs))
        return ScoreResponse(scores=scores)

    @app.post("/v1/mock/tts")
    def mock_tts_endpoint(request: TTSRequest) -> Response:
        wav = mock_tts.synthesize(request.text, request.speaker)
        return Response(content=wav, media_type="audio/wav")

    return app
