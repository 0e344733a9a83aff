import math
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from corpusforge.embeddings import RemoteEmbeddingBackend
from corpusforge.llm import HTTPLLMClient, ModelConfig
from corpusforge.perplexity import RemoteScorer, perplexity_from_logprobs
from corpusforge.audio import HTTPTTS, read_wav_duration
from corpusforge.service.app import create_app

from conftest import make_sentence
from pipeline_helpers import write_fixture


@pytest.fixture
def client():
    return TestClient(create_app())


def _request(config_path, **extra):
    payload = {"config_path": str(config_path), "mock_backends": True}
    payload.update(extra)
    return payload


class TestHealthAndErrors:
    def test_health(self, client):
        body = client.get("/v1/health").json()
        assert body["status"] == "ok"

    def test_bad_config_path_is_422(self, client, tmp_path):
        response = client.post("/v1/commands/generate",
                               json=_request(tmp_path / "absent.yaml"))
        assert response.status_code == 422
        assert "config" in response.json()["detail"]

    def test_missing_prerequisite_is_409(self, client, tmp_path):
        config_path = write_fixture(tmp_path)
        response = client.post("/v1/commands/filter", json=_request(config_path))
        assert response.status_code == 409
        assert "generate" in response.json()["detail"]

    def test_config_field_error_is_422(self, client, tmp_path):
        config_path = write_fixture(tmp_path, paths={"eval_transcripts": None})
        response = client.post("/v1/commands/extract-terms", json=_request(config_path))
        assert response.status_code == 422
        assert "paths.eval_transcripts" in response.json()["detail"]

    def test_unreachable_backend_is_502(self, client, tmp_path):
        config_path = write_fixture(tmp_path, generation={
            "models": [{"id": "real", "endpoint": "http://127.0.0.1:9/llm"}],
        })
        payload = {"config_path": str(config_path), "mock_backends": False}
        response = client.post("/v1/commands/generate", json=payload)
        assert response.status_code == 502


class TestCommands:
    def test_extract_terms_response_shape(self, client, tmp_path):
        config_path = write_fixture(tmp_path)
        response = client.post("/v1/commands/extract-terms", json=_request(config_path))
        assert response.status_code == 200
        body = response.json()
        assert body["command"] == "extract-terms"
        assert Path(body["artifacts"]["terms"]).exists()
        assert body["stats"]["n_terms"] == 4
        assert body["config_hash"]

    def test_generate_then_filter_then_metrics(self, client, tmp_path):
        config_path = write_fixture(tmp_path, selection={
            "budget": {"kind": "count", "count": 8},
        })
        assert client.post("/v1/commands/generate",
                           json=_request(config_path)).status_code == 200
        filter_body = client.post("/v1/commands/filter",
                                  json=_request(config_path)).json()
        assert filter_body["stats"]["n_selected"] == 8
        metrics_body = client.post("/v1/commands/metrics",
                                   json=_request(config_path)).json()
        assert 0.0 <= metrics_body["stats"]["mattr"] <= 1.0

    def test_evaluate_with_explicit_paths(self, client, tmp_path):
        config_path = write_fixture(tmp_path)
        data = tmp_path / "data"
        response = client.post("/v1/commands/evaluate", json=_request(
            config_path,
            reference=str(data / "ref.jsonl"),
            hypothesis=str(data / "hyp.jsonl"),
        ))
        assert response.status_code == 200
        assert response.json()["stats"]["wer"] == pytest.approx(2 / 7)

    def test_seed_override_changes_hash(self, client, tmp_path):
        config_path = write_fixture(tmp_path)
        a = client.post("/v1/commands/extract-terms", json=_request(config_path)).json()
        b = client.post("/v1/commands/extract-terms",
                        json=_request(config_path, seed=9)).json()
        assert a["config_hash"] != b["config_hash"]
        assert b["seed"] == 9


class TestMockModelEndpoints:
    def test_completion_wire_format(self, client):
        response = client.post("/v1/mock/llm", json={
            "model": "mock-alpha",
            "messages": [{"role": "user", "content":
                          "Translate the following utterance into English. x\n"
                          "Text: bonjour tower\nReturn only the translation."}],
            "temperature": 1.0,
            "top_p": 1.0,
        })
        assert response.status_code == 200
        assert response.json() == {"text": "bonjour tower"}

    def test_embeddings_wire_format(self, client):
        response = client.post("/v1/mock/embeddings",
                               json={"texts": ["alpha", "bravo"]})
        vectors = response.json()["vectors"]
        assert len(vectors) == 2
        assert len(vectors[0]) == 16
        again = client.post("/v1/mock/embeddings", json={"texts": ["alpha"]})
        assert again.json()["vectors"][0] == vectors[0]

    def test_lm_score_consistency(self, client):
        response = client.post("/v1/mock/lm-score",
                               json={"sentences": ["hold short of runway"]})
        score = response.json()["scores"][0]
        assert len(score["token_logprobs"]) == 4
        assert all(lp <= 0 for lp in score["token_logprobs"])
        assert score["perplexity"] == pytest.approx(
            math.exp(-sum(score["token_logprobs"]) / 4))

    def test_tts_returns_wav(self, client, tmp_path):
        response = client.post("/v1/mock/tts",
                               json={"text": "one two three four", "speaker": "s1"})
        assert response.headers["content-type"] == "audio/wav"
        path = tmp_path / "out.wav"
        path.write_bytes(response.content)
        assert read_wav_duration(path) == 1.5


class TestAdaptersAgainstService:
    """The production HTTP adapters speak to the service's mock endpoints."""

    def test_remote_scorer_contract(self, client):
        scorer = RemoteScorer("http://testserver/v1/mock/lm-score", client=client)
        sentence = make_sentence("s", "cleared to land")
        result = scorer.score(sentence)
        assert result.perplexity == pytest.approx(
            perplexity_from_logprobs(result.token_logprobs))
        assert scorer.score(sentence) == result

    def test_remote_embedding_backend(self, client):
        backend = RemoteEmbeddingBackend("http://testserver/v1/mock/embeddings",
                                         client=client)
        vectors = backend.embed_texts(["one text", "two text"])
        assert len(vectors) == 2 and len(vectors[0]) == 16

    def test_http_llm_client(self, client):
        llm = HTTPLLMClient(client=client)
        model = ModelConfig(id="m", endpoint="http://testserver/v1/mock/llm")
        text = llm.complete(
            "Rewrite the following utterance 2 different ways, keeping its meaning "
            "and any domain terms intact.\nUtterance: hold position now.\n"
            "Return one paraphrase per line, numbered.", model)
        assert text.strip()

    def test_http_tts_adapter(self, client, tmp_path):
        tts = HTTPTTS("http://testserver/v1/mock/tts", client=client)
        wav = tts.synthesize("five words spoken right here", "spk01")
        path = tmp_path / "a.wav"
        path.write_bytes(wav)
        assert read_wav_duration(path) > 0
