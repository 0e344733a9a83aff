import httpx
import numpy as np
import pytest

from corpusforge.embeddings import (
    EmbeddingMatrix, HashEmbeddingBackend, RemoteEmbeddingBackend, embed,
)
from corpusforge.errors import DimensionMismatchError, TransportError
from corpusforge.transport import DiskCache

from conftest import make_corpus


class CountingBackend:
    def __init__(self, dim=4):
        self.inner = HashEmbeddingBackend(dim)
        self.namespace = self.inner.namespace
        self.calls = 0

    def embed_texts(self, texts):
        self.calls += 1
        return self.inner.embed_texts(texts)


def test_mock_backend_deterministic():
    backend = HashEmbeddingBackend(dim=8)
    corpus = make_corpus(["alpha bravo", "charlie delta"])
    first = embed(corpus, backend)
    second = embed(corpus, backend)
    assert np.array_equal(first.vectors, second.vectors)
    assert first.ids == second.ids


def test_matrix_shape():
    backend = HashEmbeddingBackend(dim=8)
    corpus = make_corpus([f"sentence number {i} here" for i in range(10)])
    matrix = embed(corpus, backend)
    assert matrix.vectors.shape == (10, 8)
    assert matrix.dim == 8


def test_cache_hit_issues_no_backend_calls(tmp_path):
    backend = CountingBackend()
    cache = DiskCache(tmp_path, "embeddings")
    corpus = make_corpus(["one two", "three four", "five six"])
    first = embed(corpus, backend, cache=cache)
    calls_after_first = backend.calls
    assert calls_after_first >= 1
    second = embed(corpus, backend, cache=cache)
    assert backend.calls == calls_after_first
    assert np.array_equal(first.vectors, second.vectors)


def test_transport_failure_lists_failed_ids(tmp_path):
    class FailingBackend:
        namespace = "failing"

        def embed_texts(self, texts):
            raise TransportError("backend down")

    corpus = make_corpus(["first text", "second text"])
    with pytest.raises(TransportError) as err:
        embed(corpus, FailingBackend())
    assert "0" in str(err.value) and "1" in str(err.value)


def test_dimension_mismatch_detected():
    class RaggedBackend:
        namespace = "ragged"

        def embed_texts(self, texts):
            return [[0.0] * (2 + i) for i, _ in enumerate(texts)]

    corpus = make_corpus(["first text", "second text"])
    with pytest.raises(DimensionMismatchError):
        embed(corpus, RaggedBackend())


def test_matrix_validates_row_count():
    with pytest.raises(DimensionMismatchError):
        EmbeddingMatrix(("a", "b"), np.zeros((3, 4)))


def test_remote_backend_wire_format():
    seen = {}

    def handler(request):
        import json
        seen.update(json.loads(request.content))
        return httpx.Response(200, json={"vectors": [[1.0, 2.0]] * len(seen["texts"])})

    client = httpx.Client(transport=httpx.MockTransport(handler))
    backend = RemoteEmbeddingBackend("http://embed.test/v1", client=client)
    vectors = backend.embed_texts(["hello there"])
    assert seen == {"texts": ["hello there"]}
    assert vectors == [[1.0, 2.0]]
