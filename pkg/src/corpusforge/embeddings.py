"""Sentence-embedding adapters with a content-addressed cache.

Backends implement ``embed_texts`` and expose a ``namespace`` used in cache
keys. The hash backend is a deterministic offline stand-in for a real
embedding service.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Protocol, Sequence

import httpx
import numpy as np

from .corpus import Corpus
from .errors import DimensionMismatchError, TransportError
from .transport import DiskCache, post_json, stable_hash


class EmbeddingBackend(Protocol):
    namespace: str

    def embed_texts(self, texts: Sequence[str]) -> list[list[float]]: ...


@dataclass(frozen=True)
class EmbeddingMatrix:
    """One fixed-dimension vector per sentence id, in corpus order."""

    ids: tuple[str, ...]
    vectors: np.ndarray

    def __post_init__(self):
        if self.vectors.ndim != 2 or len(self.ids) != self.vectors.shape[0]:
            raise DimensionMismatchError(
                f"expected ({len(self.ids)}, dim) matrix, got shape {self.vectors.shape}"
            )

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.ids)


class HashEmbeddingBackend:
    """Deterministic mock: each text maps to a pseudo-random unit-scale
    vector seeded by its content hash. Stable across runs and machines."""

    def __init__(self, dim: int = 16):
        self.dim = dim
        self.namespace = f"hash-{dim}"

    def embed_texts(self, texts: Sequence[str]) -> list[list[float]]:
        out = []
        for text in texts:
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            seed = int.from_bytes(digest[:8], "big")
            rng = np.random.default_rng(seed)
            out.append(rng.standard_normal(self.dim).tolist())
        return out


class RemoteEmbeddingBackend:
    """HTTP adapter; wire format: ``{"texts": [...]}`` in,
    ``{"vectors": [[...]]}`` out."""

    def __init__(self, endpoint: str, *, timeout: float = 30.0,
                 client: httpx.Client | None = None):
        self.endpoint = endpoint
        self.timeout = timeout
        self.namespace = f"remote:{endpoint}"
        self._client = client

    def embed_texts(self, texts: Sequence[str]) -> list[list[float]]:
        response = post_json(self.endpoint, {"texts": list(texts)},
                             client=self._client, timeout=self.timeout)
        vectors = response.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise TransportError(
                f"embedding backend returned {0 if not isinstance(vectors, list) else len(vectors)} "
                f"vectors for {len(texts)} texts"
            )
        return vectors


def embed(
    corpus: Corpus,
    backend: EmbeddingBackend,
    cache: DiskCache | None = None,
    batch_size: int = 64,
) -> EmbeddingMatrix:
    """Embed every sentence, one vector per id. Results are cached by
    content hash so reruns issue no backend calls.

    Raises :class:`TransportError` listing the sentence ids that failed, and
    :class:`DimensionMismatchError` when vectors disagree on dimension.
    """
    ids: list[str] = []
    texts: list[str] = []
    keys: list[str] = []
    rows: list[list[float] | None] = []
    for sentence in corpus:
        ids.append(sentence.id)
        texts.append(sentence.raw_text)
        key = stable_hash({"ns": backend.namespace, "text": sentence.raw_text})
        keys.append(key)
        rows.append(cache.get(key) if cache is not None else None)

    missing = [i for i, row in enumerate(rows) if row is None]
    failed_ids: list[str] = []
    for start in range(0, len(missing), batch_size):
        batch = missing[start:start + batch_size]
        try:
            vectors = backend.embed_texts([texts[i] for i in batch])
        except TransportError:
            failed_ids.extend(ids[i] for i in batch)
            continue
        for i, vector in zip(batch, vectors):
            rows[i] = [float(x) for x in vector]
            if cache is not None:
                cache.put(keys[i], rows[i])
    if failed_ids:
        raise TransportError(f"embedding failed for ids: {failed_ids}")

    dims = {len(row) for row in rows if row is not None}
    if len(dims) > 1:
        raise DimensionMismatchError(f"backend returned mixed dimensions {sorted(dims)}")
    matrix = np.asarray(rows, dtype=np.float64)
    return EmbeddingMatrix(tuple(ids), matrix)
