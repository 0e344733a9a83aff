"""Perplexity scoring: a deterministic add-k n-gram model for offline use
plus an adapter for remote scoring endpoints.

Both backends satisfy the same contract: ``score(sentence)`` returns
per-token natural-log probabilities and the sentence perplexity
``exp(-mean(logprobs))``, with every probability in (0, 1].
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import httpx

from .corpus import Corpus, Sentence, Token
from .errors import ScoringError, TransportError
from .transport import post_json

BOS = "<s>"
UNK = "<unk>"

_FORMAT_VERSION = 1


@dataclass(frozen=True)
class SentenceScore:
    token_logprobs: tuple[float, ...]
    perplexity: float


class PerplexityScorer(Protocol):
    def score(self, sentence: Sentence) -> SentenceScore: ...


def perplexity_from_logprobs(logprobs: Sequence[float]) -> float:
    """exp of the negative mean log-probability per token."""
    if not logprobs:
        raise ValueError("cannot compute perplexity of an empty token sequence")
    return math.exp(-math.fsum(logprobs) / len(logprobs))


class NGramLM:
    """Add-k smoothed n-gram language model over word tokens.

    Unknown tokens map to UNK; contexts are padded with begin-of-sentence
    markers. For every context the smoothed distribution over vocab + UNK
    sums to one.
    """

    def __init__(self, order: int, k: float, vocab: frozenset[Token],
                 counts: dict[tuple[Token, ...], dict[Token, int]]):
        if order < 1:
            raise ValueError("order must be >= 1")
        if k <= 0:
            raise ValueError("smoothing constant k must be > 0")
        self.order = order
        self.k = k
        self.vocab = frozenset(vocab) | {UNK}
        self.counts = counts
        self._context_totals = {ctx: sum(c.values()) for ctx, c in counts.items()}

    def _map_token(self, token: Token) -> Token:
        return token if token in self.vocab else UNK

    def prob(self, context: tuple[Token, ...], token: Token) -> float:
        token = self._map_token(token)
        context = tuple(t if t == BOS else self._map_token(t) for t in context)
        ctx_counts = self.counts.get(context)
        seen = ctx_counts.get(token, 0) if ctx_counts else 0
        total = self._context_totals.get(context, 0)
        return (seen + self.k) / (total + self.k * len(self.vocab))

    def score(self, sentence: Sentence) -> SentenceScore:
        if not sentence.tokens:
            raise ScoringError("empty sentence", sentence.id)
        padded = (BOS,) * (self.order - 1) + sentence.tokens
        logprobs = tuple(
            math.log(self.prob(padded[i:i + self.order - 1], token))
            for i, token in enumerate(sentence.tokens)
        )
        return SentenceScore(logprobs, perplexity_from_logprobs(logprobs))

    def save(self, path: str | Path) -> None:
        payload = {
            "format_version": _FORMAT_VERSION,
            "order": self.order,
            "k": self.k,
            "vocab": sorted(self.vocab),
            "counts": [
                [list(ctx), sorted(tok_counts.items())]
                for ctx, tok_counts in sorted(self.counts.items())
            ],
        }
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False)

    @classmethod
    def load(cls, path: str | Path) -> "NGramLM":
        with Path(path).open("r", encoding="utf-8") as fh:
            payload = json.load(fh)
        version = payload.get("format_version")
        if version != _FORMAT_VERSION:
            raise ValueError(f"unsupported model file version {version!r}")
        counts = {
            tuple(ctx): dict(tok_counts) for ctx, tok_counts in payload["counts"]
        }
        return cls(payload["order"], payload["k"], frozenset(payload["vocab"]), counts)


def train_ngram(corpus: Corpus, order: int = 3, k: float = 0.1) -> NGramLM:
    """Count all order-length windows (with BOS padding) over the corpus."""
    if len(corpus) == 0:
        raise ValueError("cannot train a language model on an empty corpus")
    counts: dict[tuple[Token, ...], dict[Token, int]] = {}
    vocab: set[Token] = set()
    for sentence in corpus:
        vocab.update(sentence.tokens)
        padded = (BOS,) * (order - 1) + sentence.tokens
        for i, token in enumerate(sentence.tokens):
            context = padded[i:i + order - 1]
            slot = counts.setdefault(context, {})
            slot[token] = slot.get(token, 0) + 1
    return NGramLM(order, k, frozenset(vocab), counts)


def sentence_perplexity(scorer: PerplexityScorer, sentence: Sentence) -> float:
    """The scorer's sentence perplexity: exp(-(1/n) * sum of per-token log
    probabilities), with n the scorer's own token count for the sentence.
    Every scorer maintains that identity as an interface invariant."""
    return scorer.score(sentence).perplexity


class RemoteScorer:
    """Adapter for an HTTP scoring endpoint.

    Wire format: request ``{"sentences": [raw_text, ...]}``, response
    ``{"scores": [{"perplexity": float, "token_logprobs": [float]}]}``.
    Batches run with a bounded number of concurrent requests and are
    reassembled in request order.
    """

    def __init__(self, endpoint: str, *, batch_size: int = 32, max_in_flight: int = 4,
                 timeout: float = 30.0, client: httpx.Client | None = None):
        self.endpoint = endpoint
        self.batch_size = batch_size
        self.max_in_flight = max_in_flight
        self.timeout = timeout
        self._client = client

    def _score_batch(self, texts: list[str]) -> list[SentenceScore]:
        response = post_json(self.endpoint, {"sentences": texts},
                             client=self._client, timeout=self.timeout)
        scores = response.get("scores")
        if not isinstance(scores, list) or len(scores) != len(texts):
            raise TransportError(
                f"scorer returned {0 if not isinstance(scores, list) else len(scores)} "
                f"scores for {len(texts)} sentences"
            )
        out = []
        for entry in scores:
            logprobs = tuple(float(x) for x in entry["token_logprobs"])
            if any(lp > 0.0 for lp in logprobs):
                raise TransportError("scorer returned a probability above 1")
            perplexity = float(entry["perplexity"])
            if logprobs and not math.isclose(
                perplexity, perplexity_from_logprobs(logprobs), rel_tol=1e-6
            ):
                raise TransportError(
                    "scorer perplexity is inconsistent with its token logprobs"
                )
            out.append(SentenceScore(logprobs, perplexity))
        return out

    def score(self, sentence: Sentence) -> SentenceScore:
        return self._score_batch([sentence.raw_text])[0]

    def score_corpus(self, sentences: Sequence[Sentence]) -> list[SentenceScore]:
        batches = [
            [s.raw_text for s in sentences[i:i + self.batch_size]]
            for i in range(0, len(sentences), self.batch_size)
        ]
        if not batches:
            return []
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            results = list(pool.map(self._score_batch, batches))
        return [score for batch in results for score in batch]
