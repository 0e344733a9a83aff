"""Corpus-quality metrics: moving-average TTR, distinct n-grams, mean
perplexity, and average domain-term frequency.

Degenerate inputs raise :class:`UndefinedMetricError` rather than returning
NaN.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus, DomainTermSet, Token
from .errors import ScoringError, UndefinedMetricError
from .perplexity import PerplexityScorer, sentence_perplexity

DEFAULT_MATTR_WINDOW = 50


def mattr(tokens: list[Token] | tuple[Token, ...], window: int = DEFAULT_MATTR_WINDOW) -> float:
    """Mean type-token ratio over every contiguous window of ``window``
    tokens; plain TTR when the sequence is shorter than the window."""
    if window < 1:
        raise ValueError("window must be >= 1")
    n = len(tokens)
    if n == 0:
        raise UndefinedMetricError("MATTR is undefined for an empty token list")
    if n < window:
        return len(set(tokens)) / n
    counts: Counter[Token] = Counter(tokens[:window])
    total = 0.0
    n_windows = n - window + 1
    total += len(counts) / window
    for i in range(window, n):
        leaving = tokens[i - window]
        counts[leaving] -= 1
        if counts[leaving] == 0:
            del counts[leaving]
        counts[tokens[i]] += 1
        total += len(counts) / window
    return total / n_windows


def distinct_n(corpus: Corpus, n: int = 2) -> float:
    """Unique n-grams divided by total n-gram instances, corpus-level.

    N-grams never cross sentence boundaries; sentences shorter than ``n``
    contribute nothing.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    seen: set[tuple[Token, ...]] = set()
    total = 0
    for sentence in corpus:
        tokens = sentence.tokens
        for i in range(len(tokens) - n + 1):
            seen.add(tokens[i:i + n])
            total += 1
    if total == 0:
        raise UndefinedMetricError(f"corpus has no {n}-gram instances")
    return len(seen) / total


def mean_perplexity(corpus: Corpus, scorer: PerplexityScorer) -> float:
    """Arithmetic mean of per-sentence perplexities."""
    if len(corpus) == 0:
        raise UndefinedMetricError("mean perplexity is undefined for an empty corpus")
    values = []
    for sentence in corpus:
        try:
            values.append(sentence_perplexity(scorer, sentence))
        except ScoringError:
            raise
        except Exception as exc:
            raise ScoringError(str(exc), sentence.id) from exc
    return sum(values) / len(values)


def avg_term_frequency(corpus: Corpus, d: DomainTermSet) -> float:
    """Total occurrences of all domain terms in the corpus divided by the
    number of terms."""
    if len(d) == 0:
        raise UndefinedMetricError("average term frequency is undefined for an empty term set")
    occurrences = sum(1 for token in corpus.all_tokens() if token in d)
    return occurrences / len(d)


@dataclass(frozen=True)
class MetricsReport:
    mattr: float
    distinct_n: dict[int, float]
    mean_perplexity: float
    avg_term_frequency: float
    mattr_window: int = DEFAULT_MATTR_WINDOW

    def to_dict(self) -> dict:
        record: dict = {"mattr": self.mattr}
        for n, value in sorted(self.distinct_n.items()):
            record[f"distinct{n}"] = value
        record["perplexity"] = self.mean_perplexity
        record["avg_term"] = self.avg_term_frequency
        record["mattr_window"] = self.mattr_window
        return record

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=False)
            fh.write("\n")


def compute_report(
    corpus: Corpus,
    scorer: PerplexityScorer,
    terms: DomainTermSet,
    *,
    mattr_window: int = DEFAULT_MATTR_WINDOW,
    ngram_orders: tuple[int, ...] = (2,),
) -> MetricsReport:
    """Corpus-level report: MATTR over the concatenation of all sentences in
    corpus order, corpus-level distinct-n, mean perplexity, average term
    frequency."""
    all_tokens = list(corpus.all_tokens())
    return MetricsReport(
        mattr=mattr(all_tokens, mattr_window),
        distinct_n={n: distinct_n(corpus, n) for n in ngram_orders},
        mean_perplexity=mean_perplexity(corpus, scorer),
        avg_term_frequency=avg_term_frequency(corpus, terms),
        mattr_window=mattr_window,
    )
