"""Tri-objective sentence selection.

Each candidate is scored as a weighted sum of three per-pool min-max
normalized features: new-vocabulary gain (unique unseen words per word,
state-dependent), perplexity, and domain-term density. Selection is a
sequential greedy over the shrinking pool, renormalizing at every step; the
multilevel variant clusters first, selects representatives per cluster,
ranks clusters, and finishes with a global greedy under the real budget.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .clustering import Clustering
from .corpus import Corpus, DomainTermSet, Sentence, Token, count_domain_terms
from .errors import DurationLookupError
from .perplexity import PerplexityScorer, sentence_perplexity


@dataclass(frozen=True)
class Weights:
    """Non-negative weighting coefficients, not all zero. Scaling all three
    by a positive constant never changes the selected sequence."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("weights must be non-negative")
        if self.alpha == self.beta == self.gamma == 0:
            raise ValueError("at least one weight must be positive")

    @classmethod
    def parse(cls, ratio: str) -> "Weights":
        """Parse a ratio string like "6:3:1"."""
        parts = ratio.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected three colon-separated weights, got {ratio!r}")
        return cls(*(float(p) for p in parts))


DEFAULT_WEIGHTS = Weights(6.0, 3.0, 1.0)


@dataclass(frozen=True)
class DurationModel:
    """How long a sentence takes to speak: words-per-minute heuristic, or a
    lookup of measured audio durations."""

    kind: str = "heuristic"
    wpm: float = 160.0
    measured: Mapping[str, float] | None = None

    def __post_init__(self):
        if self.kind not in ("heuristic", "measured"):
            raise ValueError(f"unknown duration model kind {self.kind!r}")
        if self.kind == "heuristic" and self.wpm <= 0:
            raise ValueError("words-per-minute must be positive")


def estimate_duration(s: Sentence, model: DurationModel) -> float:
    """Spoken-duration estimate in seconds."""
    if model.kind == "heuristic":
        return len(s.tokens) * 60.0 / model.wpm
    if model.measured is None or s.id not in model.measured:
        raise DurationLookupError(f"no measured duration for sentence {s.id!r}")
    return float(model.measured[s.id])


@dataclass(frozen=True)
class Budget:
    """Selection stop condition: total seconds of speech or sentence count."""

    kind: str
    limit: float
    duration_model: DurationModel = field(default_factory=DurationModel)

    def __post_init__(self):
        if self.kind not in ("duration", "count"):
            raise ValueError(f"unknown budget kind {self.kind!r}")
        if self.limit <= 0:
            raise ValueError("budget limit must be positive")


@dataclass(frozen=True)
class CandidateFeatures:
    """State-independent per-sentence features, computed once per pool."""

    perplexity: float
    term_density: float
    duration_s: float = 0.0


def compute_features(
    pool: Iterable[Sentence],
    scorer: PerplexityScorer,
    terms: DomainTermSet,
    duration_model: DurationModel | None = None,
) -> dict[str, CandidateFeatures]:
    model = duration_model or DurationModel()
    out: dict[str, CandidateFeatures] = {}
    for s in pool:
        out[s.id] = CandidateFeatures(
            perplexity=sentence_perplexity(scorer, s),
            term_density=count_domain_terms(s, terms) / len(s.tokens),
            duration_s=estimate_duration(s, model),
        )
    return out


@dataclass(frozen=True)
class RawFeatures:
    new_vocab_gain: float
    perplexity: float
    term_density: float


@dataclass(frozen=True)
class PoolBounds:
    """Per-feature (min, max) over the current candidate pool."""

    new_vocab_gain: tuple[float, float]
    perplexity: tuple[float, float]
    term_density: tuple[float, float]

    @classmethod
    def over(cls, candidates: Sequence[RawFeatures]) -> "PoolBounds":
        if not candidates:
            raise ValueError("cannot compute bounds over an empty pool")
        nvg = [c.new_vocab_gain for c in candidates]
        ppl = [c.perplexity for c in candidates]
        td = [c.term_density for c in candidates]
        return cls((min(nvg), max(nvg)), (min(ppl), max(ppl)), (min(td), max(td)))


def _norm(x: float, lo: float, hi: float) -> float:
    # A degenerate column (max == min) is non-discriminative; any constant
    # preserves the argmax, so it maps to 0.
    if hi == lo:
        return 0.0
    return (x - lo) / (hi - lo)


def score_features(raw: RawFeatures, bounds: PoolBounds, w: Weights) -> float:
    return (
        w.alpha * _norm(raw.new_vocab_gain, *bounds.new_vocab_gain)
        + w.beta * _norm(raw.perplexity, *bounds.perplexity)
        + w.gamma * _norm(raw.term_density, *bounds.term_density)
    )


@dataclass(frozen=True)
class SelectionRecord:
    """One selected sentence with the score and raw features it was picked
    at, for the selection manifest."""

    step: int
    sentence_id: str
    score: float
    new_vocab_gain: float
    perplexity: float
    term_density: float
    duration_s: float
    cumulative_duration_s: float


@dataclass
class SelectionState:
    """Outcome of one greedy run: picked ids in order, the accumulated
    vocabulary, and what is left of the budget."""

    selected: list[str] = field(default_factory=list)
    vocabulary: set[Token] = field(default_factory=set)
    remaining_budget: float = 0.0
    records: list[SelectionRecord] = field(default_factory=list)


def new_vocab_gain(s: Sentence, vocabulary: set[Token]) -> float:
    return len(s.vocab() - vocabulary) / len(s.tokens)


def score(
    s: Sentence,
    state: SelectionState,
    pool_bounds: PoolBounds,
    features: Mapping[str, CandidateFeatures],
    w: Weights,
) -> float:
    """Score one candidate against the current selection state."""
    feats = features[s.id]
    raw = RawFeatures(new_vocab_gain(s, state.vocabulary), feats.perplexity, feats.term_density)
    return score_features(raw, pool_bounds, w)


def greedy_select(
    pool: Iterable[Sentence],
    features: Mapping[str, CandidateFeatures],
    w: Weights,
    budget: Budget,
    renormalize_every: int = 1,
) -> SelectionState:
    """Sequential greedy: repeatedly take the argmax-scoring candidate (ties
    go to the lowest sentence id), update the vocabulary, renormalize, and
    stop when the budget is exhausted or the pool is empty. A candidate
    whose duration exceeds the remaining budget is dropped from the pool.

    ``renormalize_every`` > 1 recomputes the normalization bounds only every
    m-th step; an approximation intended for very large pools.
    """
    if renormalize_every < 1:
        raise ValueError("renormalize_every must be >= 1")
    sentences = list(pool)
    for s in sentences:
        if s.id not in features:
            raise KeyError(f"no precomputed features for sentence {s.id!r}")

    n = len(sentences)
    ids = [s.id for s in sentences]
    vocabs = [s.vocab() for s in sentences]
    lens = np.array([len(s.tokens) for s in sentences], dtype=np.float64)
    ppl = np.array([features[s.id].perplexity for s in sentences], dtype=np.float64)
    td = np.array([features[s.id].term_density for s in sentences], dtype=np.float64)
    dur = np.array([features[s.id].duration_s for s in sentences], dtype=np.float64)

    unseen = np.array([len(v) for v in vocabs], dtype=np.float64)
    token_index: dict[Token, list[int]] = {}
    for i, v in enumerate(vocabs):
        for token in v:
            token_index.setdefault(token, []).append(i)

    alive = np.ones(n, dtype=bool)
    state = SelectionState(remaining_budget=float(budget.limit))
    is_count = budget.kind == "count"
    step = 0
    bounds_cache: tuple | None = None

    while alive.any() and state.remaining_budget > 0:
        if bounds_cache is None or step % renormalize_every == 0:
            nvg_alive = unseen[alive] / lens[alive]
            ppl_alive = ppl[alive]
            td_alive = td[alive]
            bounds_cache = (
                (float(nvg_alive.min()), float(nvg_alive.max())),
                (float(ppl_alive.min()), float(ppl_alive.max())),
                (float(td_alive.min()), float(td_alive.max())),
            )
        (nvg_lo, nvg_hi), (ppl_lo, ppl_hi), (td_lo, td_hi) = bounds_cache

        nvg = unseen / lens
        s_arr = np.zeros(n, dtype=np.float64)
        if nvg_hi != nvg_lo:
            s_arr = s_arr + w.alpha * ((nvg - nvg_lo) / (nvg_hi - nvg_lo))
        if ppl_hi != ppl_lo:
            s_arr = s_arr + w.beta * ((ppl - ppl_lo) / (ppl_hi - ppl_lo))
        if td_hi != td_lo:
            s_arr = s_arr + w.gamma * ((td - td_lo) / (td_hi - td_lo))

        alive_idx = np.flatnonzero(alive)
        scores_alive = s_arr[alive_idx]
        best_score = scores_alive.max()
        tied = alive_idx[scores_alive == best_score]
        pick = min(tied, key=lambda i: ids[i])

        cost = 1.0 if is_count else dur[pick]
        if cost > state.remaining_budget:
            alive[pick] = False
            bounds_cache = None
            continue

        alive[pick] = False
        state.remaining_budget -= cost
        state.selected.append(ids[pick])
        step += 1
        cumulative = (state.records[-1].cumulative_duration_s if state.records else 0.0) + dur[pick]
        state.records.append(SelectionRecord(
            step=step,
            sentence_id=ids[pick],
            score=float(s_arr[pick]),
            new_vocab_gain=float(nvg[pick]),
            perplexity=float(ppl[pick]),
            term_density=float(td[pick]),
            duration_s=float(dur[pick]),
            cumulative_duration_s=float(cumulative),
        ))
        for token in vocabs[pick]:
            if token not in state.vocabulary:
                state.vocabulary.add(token)
                for i in token_index[token]:
                    unseen[i] -= 1.0
        if renormalize_every == 1:
            bounds_cache = None

    return state


def muss_select(
    pool: Corpus | Sequence[Sentence],
    clustering: Clustering,
    features: Mapping[str, CandidateFeatures],
    w: Weights,
    budget: Budget,
    per_cluster_take: int = 200,
    cluster_pool_cap: int = 60_000,
    renormalize_every: int = 1,
) -> SelectionState:
    """Multilevel selection: per-cluster greedy with a cluster-local
    vocabulary, cluster ranking by mean representative score, then a global
    greedy over the pooled representatives under the real budget."""
    if per_cluster_take < 1:
        raise ValueError("per_cluster_take must be >= 1")
    sentences = {s.id: s for s in pool}
    for sid in sentences:
        if sid not in clustering.assignments:
            raise KeyError(f"clustering does not cover sentence {sid!r}")

    members = clustering.members()
    ranked: list[tuple[float, int, SelectionState]] = []
    for j in sorted(members):
        ids_j = [sid for sid in members[j] if sid in sentences]
        if not ids_j:
            continue
        local = greedy_select(
            [sentences[sid] for sid in ids_j],
            features,
            w,
            Budget(kind="count", limit=per_cluster_take, duration_model=budget.duration_model),
            renormalize_every=renormalize_every,
        )
        if not local.records:
            continue
        mean_score = sum(r.score for r in local.records) / len(local.records)
        ranked.append((mean_score, j, local))

    ranked.sort(key=lambda item: (-item[0], item[1]))
    pooled_ids: list[str] = []
    for _, _, local in ranked:
        for record in local.records:
            if len(pooled_ids) >= cluster_pool_cap:
                break
            pooled_ids.append(record.sentence_id)
        if len(pooled_ids) >= cluster_pool_cap:
            break

    return greedy_select([sentences[sid] for sid in pooled_ids], features, w, budget,
                         renormalize_every=renormalize_every)


def write_selection_manifest(
    state: SelectionState,
    pool: Corpus | Sequence[Sentence],
    path: str | Path,
) -> None:
    """Selection manifest: one JSONL line per pick with its score, raw
    features, and cumulative duration."""
    by_id = {s.id: s for s in pool}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for record in state.records:
            sentence = by_id[record.sentence_id]
            fh.write(json.dumps({
                "step": record.step,
                "id": record.sentence_id,
                "text": sentence.raw_text,
                "lang": sentence.lang,
                "score": record.score,
                "new_vocab_gain": record.new_vocab_gain,
                "perplexity": record.perplexity,
                "term_density": record.term_density,
                "duration_s": record.duration_s,
                "cumulative_duration_s": record.cumulative_duration_s,
            }, ensure_ascii=False) + "\n")
