"""Word-level alignment and WER / B-WER / U-WER evaluation.

Alignment is minimum-edit-distance with unit costs. Among minimal-cost
alignments the tie-break prefers match over substitution over deletion over
insertion; applied across the whole alignment this means the one with the
most matches wins (so "tower" aligning to "tower" beats a pair of
substitutions of equal cost), and remaining ties resolve by taking the most
preferred op earliest in the sequence.

Error attribution: substitutions and deletions are charged to the class
(biased/unbiased) of the reference word; insertions to the class of the
inserted hypothesis word (configurable to always charge unbiased).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import Corpus, DomainTermSet, NormalizationRules, DEFAULT_RULES, Token, tokenize
from .errors import CorpusForgeError, UndefinedMetricError


class PairingError(CorpusForgeError):
    """Reference and hypothesis corpora do not carry the same ids."""


@dataclass(frozen=True)
class AlignOp:
    kind: str  # "match" | "sub" | "del" | "ins"
    ref: Token | None = None
    hyp: Token | None = None


@dataclass(frozen=True)
class Alignment:
    ops: tuple[AlignOp, ...]

    @property
    def cost(self) -> int:
        return sum(1 for op in self.ops if op.kind != "match")

    def counts(self) -> tuple[int, int, int]:
        s = sum(1 for op in self.ops if op.kind == "sub")
        d = sum(1 for op in self.ops if op.kind == "del")
        i = sum(1 for op in self.ops if op.kind == "ins")
        return s, d, i


def align(ref: Sequence[Token], hyp: Sequence[Token]) -> Alignment:
    """Minimal-cost alignment of ``hyp`` against ``ref`` with unit costs and
    the deterministic tie-break described in the module docstring.

    Reading the ref side of the ops reproduces ``ref``; the hyp side
    reproduces ``hyp``.
    """
    n, m = len(ref), len(hyp)
    # Suffix DP over (cost, matches): minimize cost, then maximize matches.
    cost = [[0] * (m + 1) for _ in range(n + 1)]
    matched = [[0] * (m + 1) for _ in range(n + 1)]
    for j in range(m + 1):
        cost[n][j] = m - j
    for i in range(n + 1):
        cost[i][m] = n - i
    for i in range(n - 1, -1, -1):
        row = cost[i]
        row_down = cost[i + 1]
        mrow = matched[i]
        mrow_down = matched[i + 1]
        for j in range(m - 1, -1, -1):
            if ref[i] == hyp[j]:
                best_c = row_down[j + 1]
                best_m = mrow_down[j + 1] + 1
            else:
                best_c = row_down[j + 1] + 1
                best_m = mrow_down[j + 1]
            c = row_down[j] + 1  # delete ref[i]
            mm = mrow_down[j]
            if c < best_c or (c == best_c and mm > best_m):
                best_c, best_m = c, mm
            c = row[j + 1] + 1  # insert hyp[j]
            mm = mrow[j + 1]
            if c < best_c or (c == best_c and mm > best_m):
                best_c, best_m = c, mm
            row[j] = best_c
            mrow[j] = best_m

    # Greedy trace from the start, taking the most preferred op that still
    # completes an optimal alignment: match > sub > del > ins.
    ops: list[AlignOp] = []
    i = j = 0
    while i < n or j < m:
        cur_c, cur_m = cost[i][j], matched[i][j]
        if i < n and j < m and ref[i] == hyp[j] \
                and cost[i + 1][j + 1] == cur_c and matched[i + 1][j + 1] + 1 == cur_m:
            ops.append(AlignOp("match", ref[i], hyp[j]))
            i += 1
            j += 1
        elif i < n and j < m and ref[i] != hyp[j] \
                and cost[i + 1][j + 1] + 1 == cur_c and matched[i + 1][j + 1] == cur_m:
            ops.append(AlignOp("sub", ref[i], hyp[j]))
            i += 1
            j += 1
        elif i < n and cost[i + 1][j] + 1 == cur_c and matched[i + 1][j] == cur_m:
            ops.append(AlignOp("del", ref[i], None))
            i += 1
        else:
            ops.append(AlignOp("ins", None, hyp[j]))
            j += 1
    return Alignment(tuple(ops))


@dataclass(frozen=True)
class ClassCounts:
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions


@dataclass(frozen=True)
class EvalReport:
    wer: float
    b_wer: float | None
    u_wer: float | None
    overall: ClassCounts
    biased: ClassCounts
    unbiased: ClassCounts
    n_ref: int
    n_ref_biased: int
    n_ref_unbiased: int
    n_utterances: int

    def to_dict(self) -> dict:
        return {
            "wer": self.wer,
            "b_wer": self.b_wer,
            "u_wer": self.u_wer,
            "counts": {
                "overall": self.overall.__dict__,
                "biased": self.biased.__dict__,
                "unbiased": self.unbiased.__dict__,
            },
            "n_ref": self.n_ref,
            "n_ref_biased": self.n_ref_biased,
            "n_ref_unbiased": self.n_ref_unbiased,
            "n_utterances": self.n_utterances,
        }

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def evaluate(
    ref_corpus: Corpus,
    hyp_corpus: Corpus,
    terms: DomainTermSet,
    rules: NormalizationRules = DEFAULT_RULES,
    insertion_attribution: str = "hypothesis",
    alignments_out: list[tuple[str, Alignment]] | None = None,
) -> EvalReport:
    """Corpus-level WER with term-aware attribution.

    Corpora pair by id; the same normalizer re-tokenizes both sides.
    ``insertion_attribution`` is "hypothesis" (charge the class of the
    inserted word) or "unbiased" (charge all insertions to U-WER).
    Zero-denominator class metrics report None, never zero.
    """
    if insertion_attribution not in ("hypothesis", "unbiased"):
        raise ValueError(f"unknown insertion attribution {insertion_attribution!r}")
    if len(ref_corpus) == 0:
        raise UndefinedMetricError("reference corpus is empty")
    ref_ids = set(ref_corpus.ids())
    hyp_ids = set(hyp_corpus.ids())
    if ref_ids != hyp_ids:
        missing = sorted(ref_ids ^ hyp_ids)[:10]
        raise PairingError(f"reference and hypothesis ids differ, e.g. {missing}")

    b_s = b_d = b_i = 0
    u_s = u_d = u_i = 0
    n_ref_biased = n_ref_unbiased = 0
    for ref_sentence in ref_corpus:
        hyp_sentence = hyp_corpus[ref_sentence.id]
        ref_tokens = tokenize(ref_sentence.raw_text, rules)
        hyp_tokens = tokenize(hyp_sentence.raw_text, rules)
        alignment = align(ref_tokens, hyp_tokens)
        if alignments_out is not None:
            alignments_out.append((ref_sentence.id, alignment))
        for op in alignment.ops:
            if op.kind == "match":
                if op.ref in terms:
                    n_ref_biased += 1
                else:
                    n_ref_unbiased += 1
            elif op.kind == "sub":
                if op.ref in terms:
                    n_ref_biased += 1
                    b_s += 1
                else:
                    n_ref_unbiased += 1
                    u_s += 1
            elif op.kind == "del":
                if op.ref in terms:
                    n_ref_biased += 1
                    b_d += 1
                else:
                    n_ref_unbiased += 1
                    u_d += 1
            else:  # ins
                if insertion_attribution == "hypothesis" and op.hyp in terms:
                    b_i += 1
                else:
                    u_i += 1

    n_ref = n_ref_biased + n_ref_unbiased
    if n_ref == 0:
        raise UndefinedMetricError("reference corpus has no tokens after normalization")
    biased = ClassCounts(b_s, b_d, b_i)
    unbiased = ClassCounts(u_s, u_d, u_i)
    overall = ClassCounts(b_s + u_s, b_d + u_d, b_i + u_i)
    return EvalReport(
        wer=overall.errors / n_ref,
        b_wer=(biased.errors / n_ref_biased) if n_ref_biased else None,
        u_wer=(unbiased.errors / n_ref_unbiased) if n_ref_unbiased else None,
        overall=overall,
        biased=biased,
        unbiased=unbiased,
        n_ref=n_ref,
        n_ref_biased=n_ref_biased,
        n_ref_unbiased=n_ref_unbiased,
        n_utterances=len(ref_corpus),
    )


def write_alignments_tsv(alignments: list[tuple[str, Alignment]], path: str | Path) -> None:
    """Optional per-utterance alignment dump: one op per row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("utterance_id\top\tref\thyp\n")
        for utterance_id, alignment in alignments:
            for op in alignment.ops:
                fh.write(f"{utterance_id}\t{op.kind}\t{op.ref or ''}\t{op.hyp or ''}\n")
