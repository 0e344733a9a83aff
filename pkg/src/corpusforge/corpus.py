"""Corpus ingestion, tokenization/normalization, and domain-term extraction."""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .charsets import _WORD_PATTERNS, script_for_lang
from .errors import MalformedRecordError

Token = str


@dataclass(frozen=True)
class NormalizationRules:
    """How raw text is turned into tokens.

    Defaults match common ASR transcript conventions: unicode lowercase,
    strip leading/trailing punctuation per token, keep intra-word hyphens
    and apostrophes (so call signs like "Hotel-Seven" stay one token).
    """

    lowercase: bool = True
    keep_inner: str = "-'"
    script: str = "latin"
    fold_curly_apostrophe: bool = True

    def cache_key(self) -> str:
        return f"{self.lowercase}|{self.keep_inner}|{self.script}|{self.fold_curly_apostrophe}"


DEFAULT_RULES = NormalizationRules()


@lru_cache(maxsize=32)
def _token_pattern(script: str, keep_inner: str) -> re.Pattern:
    word = _WORD_PATTERNS[script]
    if keep_inner:
        joiner = "[" + re.escape(keep_inner) + "]"
        return re.compile(f"{word}+(?:{joiner}{word}+)*")
    return re.compile(f"{word}+")


def tokenize(text: str, rules: NormalizationRules = DEFAULT_RULES) -> list[Token]:
    """Split ``text`` into normalized tokens.

    Deterministic and idempotent: joining the output with single spaces and
    re-tokenizing yields the same list. Empty input yields an empty list.
    """
    if rules.fold_curly_apostrophe:
        text = text.replace("’", "'")
    if rules.lowercase:
        text = text.lower()
    pattern = _token_pattern(rules.script, rules.keep_inner)
    tokens: list[Token] = []
    for chunk in text.split():
        tokens.extend(pattern.findall(chunk))
    return tokens


@dataclass(frozen=True)
class Provenance:
    """Where a sentence came from in the pipeline."""

    model: str | None = None
    step: str | None = None
    scenario_id: str | None = None
    prompt_lang: str | None = None
    parent_id: str | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Provenance":
        allowed = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**allowed)


@dataclass(frozen=True)
class Sentence:
    """One candidate text with its tokenization and provenance.

    ``tokens`` is always the tokenization of ``raw_text`` under the rules the
    sentence was built with; construct via :meth:`from_text`.
    """

    id: str
    raw_text: str
    tokens: tuple[Token, ...]
    lang: str = "en"
    provenance: Provenance = field(default_factory=Provenance)

    @classmethod
    def from_text(
        cls,
        id: str,
        raw_text: str,
        lang: str = "en",
        rules: NormalizationRules | None = None,
        provenance: Provenance | None = None,
    ) -> "Sentence":
        if rules is None:
            rules = replace(DEFAULT_RULES, script=script_for_lang(lang))
        tokens = tuple(tokenize(raw_text, rules))
        if not tokens:
            raise ValueError(f"sentence {id!r} has no tokens after normalization")
        return cls(id=id, raw_text=raw_text, tokens=tokens, lang=lang,
                   provenance=provenance or Provenance())

    def __len__(self) -> int:
        return len(self.tokens)

    def vocab(self) -> frozenset[Token]:
        return frozenset(self.tokens)


@dataclass(frozen=True)
class Corpus:
    """An ordered collection of sentences with unique ids."""

    sentences: tuple[Sentence, ...]
    source: str = "<memory>"

    def __post_init__(self):
        seen: set[str] = set()
        for s in self.sentences:
            if s.id in seen:
                raise ValueError(f"duplicate sentence id {s.id!r} in corpus {self.source}")
            seen.add(s.id)

    @cached_property
    def _by_id(self) -> dict[str, Sentence]:
        return {s.id: s for s in self.sentences}

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def __getitem__(self, sentence_id: str) -> Sentence:
        return self._by_id[sentence_id]

    def __contains__(self, sentence_id: str) -> bool:
        return sentence_id in self._by_id

    def ids(self) -> list[str]:
        return [s.id for s in self.sentences]

    def all_tokens(self) -> Iterator[Token]:
        for s in self.sentences:
            yield from s.tokens


def _auto_id(position: int, text: str) -> str:
    digest = hashlib.sha1(f"{position}\t{text}".encode("utf-8")).hexdigest()
    return digest[:12]


def load_corpus(
    path: str | Path,
    format: str = "jsonl",
    rules: NormalizationRules | None = None,
    default_lang: str = "en",
) -> Corpus:
    """Load a corpus from ``path``.

    ``format`` is "jsonl" (one {"id","text","lang"} object per line, id and
    lang optional) or "plain" (one sentence per line, blank lines skipped,
    positional ids). Malformed records raise with their line number.
    """
    path = Path(path)
    sentences: list[Sentence] = []
    seen_ids: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        position = 0
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if format == "plain":
                if not line.strip():
                    continue
                record = {"text": line}
            elif format == "jsonl":
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedRecordError(f"invalid JSON: {exc}", line_no) from exc
                if not isinstance(record, dict) or "text" not in record:
                    raise MalformedRecordError("record must be an object with a 'text' field", line_no)
            else:
                raise ValueError(f"unknown corpus format {format!r}")

            text = record["text"]
            if not isinstance(text, str):
                raise MalformedRecordError("'text' must be a string", line_no)
            lang = record.get("lang", default_lang)
            if format == "plain":
                sid = str(position)
            else:
                sid = record.get("id")
                sid = _auto_id(position, text) if sid is None else str(sid)
            if sid in seen_ids:
                raise MalformedRecordError(f"duplicate sentence id {sid!r}", line_no)
            provenance = Provenance.from_dict(record.get("provenance") or {})
            sent_rules = rules
            if sent_rules is None:
                sent_rules = replace(DEFAULT_RULES, script=script_for_lang(lang))
            try:
                sentence = Sentence.from_text(sid, text, lang=lang, rules=sent_rules,
                                              provenance=provenance)
            except ValueError as exc:
                raise MalformedRecordError(str(exc), line_no) from exc
            seen_ids.add(sid)
            sentences.append(sentence)
            position += 1
    return Corpus(tuple(sentences), source=str(path))


def save_corpus(corpus: Iterable[Sentence], path: str | Path) -> None:
    """Write sentences as JSONL with id/text/lang and provenance when set."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for s in corpus:
            record: dict = {"id": s.id, "text": s.raw_text, "lang": s.lang}
            prov = s.provenance.to_dict()
            if prov:
                record["provenance"] = prov
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


class DomainTermSet:
    """Domain-specific terms with their frequencies in the evaluation set."""

    def __init__(self, terms: Mapping[Token, int], min_frequency: int = 2):
        for term, freq in terms.items():
            if freq < min_frequency:
                raise ValueError(
                    f"term {term!r} has frequency {freq} below the floor {min_frequency}"
                )
            if not term or any(ch.isspace() for ch in term):
                raise ValueError(f"term {term!r} is not a single token")
        self.min_frequency = min_frequency
        self.terms: dict[Token, int] = dict(
            sorted(terms.items(), key=lambda item: (-item[1], item[0]))
        )

    def __contains__(self, token: Token) -> bool:
        return token in self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, DomainTermSet) and self.terms == other.terms

    def to_file(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            for term, freq in self.terms.items():
                fh.write(f"{term}\t{freq}\n")

    @classmethod
    def from_file(cls, path: str | Path, min_frequency: int = 1) -> "DomainTermSet":
        """Load a term list; lines are ``term`` or ``term<TAB>freq``.

        A bare term list (no frequencies) loads with frequency 1 and floor 1.
        """
        terms: dict[Token, int] = {}
        with Path(path).open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "\t" in line:
                    term, freq = line.split("\t", 1)
                    terms[term] = int(freq)
                else:
                    terms[line] = max(1, min_frequency)
        return cls(terms, min_frequency=min_frequency)


def load_reference_vocab(path: str | Path,
                         rules: NormalizationRules = DEFAULT_RULES) -> frozenset[Token]:
    """Load a reference vocabulary (one token per line), normalized by the
    same tokenizer used for transcripts."""
    vocab: set[Token] = set()
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            vocab.update(tokenize(line, rules))
    return frozenset(vocab)


def extract_domain_terms(
    eval_transcripts: Corpus,
    reference_vocab: frozenset[Token] | set[Token],
    min_frequency: int = 2,
) -> DomainTermSet:
    """Terms frequent in the evaluation transcripts but absent from the
    reference vocabulary: exactly ``{t: freq(t) >= min_frequency, t not in
    reference_vocab}``. Invariant to transcript order."""
    counts = Counter(eval_transcripts.all_tokens())
    kept = {
        term: freq
        for term, freq in counts.items()
        if freq >= min_frequency and term not in reference_vocab
    }
    return DomainTermSet(kept, min_frequency=min_frequency)


def count_domain_terms(s: Sentence, d: DomainTermSet) -> int:
    """Token positions of ``s`` whose token is a domain term (multiplicity
    counts); always <= len(s.tokens)."""
    return sum(1 for token in s.tokens if token in d)
