"""Phonetic respelling augmentation: pronunciation-shaped alternative
spellings used as TTS input while the canonical text stays the training
label. A respelling that leaves the allowed character set is rejected and
the canonical text is used instead, with a warning record."""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .charsets import script_for_lang, tts_text_is_clean
from .corpus import Sentence
from .errors import TransportError
from .generation import PipelineWarning
from .llm import LLMClient, ModelConfig, PromptTemplates
from .manifest import ManifestEntry, TrainingManifest

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RespelledPair:
    """(TTS input text, canonical ASR target) for one sentence. The target
    is byte-identical to the source sentence's raw text."""

    tts_text: str
    asr_target: str
    sentence_id: str
    fallback: bool = False


def respell(
    s: Sentence,
    client: LLMClient,
    templates: PromptTemplates,
    model: ModelConfig,
    warnings: list[PipelineWarning] | None = None,
) -> RespelledPair:
    """Ask the client for a respelling of ``s``. Output containing
    characters outside the target script class (plus hyphen, apostrophe,
    space) falls back to the canonical text with a warning."""
    prompt = templates.render("respell", text=s.raw_text)
    script = script_for_lang(s.lang)
    try:
        candidate = client.complete(prompt, model).strip()
    except TransportError:
        raise
    if not candidate or not tts_text_is_clean(candidate, script):
        if warnings is not None:
            warnings.append(PipelineWarning(
                "respelling_rejected", s.id,
                f"respelling failed the charset check, using canonical text: {candidate[:80]!r}",
            ))
        logger.warning("respelling for %s rejected by charset check", s.id)
        return RespelledPair(s.raw_text, s.raw_text, s.id, fallback=True)
    return RespelledPair(candidate, s.raw_text, s.id)


def respell_corpus(
    sentences: Sequence[Sentence],
    client: LLMClient,
    templates: PromptTemplates,
    model: ModelConfig,
    warnings: list[PipelineWarning] | None = None,
) -> list[RespelledPair]:
    return [respell(s, client, templates, model, warnings) for s in sentences]


def mix_respelled(
    pairs: Sequence[RespelledPair],
    canonical: Sequence[Sentence],
    ratio: float,
    seed: int,
    durations: Mapping[str, float] | None = None,
) -> TrainingManifest:
    """Deterministic seeded mixture: exactly floor(ratio * N) entries use
    their respelled text as TTS input, the rest canonical; every entry's ASR
    target is the canonical text. Entries keep canonical order."""
    if not 0.0 <= ratio <= 1.0:
        raise ValueError("respell ratio must be within [0, 1]")
    by_id = {p.sentence_id: p for p in pairs}
    n = len(canonical)
    take = math.floor(ratio * n)
    rng = random.Random(seed)
    chosen = set(rng.sample(range(n), take)) if take else set()

    entries = []
    for i, s in enumerate(canonical):
        pair = by_id.get(s.id)
        use_respelled = i in chosen and pair is not None
        entries.append(ManifestEntry(
            utterance_id=s.id,
            tts_text=pair.tts_text if use_respelled else s.raw_text,
            asr_target=s.raw_text,
            respelled=use_respelled,
            lang=s.lang,
            duration_s=float(durations.get(s.id, 0.0)) if durations else 0.0,
            duration_source="estimated",
        ))
    return TrainingManifest(entries)
