"""Text over-generation pipeline: scenario seeding, multilingual prompting,
translation back to the target language, paraphrasing, and validity
filtering. All model calls go through an LLMClient, so the whole pipeline
runs against either real endpoints or the deterministic mock.
"""

from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass, field

from .charsets import script_for_lang, sentence_is_clean
from .corpus import Provenance, Sentence
from .errors import ConfigError, EmptyResponseError, TransportError
from .llm import LLMClient, ModelConfig, PromptTemplates

logger = logging.getLogger(__name__)

KEEP_TERM_INSTRUCTION = "Leave the term in English, untranslated."

_LANGUAGE_NAMES = {"en": "English", "ja": "Japanese", "zh": "Chinese"}


def _language_name(tag: str) -> str:
    return _LANGUAGE_NAMES.get(tag, tag)


@dataclass(frozen=True)
class LengthConstraint:
    """Per-language word-count bounds applied by the validity filter."""

    lang: str
    min_words: int
    max_words: int

    def __post_init__(self):
        if self.min_words > self.max_words:
            raise ValueError(f"min_words > max_words for {self.lang!r}")


DEFAULT_CONSTRAINTS = {
    "en": LengthConstraint("en", 5, 200),
    "ja": LengthConstraint("ja", 5, 100),
    "zh": LengthConstraint("zh", 5, 100),
}


@dataclass(frozen=True)
class GenerationPlan:
    """Everything the over-generation steps need: the domain seed, the term
    list used as context seeds, fan-out counts, languages, and model
    configurations."""

    domain_seed: str
    terms: tuple[str, ...] = ()
    scenario_multiplier: int = 4
    prompt_languages: tuple[str, ...] = ("en",)
    sentences_per_prompt: int = 10
    models: tuple[ModelConfig, ...] = ()
    target_lang: str = "en"
    constraints: dict[str, LengthConstraint] = field(
        default_factory=lambda: dict(DEFAULT_CONSTRAINTS)
    )
    templates: PromptTemplates = field(default_factory=PromptTemplates)

    def __post_init__(self):
        if self.scenario_multiplier < 1:
            raise ValueError("scenario_multiplier must be >= 1")
        if self.sentences_per_prompt < 1:
            raise ValueError("sentences_per_prompt must be >= 1")
        if not self.models:
            raise ValueError("at least one model must be configured")


@dataclass(frozen=True)
class Scenario:
    id: str
    text: str
    term: str | None
    prompt: str
    model: str


@dataclass(frozen=True)
class PipelineWarning:
    kind: str
    sentence_id: str | None
    detail: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sentence_id": self.sentence_id, "detail": self.detail}


_NUMBERING = re.compile(r"^\s*(?:\d+[.)]\s*|[-*]\s+)")


def parse_lines(response: str) -> list[str]:
    """Non-empty response lines with list numbering/bullets stripped."""
    lines = []
    for raw in response.splitlines():
        line = _NUMBERING.sub("", raw).strip()
        if line:
            lines.append(line)
    return lines


def _short_id(prefix: str, *parts: str) -> str:
    digest = hashlib.sha1("\x1f".join(parts).encode("utf-8")).hexdigest()
    return f"{prefix}{digest[:12]}"


def generate_scenarios(plan: GenerationPlan, client: LLMClient) -> list[Scenario]:
    """Context seeds: scenario_multiplier scenarios per term (or per domain
    when no terms are given), spread round-robin over the configured models."""
    terms: tuple[str | None, ...] = plan.terms if plan.terms else (None,)
    scenarios: list[Scenario] = []
    for t_index, term in enumerate(terms):
        model = plan.models[t_index % len(plan.models)]
        term_line = f"Key term: {term}\n" if term else ""
        prompt = plan.templates.render(
            "scenario",
            domain_seed=plan.domain_seed,
            term_line=term_line,
            count=str(plan.scenario_multiplier),
        )
        response = client.complete(prompt, model)
        lines = parse_lines(response)
        if len(lines) < plan.scenario_multiplier:
            raise EmptyResponseError(
                f"scenario prompt for term {term!r} returned {len(lines)} lines, "
                f"needed {plan.scenario_multiplier}"
            )
        for i, line in enumerate(lines[:plan.scenario_multiplier]):
            scenarios.append(Scenario(
                id=f"sc{len(scenarios):05d}",
                text=line,
                term=term,
                prompt=prompt,
                model=model.id,
            ))
    return scenarios


def generate_texts(
    scenario: Scenario,
    term: str | None,
    lang: str,
    plan: GenerationPlan,
    client: LLMClient,
    model: ModelConfig | None = None,
) -> list[Sentence]:
    """Up to sentences_per_prompt sentences for one (scenario, language)
    pair, validity-filtered. Non-English prompts carrying a term also carry
    the keep-term instruction."""
    if lang not in plan.prompt_languages:
        raise ValueError(f"language {lang!r} is not in the plan's prompt languages")
    model = model or plan.models[0]
    term_line = f"Key term: {term}\n" if term else ""
    keep_line = ""
    if term and lang != "en":
        keep_line = KEEP_TERM_INSTRUCTION + "\n"
    prompt = plan.templates.render(
        "text",
        domain_seed=plan.domain_seed,
        scenario=scenario.text,
        term_line=term_line,
        keep_line=keep_line,
        count=str(plan.sentences_per_prompt),
        language=_language_name(lang),
    )
    response = client.complete(prompt, model)
    lines = parse_lines(response)[:plan.sentences_per_prompt]
    if not lines:
        raise EmptyResponseError(f"text prompt for scenario {scenario.id} returned nothing")
    sentences = []
    for i, line in enumerate(lines):
        sid = _short_id("g", scenario.id, lang, model.id, str(i), line)
        try:
            sentences.append(Sentence.from_text(
                sid, line, lang=lang,
                provenance=Provenance(model=model.id, step="generate",
                                      scenario_id=scenario.id, prompt_lang=lang),
            ))
        except ValueError:
            continue
    kept = validity_filter(sentences, plan.constraints)
    if not kept:
        raise EmptyResponseError(
            f"all {len(lines)} sentences for scenario {scenario.id} ({lang}, "
            f"{model.id}) were filtered; the prompt looks degenerate"
        )
    return kept


def translate_back(
    sentences: list[Sentence],
    target_lang: str,
    plan: GenerationPlan,
    client: LLMClient,
    warnings: list[PipelineWarning] | None = None,
) -> list[Sentence]:
    """One translated sentence per input; failed translations are dropped
    with a warning record. Provenance chains to the source sentence."""
    out: list[Sentence] = []
    for index, source in enumerate(sentences):
        model = plan.models[index % len(plan.models)]
        prompt = plan.templates.render(
            "translate", language=_language_name(target_lang), text=source.raw_text
        )
        try:
            text = client.complete(prompt, model).strip()
            if not text:
                raise EmptyResponseError("empty translation")
            translated = Sentence.from_text(
                _short_id("t", source.id, text),
                text,
                lang=target_lang,
                provenance=Provenance(model=model.id, step="translate_back",
                                      scenario_id=source.provenance.scenario_id,
                                      prompt_lang=source.lang,
                                      parent_id=source.id),
            )
        except (TransportError, ValueError) as exc:
            if warnings is not None:
                warnings.append(PipelineWarning("translation_failed", source.id, str(exc)))
            logger.warning("translation of %s failed: %s", source.id, exc)
            continue
        out.append(translated)
    return out


def paraphrase(
    sentences: list[Sentence],
    plan: GenerationPlan,
    client: LLMClient,
) -> list[Sentence]:
    """LLM paraphrasing with a fan-out of sentences_per_prompt per input;
    paraphrases byte-identical to their source are dropped."""
    out: list[Sentence] = []
    for index, source in enumerate(sentences):
        model = plan.models[index % len(plan.models)]
        prompt = plan.templates.render(
            "paraphrase", count=str(plan.sentences_per_prompt), text=source.raw_text
        )
        response = client.complete(prompt, model)
        lines = parse_lines(response)[:plan.sentences_per_prompt]
        for i, line in enumerate(lines):
            if line == source.raw_text:
                continue
            sid = _short_id("p", source.id, str(i), line)
            try:
                out.append(Sentence.from_text(
                    sid, line, lang=source.lang,
                    provenance=Provenance(model=model.id, step="paraphrase",
                                          scenario_id=source.provenance.scenario_id,
                                          prompt_lang=source.lang,
                                          parent_id=source.id),
                ))
            except ValueError:
                continue
    return validity_filter(out, plan.constraints)


def validity_filter(
    sentences: list[Sentence],
    constraints: dict[str, LengthConstraint],
) -> list[Sentence]:
    """Keep sentences whose word count is within their language's bounds and
    whose characters all belong to the language's script class; preserve
    order; drop byte-identical duplicates keeping the first. Applying the
    filter twice is a no-op."""
    seen_texts: set[str] = set()
    kept: list[Sentence] = []
    for s in sentences:
        constraint = constraints.get(s.lang)
        if constraint is None:
            raise ConfigError(f"no length constraint configured for language {s.lang!r}")
        if s.raw_text in seen_texts:
            continue
        if not (constraint.min_words <= len(s.tokens) <= constraint.max_words):
            continue
        if not sentence_is_clean(s.raw_text, script_for_lang(s.lang)):
            continue
        seen_texts.add(s.raw_text)
        kept.append(s)
    return kept


def run_generation(
    plan: GenerationPlan,
    client: LLMClient,
    warnings: list[PipelineWarning] | None = None,
) -> tuple[list[Sentence], dict[str, int]]:
    """The whole over-generation pipeline: scenarios, per-language texts
    from every configured model, translation back to the target language,
    paraphrasing, and a final validity filter over the union.

    Returns the candidate pool and per-step counts.
    """
    scenarios = generate_scenarios(plan, client)
    generated: list[Sentence] = []
    for scenario in scenarios:
        for lang in plan.prompt_languages:
            for model in plan.models:
                try:
                    generated.extend(
                        generate_texts(scenario, scenario.term, lang, plan, client, model=model)
                    )
                except EmptyResponseError as exc:
                    if warnings is not None:
                        warnings.append(PipelineWarning("degenerate_prompt", None, str(exc)))

    native = [s for s in generated if s.lang == plan.target_lang]
    foreign = [s for s in generated if s.lang != plan.target_lang]
    translated = translate_back(foreign, plan.target_lang, plan, client, warnings)

    basis = native + translated
    paraphrased = paraphrase(basis, plan, client)

    pool = validity_filter(basis + paraphrased, plan.constraints)
    stats = {
        "scenarios": len(scenarios),
        "generated": len(generated),
        "translated": len(translated),
        "paraphrased": len(paraphrased),
        "pool": len(pool),
    }
    return pool, stats
