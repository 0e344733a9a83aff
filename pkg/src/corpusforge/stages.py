"""Pipeline stages behind the service endpoints and CLI commands.

Each stage loads the config, checks its prerequisites, runs the underlying
modules, and writes versioned artifacts plus a run log. Artifacts are
append-only: a rerun writes the next version and never mutates previous
outputs. Stages buffer results and write only after the computation
succeeds, so a failed stage leaves no partial artifact.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from . import audio as audio_mod
from .clustering import effective_k, kmeans
from .config import PipelineConfig, config_hash
from .corpus import (
    Corpus, DomainTermSet, extract_domain_terms, load_corpus,
    load_reference_vocab, save_corpus,
)
from .embeddings import HashEmbeddingBackend, RemoteEmbeddingBackend, embed
from .errors import ConfigError, MissingPrerequisiteError
from .generation import (
    GenerationPlan, LengthConstraint, PipelineWarning, run_generation,
)
from .llm import CachingLLMClient, HTTPLLMClient, LLMClient, MockLLM, ModelConfig, PromptTemplates
from .metrics import compute_report
from .perplexity import RemoteScorer, train_ngram
from .respelling import mix_respelled, respell_corpus
from .selection import (
    Budget, DurationModel, Weights, compute_features, estimate_duration,
    muss_select, write_selection_manifest,
)
from .transport import DiskCache
from .wer import evaluate, write_alignments_tsv

_VERSION_RE = re.compile(r"\.v(\d{3})\.")


@dataclass
class StageResult:
    command: str
    config_hash: str
    seed: int
    artifacts: dict[str, str] = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    warnings: list[dict] = field(default_factory=list)


def next_version(directory: Path, stem: str, ext: str) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    best = 0
    for existing in directory.glob(f"{stem}.v*.{ext}"):
        match = _VERSION_RE.search(existing.name)
        if match:
            best = max(best, int(match.group(1)))
    return directory / f"{stem}.v{best + 1:03d}.{ext}"


def latest_version(directory: Path, stem: str, ext: str) -> Path | None:
    candidates = []
    if directory.exists():
        for existing in directory.glob(f"{stem}.v*.{ext}"):
            match = _VERSION_RE.search(existing.name)
            if match:
                candidates.append((int(match.group(1)), existing))
    if not candidates:
        return None
    return max(candidates)[1]


class StageContext:
    """Resolved paths and shared adapters for one stage invocation."""

    def __init__(self, cfg: PipelineConfig, config_path: Path, mock_backends: bool):
        self.cfg = cfg
        self.base = config_path.parent.resolve()
        self.mock = mock_backends
        self.output_dir = self._resolve(cfg.paths.output_dir)
        self.cache_dir = self._resolve(cfg.paths.cache_dir)
        self.warnings: list[PipelineWarning] = []

    def _resolve(self, value: str | None) -> Path:
        path = Path(value)
        return path if path.is_absolute() else self.base / path

    def input_path(self, name: str) -> Path | None:
        value = getattr(self.cfg.paths, name)
        if value is None:
            return None
        return self._resolve(value)

    def require_input(self, name: str, command: str) -> Path:
        path = self.input_path(name)
        if path is None:
            raise ConfigError(f"paths.{name}: required by the {command} command")
        if not path.exists():
            raise FileNotFoundError(f"paths.{name}: {path} does not exist")
        return path

    def models(self) -> tuple[ModelConfig, ...]:
        entries = self.cfg.generation.models
        if not entries:
            raise ConfigError("generation.models: configure at least one model")
        models = []
        for i, entry in enumerate(entries):
            if not self.mock and not entry.endpoint:
                raise ConfigError(
                    f"generation.models.{i}.endpoint: required unless mock backends are enabled"
                )
            models.append(ModelConfig(
                id=entry.id, endpoint=entry.endpoint, temperature=entry.temperature,
                top_p=entry.top_p, api_key=entry.api_key,
            ))
        return tuple(models)

    def llm_client(self) -> CachingLLMClient:
        inner: LLMClient = MockLLM(self.cfg.seed) if self.mock else HTTPLLMClient()
        return CachingLLMClient(inner, DiskCache(self.cache_dir, "llm"))

    def templates(self) -> PromptTemplates:
        directory = self.cfg.generation.template_dir
        return PromptTemplates(self._resolve(directory) if directory else None)

    def constraints(self) -> dict[str, LengthConstraint]:
        out = {}
        for lang, entry in self.cfg.length_constraints.items():
            out[lang] = LengthConstraint(lang, entry.min_words, entry.max_words)
        needed = set(self.cfg.generation.prompt_languages) | {self.cfg.generation.target_lang}
        for lang in sorted(needed):
            if lang not in out:
                raise ConfigError(f"length_constraints.{lang}: no constraint configured")
        return out

    def term_set(self) -> DomainTermSet:
        explicit = self.input_path("terms")
        if explicit is not None:
            if not explicit.exists():
                raise FileNotFoundError(f"paths.terms: {explicit} does not exist")
            return DomainTermSet.from_file(explicit)
        artifact = latest_version(self.output_dir, "terms", "tsv")
        if artifact is None:
            raise MissingPrerequisiteError("no domain term list available", "extract-terms")
        return DomainTermSet.from_file(artifact)

    def scorer(self, fallback_corpus: Corpus):
        if self.cfg.lm.endpoint and not self.mock:
            return RemoteScorer(self.cfg.lm.endpoint)
        if self.cfg.lm.train_path:
            train_corpus = load_corpus(self._resolve(self.cfg.lm.train_path))
        else:
            train_corpus = fallback_corpus
        return train_ngram(train_corpus, order=self.cfg.lm.order, k=self.cfg.lm.k)

    def embedding_backend(self):
        if self.cfg.embedding.endpoint and not self.mock:
            return RemoteEmbeddingBackend(self.cfg.embedding.endpoint)
        return HashEmbeddingBackend(self.cfg.embedding.mock_dim)

    def tts_backend(self):
        if self.mock:
            return audio_mod.MockTTS(wpm=self.cfg.selection.speaking_rate_wpm,
                                     sample_rate=self.cfg.tts.sample_rate)
        if self.cfg.tts.endpoint:
            return audio_mod.HTTPTTS(self.cfg.tts.endpoint)
        if self.cfg.tts.command:
            return audio_mod.SubprocessTTS(self.cfg.tts.command)
        raise ConfigError("tts: set an endpoint or command, or enable mock backends")

    def result(self, command: str) -> StageResult:
        return StageResult(command=command, config_hash=config_hash(self.cfg),
                           seed=self.cfg.seed,
                           warnings=[w.to_dict() for w in self.warnings])

    def write_run_log(self, result: StageResult) -> None:
        log_path = next_version(self.output_dir / "logs", result.command, "json")
        payload = {
            "command": result.command,
            "config_hash": result.config_hash,
            "seed": result.seed,
            "mock_backends": self.mock,
            "artifacts": {name: Path(p).name for name, p in result.artifacts.items()},
            "stats": result.stats,
            "warnings": result.warnings,
        }
        with log_path.open("w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, ensure_ascii=False)
            fh.write("\n")


def stage_extract_terms(ctx: StageContext) -> StageResult:
    transcripts_path = ctx.require_input("eval_transcripts", "extract-terms")
    vocab_path = ctx.require_input("reference_vocab", "extract-terms")
    transcripts = load_corpus(transcripts_path)
    reference = load_reference_vocab(vocab_path)
    terms = extract_domain_terms(transcripts, reference,
                                 min_frequency=ctx.cfg.terms.min_frequency)
    out_path = next_version(ctx.output_dir, "terms", "tsv")
    terms.to_file(out_path)
    result = ctx.result("extract-terms")
    result.artifacts["terms"] = str(out_path)
    result.stats = {
        "n_transcripts": len(transcripts),
        "n_terms": len(terms),
        "min_frequency": ctx.cfg.terms.min_frequency,
    }
    ctx.write_run_log(result)
    return result


def stage_generate(ctx: StageContext) -> StageResult:
    terms = ctx.term_set()
    plan = GenerationPlan(
        domain_seed=ctx.cfg.generation.domain_seed,
        terms=tuple(terms),
        scenario_multiplier=ctx.cfg.generation.scenario_multiplier,
        prompt_languages=tuple(ctx.cfg.generation.prompt_languages),
        sentences_per_prompt=ctx.cfg.generation.sentences_per_prompt,
        models=ctx.models(),
        target_lang=ctx.cfg.generation.target_lang,
        constraints=ctx.constraints(),
        templates=ctx.templates(),
    )
    client = ctx.llm_client()
    pool, gen_stats = run_generation(plan, client, ctx.warnings)
    out_path = next_version(ctx.output_dir, "pool", "jsonl")
    save_corpus(pool, out_path)
    result = ctx.result("generate")
    result.artifacts["pool"] = str(out_path)
    result.stats = {**gen_stats, "cache_hits": client.hits, "cache_misses": client.misses}
    ctx.write_run_log(result)
    return result


def _load_pool(ctx: StageContext) -> Corpus:
    explicit = ctx.input_path("pool")
    if explicit is not None:
        if not explicit.exists():
            raise FileNotFoundError(f"paths.pool: {explicit} does not exist")
        return load_corpus(explicit)
    artifact = latest_version(ctx.output_dir, "pool", "jsonl")
    if artifact is None:
        raise MissingPrerequisiteError("no candidate pool available", "generate")
    return load_corpus(artifact)


def stage_filter(ctx: StageContext) -> StageResult:
    pool = _load_pool(ctx)
    if len(pool) == 0:
        raise ConfigError("candidate pool is empty; nothing to select")
    terms = ctx.term_set()
    sel = ctx.cfg.selection
    try:
        weights = Weights.parse(sel.weights)
    except ValueError as exc:
        raise ConfigError(f"selection.weights: {exc}") from exc
    duration_model = DurationModel(kind="heuristic", wpm=sel.speaking_rate_wpm)
    scorer = ctx.scorer(pool)
    features = compute_features(pool, scorer, terms, duration_model)

    matrix = embed(pool, ctx.embedding_backend(), DiskCache(ctx.cache_dir, "embeddings"))
    k = effective_k(sel.clusters, len(pool))
    clustering = kmeans(matrix, k, seed=ctx.cfg.seed, max_iters=sel.kmeans_max_iters,
                        metric=sel.kmeans_metric)
    budget = Budget(kind=sel.budget.kind, limit=sel.budget.limit(),
                    duration_model=duration_model)
    state = muss_select(pool, clustering, features, weights, budget,
                        per_cluster_take=sel.per_cluster_take,
                        cluster_pool_cap=sel.cluster_pool_cap,
                        renormalize_every=sel.renormalize_every)

    selection_path = next_version(ctx.output_dir, "selection", "jsonl")
    write_selection_manifest(state, pool, selection_path)
    selected_path = next_version(ctx.output_dir, "selected", "jsonl")
    save_corpus([pool[sid] for sid in state.selected], selected_path)

    result = ctx.result("filter")
    result.artifacts["selection"] = str(selection_path)
    result.artifacts["selected"] = str(selected_path)
    result.stats = {
        "n_pool": len(pool),
        "k": k,
        "n_selected": len(state.selected),
        "selected_duration_s": state.records[-1].cumulative_duration_s if state.records else 0.0,
        "vocabulary_size": len(state.vocabulary),
        "budget_kind": sel.budget.kind,
        "budget_limit": sel.budget.limit(),
    }
    ctx.write_run_log(result)
    return result


def _load_selected(ctx: StageContext) -> Corpus:
    artifact = latest_version(ctx.output_dir, "selected", "jsonl")
    if artifact is None:
        raise MissingPrerequisiteError("no selected corpus available", "filter")
    return load_corpus(artifact)


def stage_respell(ctx: StageContext) -> StageResult:
    selected = _load_selected(ctx)
    client = ctx.llm_client()
    templates = ctx.templates()
    model = ctx.models()[0]
    sentences = list(selected)
    pairs = respell_corpus(sentences, client, templates, model, ctx.warnings)
    duration_model = DurationModel(kind="heuristic", wpm=ctx.cfg.selection.speaking_rate_wpm)
    durations = {s.id: estimate_duration(s, duration_model) for s in sentences}
    manifest = mix_respelled(pairs, sentences, ctx.cfg.respell.ratio, ctx.cfg.seed,
                             durations=durations)

    pairs_path = next_version(ctx.output_dir, "respelled", "jsonl")
    with pairs_path.open("w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps({
                "sentence_id": pair.sentence_id,
                "tts_text": pair.tts_text,
                "asr_target": pair.asr_target,
                "fallback": pair.fallback,
            }, ensure_ascii=False) + "\n")
    manifest_path = next_version(ctx.output_dir, "manifest", "jsonl")
    manifest.save(manifest_path)

    result = ctx.result("respell")
    result.artifacts["respelled"] = str(pairs_path)
    result.artifacts["manifest"] = str(manifest_path)
    result.stats = {
        "n_sentences": len(sentences),
        "n_respelled_entries": sum(1 for e in manifest if e.respelled),
        "n_fallbacks": sum(1 for p in pairs if p.fallback),
        "ratio": ctx.cfg.respell.ratio,
        "cache_hits": client.hits,
        "cache_misses": client.misses,
    }
    ctx.write_run_log(result)
    return result


def stage_synthesize(ctx: StageContext) -> StageResult:
    from .manifest import TrainingManifest

    manifest_path = latest_version(ctx.output_dir, "manifest", "jsonl")
    if manifest_path is None:
        raise MissingPrerequisiteError("no training manifest available", "respell")
    manifest = TrainingManifest.load(manifest_path)
    out_path = next_version(ctx.output_dir, "manifest-synth", "jsonl")
    match = _VERSION_RE.search(out_path.name)
    audio_prefix = f"audio.{match.group(0).strip('.')}" if match else "audio"
    audio_dir = ctx.output_dir / audio_prefix
    synthesized = audio_mod.synthesize(
        manifest, ctx.tts_backend(), audio_dir,
        speakers=ctx.cfg.tts.speakers, seed=ctx.cfg.seed, audio_prefix=audio_prefix,
    )
    synthesized.save(out_path)

    n_failed = sum(1 for e in synthesized if e.error)
    result = ctx.result("synthesize")
    result.artifacts["manifest_synth"] = str(out_path)
    result.artifacts["audio_dir"] = str(audio_dir)
    result.stats = {
        "n_entries": len(synthesized),
        "n_failed": n_failed,
        "total_duration_s": synthesized.total_duration_s(),
        "respelled_fraction": synthesized.respelled_fraction(),
    }
    ctx.write_run_log(result)
    return result


def stage_metrics(ctx: StageContext, corpus_path: str | None = None) -> StageResult:
    if corpus_path is not None:
        path = Path(corpus_path)
        path = path if path.is_absolute() else ctx.base / path
        if not path.exists():
            raise FileNotFoundError(f"corpus: {path} does not exist")
        corpus = load_corpus(path)
    else:
        corpus = _load_selected(ctx)
    terms = ctx.term_set()
    scorer = ctx.scorer(corpus)
    report = compute_report(
        corpus, scorer, terms,
        mattr_window=ctx.cfg.metrics.mattr_window,
        ngram_orders=tuple(ctx.cfg.metrics.distinct_orders),
    )
    out_path = next_version(ctx.output_dir, "metrics", "json")
    report.save(out_path)
    result = ctx.result("metrics")
    result.artifacts["metrics"] = str(out_path)
    result.stats = report.to_dict()
    ctx.write_run_log(result)
    return result


def stage_evaluate(ctx: StageContext, reference: str | None = None,
                   hypothesis: str | None = None) -> StageResult:
    ref_path = Path(reference) if reference else ctx.input_path("reference")
    hyp_path = Path(hypothesis) if hypothesis else ctx.input_path("hypothesis")
    if ref_path is None:
        raise ConfigError("paths.reference: required by the evaluate command")
    if hyp_path is None:
        raise ConfigError("paths.hypothesis: required by the evaluate command")
    ref_path = ref_path if ref_path.is_absolute() else ctx.base / ref_path
    hyp_path = hyp_path if hyp_path.is_absolute() else ctx.base / hyp_path
    for label, path in (("reference", ref_path), ("hypothesis", hyp_path)):
        if not path.exists():
            raise FileNotFoundError(f"{label}: {path} does not exist")
    ref_corpus = load_corpus(ref_path)
    hyp_corpus = load_corpus(hyp_path)
    terms = ctx.term_set()

    alignments: list | None = [] if ctx.cfg.evaluation.emit_alignments else None
    report = evaluate(ref_corpus, hyp_corpus, terms,
                      insertion_attribution=ctx.cfg.evaluation.insertion_attribution,
                      alignments_out=alignments)
    out_path = next_version(ctx.output_dir, "eval", "json")
    report.save(out_path)
    result = ctx.result("evaluate")
    result.artifacts["eval"] = str(out_path)
    if alignments is not None:
        tsv_path = next_version(ctx.output_dir, "alignments", "tsv")
        write_alignments_tsv(alignments, tsv_path)
        result.artifacts["alignments"] = str(tsv_path)
    result.stats = report.to_dict()
    ctx.write_run_log(result)
    return result
