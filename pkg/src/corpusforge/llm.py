"""Text-generation client adapters: chat-completion HTTP backend, a
content-addressed response cache, and a deterministic offline mock.

The mock fills templates from small word lists, seeded by the prompt hash,
so pipelines run hermetically and reproducibly without any model service.
It understands the prompt shapes produced by the bundled template files.
"""

from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Protocol

import httpx

from .errors import EmptyResponseError
from .transport import DiskCache, post_json, stable_hash


@dataclass(frozen=True)
class ModelConfig:
    id: str
    endpoint: str | None = None
    temperature: float = 1.0
    top_p: float = 1.0
    api_key: str | None = None


class LLMClient(Protocol):
    def complete(self, prompt: str, model: ModelConfig) -> str: ...


class PromptTemplates:
    """Prompt templates are plain text files with named placeholders so they
    can be edited without touching code. Files: scenario.txt, text.txt,
    translate.txt, paraphrase.txt, respell.txt."""

    NAMES = ("scenario", "text", "translate", "paraphrase", "respell")

    def __init__(self, directory: str | Path | None = None):
        self._templates: dict[str, str] = {}
        if directory is not None:
            directory = Path(directory)
            for name in self.NAMES:
                path = directory / f"{name}.txt"
                if not path.exists():
                    raise FileNotFoundError(f"template file missing: {path}")
                self._templates[name] = path.read_text(encoding="utf-8")
        else:
            package = resources.files("corpusforge") / "templates"
            for name in self.NAMES:
                self._templates[name] = (package / f"{name}.txt").read_text(encoding="utf-8")

    def render(self, name: str, **fields: str) -> str:
        return self._templates[name].format(**fields)


class HTTPLLMClient:
    """Chat-completion-style HTTP adapter.

    Wire format: ``{"model", "messages", "temperature", "top_p"}`` in,
    ``{"text": ...}`` out. Transport failures retry with backoff.
    """

    def __init__(self, *, timeout: float = 60.0, client: httpx.Client | None = None):
        self.timeout = timeout
        self._client = client

    def complete(self, prompt: str, model: ModelConfig) -> str:
        if not model.endpoint:
            raise ValueError(f"model {model.id!r} has no endpoint configured")
        headers = {"Authorization": f"Bearer {model.api_key}"} if model.api_key else None
        response = post_json(
            model.endpoint,
            {
                "model": model.id,
                "messages": [{"role": "user", "content": prompt}],
                "temperature": model.temperature,
                "top_p": model.top_p,
            },
            client=self._client,
            timeout=self.timeout,
            headers=headers,
        )
        text = response.get("text")
        if not isinstance(text, str) or not text.strip():
            raise EmptyResponseError(f"model {model.id!r} returned no text")
        return text


class CachingLLMClient:
    """Caches completions by (prompt, model, temperature, top_p); an
    identical request never reaches the inner client twice."""

    def __init__(self, inner: LLMClient, cache: DiskCache):
        self.inner = inner
        self.cache = cache
        self.hits = 0
        self.misses = 0

    def complete(self, prompt: str, model: ModelConfig) -> str:
        key = stable_hash({
            "prompt": prompt,
            "model": model.id,
            "temperature": model.temperature,
            "top_p": model.top_p,
        })
        cached = self.cache.get(key)
        if cached is not None:
            self.hits += 1
            return cached["text"]
        self.misses += 1
        text = self.inner.complete(prompt, model)
        self.cache.put(key, {"text": text})
        return text


_SUBJECTS = (
    "ground crew", "the operator", "dispatch", "the captain", "the controller",
    "maintenance", "the copilot", "the supervisor", "the duty officer", "the trainee",
)
_VERBS = (
    "confirms", "requests", "reports", "acknowledges", "reads back", "queries",
    "relays", "verifies", "announces", "double-checks",
)
_OBJECTS = (
    "the holding pattern", "current conditions", "the revised clearance", "the checklist item",
    "the frequency change", "the equipment status", "the updated schedule", "the readback",
    "the staging area", "the final approach",
)
_TAILS = (
    "before the next shift", "during the morning briefing", "while traffic is heavy",
    "as the weather closes in", "right after the handover", "with the log open",
    "under reduced visibility", "on the secondary channel", "per standing orders",
    "without further delay",
)
_SCENARIO_SHAPES = (
    "routine coordination about {obj} {tail}",
    "a misunderstanding over {obj} that needs a readback",
    "training walkthrough covering {obj} {tail}",
    "an urgent update involving {obj}",
    "shift handover notes that mention {obj}",
    "equipment check where {subj} goes over {obj}",
    "a congested channel where {subj} repeats {obj}",
    "supervisor review of {obj} {tail}",
)

_RESPELL_RULES = (
    ("ck", "k"),
    ("ph", "f"),
    ("qu", "kw"),
    ("tion", "shun"),
    ("ght", "t"),
)
_VOWELS = "aeiou"


def _respell_word(word: str, rng: random.Random) -> str:
    lower = word.lower()
    if lower.endswith("ing") and len(lower) > 4:
        return lower[:-1]
    for old, new in _RESPELL_RULES:
        if old in lower:
            return lower.replace(old, new, 1)
    vowel_positions = [i for i, ch in enumerate(lower) if ch in _VOWELS]
    if vowel_positions:
        i = vowel_positions[rng.randrange(len(vowel_positions))]
        return lower[:i] + lower[i] + lower[i:]
    return lower


class MockLLM:
    """Deterministic stand-in for a text-generation service.

    Responses are a pure function of (prompt, model id, seed): word-list
    template filling for scenario/text prompts, identity translation,
    rotation-based paraphrases, and rule-based respelling. Only the prompt
    shapes of the bundled templates are recognized.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.calls = 0

    def _rng(self, prompt: str, model: ModelConfig) -> random.Random:
        digest = hashlib.sha256(
            f"{self.seed}\x1f{model.id}\x1f{prompt}".encode("utf-8")
        ).digest()
        return random.Random(int.from_bytes(digest[:8], "big"))

    @staticmethod
    def _field(prompt: str, label: str) -> str:
        match = re.search(rf"^{label}: (.*)$", prompt, flags=re.MULTILINE)
        return match.group(1).strip() if match else ""

    @staticmethod
    def _count(prompt: str) -> int:
        match = re.search(r"(?:List|Write) (\d+)|(\d+) different ways", prompt)
        if not match:
            return 1
        return int(match.group(1) or match.group(2))

    def _sentence(self, rng: random.Random, term: str | None) -> str:
        parts = [rng.choice(_SUBJECTS), rng.choice(_VERBS), rng.choice(_OBJECTS)]
        if term:
            parts.append(f"for {term}")
        parts.append(rng.choice(_TAILS))
        if rng.random() < 0.5:
            parts.append(rng.choice(("again", "now", "as briefed", "on record")))
        return " ".join(parts)

    def complete(self, prompt: str, model: ModelConfig) -> str:
        self.calls += 1
        rng = self._rng(prompt, model)
        if "distinct spoken-context scenarios" in prompt:
            count = self._count(prompt)
            term = self._field(prompt, "Key term") or None
            lines = []
            for i in range(count):
                shape = rng.choice(_SCENARIO_SHAPES)
                scenario = shape.format(
                    subj=rng.choice(_SUBJECTS), obj=rng.choice(_OBJECTS), tail=rng.choice(_TAILS)
                )
                if term:
                    scenario = f"{scenario} involving {term}"
                lines.append(f"{i + 1}. {scenario}")
            return "\n".join(lines)
        if "Write" in prompt and "sentences in" in prompt:
            count = self._count(prompt)
            term = self._field(prompt, "Key term") or None
            lines = [f"{i + 1}. {self._sentence(rng, term)}." for i in range(count)]
            return "\n".join(lines)
        if prompt.startswith("Translate the following"):
            # Identity translator: keeps every term by construction.
            return self._field(prompt, "Text")
        if "different ways" in prompt:
            count = self._count(prompt)
            source = self._field(prompt, "Utterance").rstrip(".")
            words = source.split()
            lines = []
            for i in range(count):
                shift = (i + 1) % max(1, len(words))
                rotated = words[shift:] + words[:shift]
                lines.append(f"{i + 1}. {' '.join(rotated)}.")
            return "\n".join(lines)
        if "alternative alphabetic spellings" in prompt:
            source = self._field(prompt, "Utterance")
            words = [w.strip(".,!?;:") for w in source.split()]
            return " ".join(_respell_word(w, rng) for w in words if w)
        raise EmptyResponseError("mock backend does not recognize this prompt shape")
