"""Training manifest: the line-oriented record pairing TTS input text, the
canonical ASR target, and (once synthesized) audio paths and measured
durations. This is what downstream fine-tuning consumes; the toolkit itself
never trains."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path


@dataclass(frozen=True)
class ManifestEntry:
    utterance_id: str
    tts_text: str
    asr_target: str
    respelled: bool = False
    lang: str = "en"
    duration_s: float = 0.0
    duration_source: str = "estimated"
    audio_path: str | None = None
    speaker: str | None = None
    error: str | None = None
    split: str | None = None

    def to_dict(self) -> dict:
        record = {
            "utterance_id": self.utterance_id,
            "tts_text": self.tts_text,
            "asr_target": self.asr_target,
            "respelled": self.respelled,
            "lang": self.lang,
            "duration_s": self.duration_s,
            "duration_source": self.duration_source,
            "audio_path": self.audio_path,
        }
        for key in ("speaker", "error", "split"):
            value = getattr(self, key)
            if value is not None:
                record[key] = value
        return record

    @classmethod
    def from_dict(cls, record: dict) -> "ManifestEntry":
        allowed = {k: record[k] for k in cls.__dataclass_fields__ if k in record}
        return cls(**allowed)


@dataclass
class TrainingManifest:
    entries: list[ManifestEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def total_duration_s(self) -> float:
        return sum(e.duration_s for e in self.entries)

    def respelled_fraction(self) -> float:
        if not self.entries:
            return 0.0
        return sum(1 for e in self.entries if e.respelled) / len(self.entries)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            for entry in self.entries:
                fh.write(json.dumps(entry.to_dict(), ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "TrainingManifest":
        entries = []
        with Path(path).open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    entries.append(ManifestEntry.from_dict(json.loads(line)))
        return cls(entries)

    def with_entry_replaced(self, index: int, **changes) -> None:
        self.entries[index] = replace(self.entries[index], **changes)
