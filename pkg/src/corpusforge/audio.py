"""WAV duration accounting and TTS adapters.

The mock backend writes silent PCM WAVs whose length follows the same
words-per-minute heuristic the selector budgets with, so dry runs get
consistent estimated and measured durations.
"""

from __future__ import annotations

import io
import logging
import random
import shlex
import struct
import subprocess
import tempfile
import time
import wave
from pathlib import Path
from typing import Protocol, Sequence

import httpx

from .errors import AudioFormatError, TransportError
from .manifest import ManifestEntry, TrainingManifest

logger = logging.getLogger(__name__)

_PCM = 1
_IEEE_FLOAT = 3


def read_wav_duration(path: str | Path) -> float:
    """Duration in seconds of a RIFF/WAVE file with a PCM or IEEE-float
    format chunk: data-chunk frame count divided by the sample rate."""
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise AudioFormatError(f"{path}: not a RIFF/WAVE file")
    offset = 12
    fmt: tuple[int, int, int, int] | None = None
    data_size: int | None = None
    while offset + 8 <= len(raw):
        chunk_id = raw[offset:offset + 4]
        (chunk_size,) = struct.unpack_from("<I", raw, offset + 4)
        body = offset + 8
        if chunk_id == b"fmt ":
            if body + 16 > len(raw):
                raise AudioFormatError(f"{path}: truncated fmt chunk")
            audio_format, channels, sample_rate, _byte_rate, block_align, _bits = (
                struct.unpack_from("<HHIIHH", raw, body)
            )
            fmt = (audio_format, channels, sample_rate, block_align)
        elif chunk_id == b"data":
            data_size = min(chunk_size, len(raw) - body)
        offset = body + chunk_size + (chunk_size & 1)
    if fmt is None or data_size is None:
        raise AudioFormatError(f"{path}: missing fmt or data chunk")
    audio_format, _channels, sample_rate, block_align = fmt
    if audio_format not in (_PCM, _IEEE_FLOAT):
        raise AudioFormatError(f"{path}: unsupported codec (format tag {audio_format})")
    if block_align == 0 or sample_rate == 0:
        raise AudioFormatError(f"{path}: malformed fmt chunk")
    frames = data_size // block_align
    return frames / sample_rate


def silence_wav_bytes(seconds: float, sample_rate: int = 16000) -> bytes:
    """Mono 16-bit PCM silence of the requested length."""
    n_frames = max(1, round(seconds * sample_rate))
    buffer = io.BytesIO()
    with wave.open(buffer, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(sample_rate)
        wav.writeframes(b"\x00\x00" * n_frames)
    return buffer.getvalue()


class TTSBackend(Protocol):
    def synthesize(self, text: str, speaker: str) -> bytes: ...


class MockTTS:
    """Silent WAVs whose duration matches the words-per-minute heuristic."""

    def __init__(self, wpm: float = 160.0, sample_rate: int = 16000):
        self.wpm = wpm
        self.sample_rate = sample_rate

    def synthesize(self, text: str, speaker: str) -> bytes:
        words = len(text.split()) or 1
        return silence_wav_bytes(words * 60.0 / self.wpm, self.sample_rate)


class HTTPTTS:
    """HTTP adapter; wire format: ``{"text", "speaker"}`` in, WAV bytes out."""

    def __init__(self, endpoint: str, *, timeout: float = 60.0, attempts: int = 3,
                 backoff: float = 0.5, client: httpx.Client | None = None):
        self.endpoint = endpoint
        self.timeout = timeout
        self.attempts = attempts
        self.backoff = backoff
        self._client = client

    def synthesize(self, text: str, speaker: str) -> bytes:
        owned = self._client is None
        client = self._client or httpx.Client(timeout=self.timeout)
        try:
            last_error: Exception | None = None
            for attempt in range(self.attempts):
                if attempt:
                    time.sleep(self.backoff * (2 ** (attempt - 1)))
                try:
                    response = client.post(self.endpoint,
                                           json={"text": text, "speaker": speaker},
                                           timeout=self.timeout)
                except httpx.HTTPError as exc:
                    last_error = exc
                    continue
                if response.status_code >= 500:
                    last_error = TransportError(f"TTS returned {response.status_code}")
                    continue
                if response.status_code >= 400:
                    raise TransportError(f"TTS returned {response.status_code}")
                return response.content
            raise TransportError(f"TTS unreachable after {self.attempts} attempts: {last_error}")
        finally:
            if owned:
                client.close()


class SubprocessTTS:
    """Runs a command template with {text} and {out} placeholders and reads
    the WAV it writes."""

    def __init__(self, command: str):
        if "{text}" not in command or "{out}" not in command:
            raise ValueError("TTS command must contain {text} and {out} placeholders")
        self.command = command

    def synthesize(self, text: str, speaker: str) -> bytes:
        with tempfile.TemporaryDirectory() as tmp:
            out_path = Path(tmp) / "out.wav"
            argv = [
                part.replace("{text}", text).replace("{out}", str(out_path))
                for part in shlex.split(self.command)
            ]
            proc = subprocess.run(argv, capture_output=True)
            if proc.returncode != 0:
                raise TransportError(
                    f"TTS command failed ({proc.returncode}): {proc.stderr.decode()[:200]}"
                )
            if not out_path.exists():
                raise TransportError("TTS command produced no output file")
            return out_path.read_bytes()


def synthesize(
    manifest: TrainingManifest,
    tts: TTSBackend,
    audio_dir: str | Path,
    speakers: Sequence[str],
    seed: int = 0,
    audio_prefix: str = "audio",
) -> TrainingManifest:
    """Synthesize one audio file per entry. The speaker is a seeded random
    draw from the speaker list; the measured WAV duration replaces the
    estimate. Per-entry failures are recorded on the entry and the run
    continues."""
    if not speakers:
        raise ValueError("speaker list must not be empty")
    audio_dir = Path(audio_dir)
    audio_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    entries: list[ManifestEntry] = []
    for entry in manifest:
        speaker = speakers[rng.randrange(len(speakers))]
        wav_path = audio_dir / f"{entry.utterance_id}.wav"
        try:
            wav_bytes = tts.synthesize(entry.tts_text, speaker)
            wav_path.write_bytes(wav_bytes)
            duration = read_wav_duration(wav_path)
        except (TransportError, AudioFormatError, OSError) as exc:
            logger.warning("synthesis failed for %s: %s", entry.utterance_id, exc)
            entries.append(ManifestEntry(**{
                **entry.__dict__, "speaker": speaker, "error": str(exc),
            }))
            continue
        entries.append(ManifestEntry(**{
            **entry.__dict__,
            "speaker": speaker,
            "audio_path": f"{audio_prefix}/{entry.utterance_id}.wav",
            "duration_s": duration,
            "duration_source": "measured",
        }))
    return TrainingManifest(entries)
