"""Builders for end-to-end pipeline fixtures: a config file plus the input
artifacts the stages consume."""

from __future__ import annotations

import json
from pathlib import Path

import yaml

SEED_TERMS = ["wilco", "apron", "holdpoint", "taxiway", "readback"]


def base_config(**overrides) -> dict:
    cfg = {
        "paths": {
            "output_dir": "out",
            "cache_dir": "cache",
            "eval_transcripts": "data/eval_transcripts.jsonl",
            "reference_vocab": "data/reference_vocab.txt",
            "terms": "data/seed_terms.tsv",
            "reference": "data/ref.jsonl",
            "hypothesis": "data/hyp.jsonl",
        },
        "generation": {
            "domain_seed": "airfield ground operations",
            "scenario_multiplier": 2,
            "prompt_languages": ["en", "ja"],
            "sentences_per_prompt": 3,
            "models": [
                {"id": "mock-alpha"},
                {"id": "mock-beta", "temperature": 0.7, "top_p": 0.8},
            ],
        },
        "selection": {
            "weights": "6:3:1",
            "budget": {"kind": "duration", "seconds": 300.0},
            "speaking_rate_wpm": 160.0,
        },
        "lm": {"order": 2, "k": 0.1},
        "embedding": {"mock_dim": 16},
        "respell": {"ratio": 0.6},
        "seed": 1234,
    }
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(cfg.get(key), dict):
            cfg[key].update(value)
        else:
            cfg[key] = value
    return cfg


def write_fixture(root: Path, **overrides) -> Path:
    """Create config + input files under ``root``; returns the config path."""
    data = root / "data"
    data.mkdir(parents=True, exist_ok=True)

    (data / "seed_terms.tsv").write_text(
        "".join(f"{term}\t3\n" for term in SEED_TERMS), encoding="utf-8"
    )

    transcripts = [
        {"id": "t0", "text": "wilco holding at the apron"},
        {"id": "t1", "text": "wilco taxiway charlie to the holdpoint"},
        {"id": "t2", "text": "readback correct proceed to apron"},
        {"id": "t3", "text": "holdpoint two one ready for readback"},
        {"id": "t4", "text": "singleton appears once only"},
    ]
    with (data / "eval_transcripts.jsonl").open("w", encoding="utf-8") as fh:
        for record in transcripts:
            fh.write(json.dumps(record) + "\n")

    (data / "reference_vocab.txt").write_text(
        "\n".join(["the", "at", "to", "two", "one", "ready", "for", "correct",
                   "proceed", "holding", "charlie", "singleton", "appears",
                   "once", "only"]) + "\n",
        encoding="utf-8",
    )

    ref = [
        {"id": "u0", "text": "contact tower on final"},
        {"id": "u1", "text": "wilco holding short"},
    ]
    hyp = [
        {"id": "u0", "text": "contact the tower final"},
        {"id": "u1", "text": "wilco holding short"},
    ]
    for name, rows in (("ref.jsonl", ref), ("hyp.jsonl", hyp)):
        with (data / name).open("w", encoding="utf-8") as fh:
            for record in rows:
                fh.write(json.dumps(record) + "\n")

    cfg = base_config(**overrides)
    config_path = root / "config.yaml"
    config_path.write_text(yaml.safe_dump(cfg, sort_keys=False), encoding="utf-8")
    return config_path
