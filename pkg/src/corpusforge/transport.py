"""HTTP plumbing shared by the model adapters: retrying POSTs and a
content-addressed response cache."""

from __future__ import annotations

import hashlib
import json
import logging
import time
from pathlib import Path
from typing import Any

import httpx

from .errors import TransportError

logger = logging.getLogger(__name__)


def stable_hash(payload: Any) -> str:
    """sha256 of the canonical JSON encoding of ``payload``."""
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def post_json(
    url: str,
    payload: dict,
    *,
    client: httpx.Client | None = None,
    timeout: float = 30.0,
    attempts: int = 3,
    backoff: float = 0.5,
    headers: dict[str, str] | None = None,
) -> dict:
    """POST ``payload`` as JSON and return the decoded JSON response.

    Retries transport failures and 5xx responses with exponential backoff;
    raises :class:`TransportError` after ``attempts`` tries.
    """
    owned = client is None
    if owned:
        client = httpx.Client(timeout=timeout)
    try:
        last_error: Exception | None = None
        for attempt in range(attempts):
            if attempt:
                time.sleep(backoff * (2 ** (attempt - 1)))
            try:
                response = client.post(url, json=payload, timeout=timeout, headers=headers)
            except httpx.HTTPError as exc:
                last_error = exc
                logger.warning("POST %s failed (attempt %d/%d): %s", url, attempt + 1, attempts, exc)
                continue
            if response.status_code >= 500:
                last_error = TransportError(f"{url} returned {response.status_code}")
                logger.warning("POST %s returned %d (attempt %d/%d)",
                               url, response.status_code, attempt + 1, attempts)
                continue
            if response.status_code >= 400:
                raise TransportError(f"{url} returned {response.status_code}: {response.text[:200]}")
            try:
                return response.json()
            except ValueError as exc:
                raise TransportError(f"{url} returned non-JSON body") from exc
        raise TransportError(f"{url} unreachable after {attempts} attempts: {last_error}")
    finally:
        if owned:
            client.close()


class DiskCache:
    """Content-addressed JSON cache: one file per key, sharded by prefix."""

    def __init__(self, root: str | Path, kind: str):
        self.root = Path(root) / kind

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, key: str) -> Any | None:
        path = self._path(key)
        if not path.exists():
            return None
        with path.open("r", encoding="utf-8") as fh:
            return json.load(fh)

    def put(self, key: str, value: Any) -> None:
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with tmp.open("w", encoding="utf-8") as fh:
            json.dump(value, fh, ensure_ascii=False)
        tmp.replace(path)
