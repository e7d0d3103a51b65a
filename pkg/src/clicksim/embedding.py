"""Text embeddings for event nodes and segments.

Two providers sit behind one interface: a deterministic offline hash
embedder (tests, CI, fixtures) and a remote HTTP provider for real
embedding APIs. Results are memoized in an append-only JSONL cache keyed
by (provider, model, dimension, text), so a vector is computed at most
once per configuration; concurrent requests for the same key collapse
into a single provider call. File format and the remote wire protocol
are documented in docs/embedding.md.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .errors import ConfigError, DimensionMismatch, RemoteUnavailable
from .events import EventNode, SegmentKey

__all__ = [
    "EmbeddingConfig",
    "HashEmbeddingProvider",
    "RemoteEmbeddingProvider",
    "EmbeddingService",
    "make_provider",
]

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class EmbeddingConfig:
    provider: str = "hash"
    dimension: int = 128
    cache_path: str | None = None
    endpoint: str | None = None
    model: str | None = None
    auth_env: str = "CLICKSIM_EMBED_TOKEN"
    batch_size: int = 64
    max_retries: int = 3
    backoff_seconds: float = 0.5
    timeout_seconds: float = 30.0

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigError("embedding dimension must be >= 1")
        if self.provider not in ("hash", "remote"):
            raise ConfigError(f"unknown embedding provider {self.provider!r}")
        if self.provider == "remote" and not self.endpoint:
            raise ConfigError("remote provider requires an endpoint")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")


class EmbeddingProvider(Protocol):
    name: str
    model: str
    dimension: int

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]: ...


class HashEmbeddingProvider:
    """Signed feature hashing of lowercase alphanumeric tokens, L2 normalized.

    Token buckets and signs come from SHA-256, not the process hash, so
    vectors are stable across runs and interpreters. Text with no
    alphanumeric tokens (e.g. the canonical empty descriptor "{}") is
    hashed as one whole-text token, keeping every vector unit norm.
    """

    name = "hash"

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ConfigError("dimension must be >= 1")
        self.dimension = dimension
        self.model = f"feature-hash-{dimension}"

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self._embed_one(t) for t in texts]

    def _embed_one(self, text: str) -> np.ndarray:
        if not text:
            raise ValueError("cannot embed empty text")
        tokens = _TOKEN_RE.findall(text.lower()) or [text]
        vec = np.zeros(self.dimension)
        for token in tokens:
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            bucket = int.from_bytes(digest[:8], "big") % self.dimension
            sign = 1.0 if digest[8] & 1 else -1.0
            vec[bucket] += sign
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:  # signed collisions cancelled everything
            vec[int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big") % self.dimension] = 1.0
            norm = 1.0
        return vec / norm


class RemoteEmbeddingProvider:
    """HTTP embedding API client with batching and exponential backoff.

    POSTs ``{"model": ..., "input": [texts...]}`` and expects
    ``{"data": [{"embedding": [...]}, ...]}`` with one vector per input,
    in order. The bearer token is read from the configured environment
    variable at call time and never logged.
    """

    name = "remote"

    def __init__(self, config: EmbeddingConfig, session=None):
        if not config.endpoint:
            raise ConfigError("remote provider requires an endpoint")
        import requests

        self.dimension = config.dimension
        self.model = config.model or ""
        self._config = config
        self._session = session or requests.Session()

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        size = self._config.batch_size
        for start in range(0, len(texts), size):
            out.extend(self._post(list(texts[start : start + size])))
        return out

    def _post(self, batch: list[str]) -> list[np.ndarray]:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self._config.auth_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        payload = {"model": self.model, "input": batch}
        last_error: Exception | None = None
        for attempt in range(self._config.max_retries + 1):
            if attempt:
                time.sleep(self._config.backoff_seconds * 2 ** (attempt - 1))
            try:
                resp = self._session.post(
                    self._config.endpoint,
                    json=payload,
                    headers=headers,
                    timeout=self._config.timeout_seconds,
                )
            except Exception as exc:  # connection-level failure
                last_error = exc
                logger.warning("embedding request failed (attempt %d): %s", attempt + 1, exc)
                continue
            if resp.status_code in (429,) or resp.status_code >= 500:
                last_error = RemoteUnavailable(f"HTTP {resp.status_code}")
                logger.warning("embedding endpoint returned %d, retrying", resp.status_code)
                continue
            if resp.status_code != 200:
                raise RemoteUnavailable(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                data = resp.json()["data"]
            except (ValueError, KeyError, TypeError) as exc:
                raise RemoteUnavailable(f"malformed response body: {exc}") from exc
            if len(data) != len(batch):
                raise RemoteUnavailable(
                    f"endpoint returned {len(data)} vectors for {len(batch)} inputs"
                )
            vectors = []
            for item in data:
                vec = np.asarray(item["embedding"], dtype=float)
                if vec.shape != (self.dimension,):
                    raise DimensionMismatch(
                        f"endpoint returned dimension {vec.shape}, expected {self.dimension}"
                    )
                if not np.isfinite(vec).all():
                    raise RemoteUnavailable("endpoint returned non-finite values")
                vectors.append(vec)
            return vectors
        raise RemoteUnavailable(f"gave up after {self._config.max_retries + 1} attempts: {last_error}")


def make_provider(config: EmbeddingConfig) -> EmbeddingProvider:
    if config.provider == "hash":
        return HashEmbeddingProvider(config.dimension)
    return RemoteEmbeddingProvider(config)


class _CacheStore:
    """Append-only JSONL key/value store with an in-memory index."""

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path else None
        self._index: dict[str, np.ndarray] = {}
        if self.path and self.path.exists():
            with self.path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        entry = json.loads(line)
                        self._index[entry["k"]] = np.asarray(entry["v"], dtype=float)

    def get(self, key: str) -> np.ndarray | None:
        return self._index.get(key)

    def put(self, key: str, vector: np.ndarray) -> None:
        if key in self._index:
            return
        self._index[key] = vector
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps({"k": key, "v": vector.tolist()}) + "\n")

    def __len__(self) -> int:
        return len(self._index)


@dataclass
class EmbeddingService:
    """Cached, thread-safe embedding frontend used by every pipeline stage."""

    provider: EmbeddingProvider
    cache_path: str | Path | None = None
    _store: _CacheStore = field(init=False)
    _lock: threading.Lock = field(init=False)
    _in_flight: dict = field(init=False)

    def __post_init__(self):
        self._store = _CacheStore(self.cache_path)
        self._lock = threading.Lock()
        self._in_flight = {}

    @property
    def dimension(self) -> int:
        return self.provider.dimension

    def cache_key(self, text: str) -> str:
        material = json.dumps(
            [self.provider.name, self.provider.model, self.provider.dimension, text],
            ensure_ascii=False,
        )
        return hashlib.sha256(material.encode("utf-8")).hexdigest()

    def embed_text(self, text: str) -> np.ndarray:
        if not text:
            raise ValueError("cannot embed empty text")
        return self.embed_texts([text])[0]

    def embed_texts(self, texts: Sequence[str]) -> list[np.ndarray]:
        """Embed many texts, computing each cache miss exactly once.

        If another thread is already computing one of the keys, this
        call waits for it instead of issuing a duplicate request.
        """
        keys = [self.cache_key(t) for t in texts]
        while True:
            misses: dict[str, str] = {}
            waits = []
            with self._lock:
                for key, text in zip(keys, texts):
                    if self._store.get(key) is not None or key in misses:
                        continue
                    pending = self._in_flight.get(key)
                    if pending is not None:
                        waits.append(pending)
                    else:
                        misses[key] = text
                for key in misses:
                    self._in_flight[key] = threading.Event()
            if misses:
                try:
                    vectors = self.provider.embed_batch(list(misses.values()))
                    with self._lock:
                        for key, vec in zip(misses, vectors):
                            if vec.shape != (self.dimension,):
                                raise DimensionMismatch(
                                    f"provider returned {vec.shape}, expected ({self.dimension},)"
                                )
                            self._store.put(key, vec)
                finally:
                    with self._lock:
                        for key in misses:
                            self._in_flight.pop(key).set()
            for event in waits:
                event.wait()
            if not waits:
                break
        return [np.array(self._store.get(k), copy=True) for k in keys]

    def embed_node(self, node: EventNode) -> np.ndarray:
        return self.embed_text(node.canonical_text)

    def embed_segment(self, segment: SegmentKey) -> np.ndarray:
        return self.embed_text(segment.canonical_text)

    def embed_nodes(self, nodes) -> dict[str, np.ndarray]:
        """id -> vector map for an iterable of nodes (one batched call)."""
        nodes = list(nodes)
        vectors = self.embed_texts([n.canonical_text for n in nodes])
        return {n.id: v for n, v in zip(nodes, vectors)}

    def cache_size(self) -> int:
        return len(self._store)
