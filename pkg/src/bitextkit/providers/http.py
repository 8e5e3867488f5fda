"""Remote embedding client: batching, disk cache, retries, rate limiting.

Wire format mirrors the common embeddings-API shape so hosted providers
plug in with a config change:

    POST {endpoint_url}
    {"model": "<model_id>", "input": ["text", ...]}
 -> {"data": [{"index": 0, "embedding": [...]}, ...]}

Authorization is a bearer token read from the EMBED_API_KEY environment
variable. Vectors are L2-normalized and quantized to float32 at ingestion
(the cache file format), so every call path returns bit-identical values.
"""

from __future__ import annotations

import os
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import EmptyText, ProviderError, TransportError, ZeroVector
from ..vecmath import EmbeddingMatrix, l2_normalize
from .cache import VectorCache

API_KEY_ENV = "EMBED_API_KEY"

# Transport: (url, json_payload, headers, timeout) -> (status_code, parsed_body)
Transport = Callable[[str, dict, dict, float], tuple[int, dict]]

_MAX_ATTEMPTS = 5
_BACKOFF_BASE = 0.5
_BACKOFF_CAP = 8.0
_RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


@dataclass(frozen=True)
class ProviderConfig:
    endpoint_url: str = ""
    model_id: str = "default-model"
    request_batch_size: int = 96
    max_concurrent_requests: int = 4
    requests_per_minute: int = 600
    cache_dir: str = ".bitext-cache"
    timeout: float = 30.0

    def __post_init__(self):
        if self.request_batch_size < 1:
            raise ValueError(f"request_batch_size must be >= 1, got {self.request_batch_size}")
        if self.max_concurrent_requests < 1:
            raise ValueError(f"max_concurrent_requests must be >= 1, got {self.max_concurrent_requests}")
        if self.requests_per_minute < 1:
            raise ValueError(f"requests_per_minute must be >= 1, got {self.requests_per_minute}")
        if self.timeout <= 0:
            raise ValueError(f"timeout must be positive, got {self.timeout}")


def requests_transport(url: str, payload: dict, headers: dict, timeout: float) -> tuple[int, dict]:
    import requests

    try:
        resp = requests.post(url, json=payload, headers=headers, timeout=timeout)
    except requests.RequestException as exc:
        raise ConnectionError(str(exc)) from exc
    try:
        body = resp.json()
    except ValueError:
        body = {"error": resp.text[:500]}
    return resp.status_code, body


class SlidingWindowRateLimiter:
    """Blocks acquire() so at most `max_per_window` calls start in any
    sliding window. Clock and sleeper are injectable for virtual-time tests."""

    def __init__(self, max_per_window: int, window_seconds: float = 60.0,
                 clock: Callable[[], float] = time.monotonic,
                 sleeper: Callable[[float], None] = time.sleep):
        self.max_per_window = max_per_window
        self.window_seconds = window_seconds
        self._clock = clock
        self._sleep = sleeper
        self._starts: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> float:
        while True:
            with self._lock:
                now = self._clock()
                while self._starts and now - self._starts[0] >= self.window_seconds:
                    self._starts.popleft()
                if len(self._starts) < self.max_per_window:
                    self._starts.append(now)
                    return now
                wait = self.window_seconds - (now - self._starts[0])
            self._sleep(max(wait, 1e-3))


class HttpEmbeddingProvider:
    """Cached, rate-limited client for a remote embedding endpoint."""

    def __init__(self, config: ProviderConfig, transport: Transport | None = None,
                 clock: Callable[[], float] = time.monotonic,
                 sleeper: Callable[[float], None] = time.sleep):
        if not config.endpoint_url:
            raise ValueError("endpoint_url is required for the http provider")
        self.config = config
        self.name = f"http({config.model_id})"
        self._transport = transport if transport is not None else requests_transport
        self._sleep = sleeper
        self._cache = VectorCache(config.cache_dir, config.model_id)
        self._limiter = SlidingWindowRateLimiter(
            config.requests_per_minute, 60.0, clock=clock, sleeper=sleeper)

    def embed(self, texts: Sequence[str]) -> EmbeddingMatrix:
        if not texts:
            raise EmptyText("no texts to embed")
        for t in texts:
            if not t.strip():
                raise EmptyText("cannot embed an empty text")

        vectors: dict[str, np.ndarray] = {}
        misses: list[str] = []
        for t in texts:
            if t in vectors:
                continue
            cached = self._cache.get(t)
            if cached is not None:
                vectors[t] = cached
            elif t not in misses:
                misses.append(t)
                vectors[t] = None  # placeholder keeps first-occurrence order

        if misses:
            batch = self.config.request_batch_size
            batches = [misses[i:i + batch] for i in range(0, len(misses), batch)]
            with ThreadPoolExecutor(max_workers=self.config.max_concurrent_requests) as pool:
                for chunk, rows in zip(batches, pool.map(self._request_batch, batches)):
                    for text, vec in zip(chunk, rows):
                        self._cache.put(text, vec)
                        vectors[text] = self._cache.get(text)

        return EmbeddingMatrix(
            [str(i) for i in range(len(texts))],
            np.stack([vectors[t] for t in texts]),
        )

    def _request_batch(self, batch: list[str]) -> list[np.ndarray]:
        payload = {"model": self.config.model_id, "input": list(batch)}
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(API_KEY_ENV)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        last_error: Exception | None = None
        for attempt in range(_MAX_ATTEMPTS):
            if attempt:
                self._sleep(min(_BACKOFF_BASE * 2 ** (attempt - 1), _BACKOFF_CAP))
            self._limiter.acquire()
            try:
                status, body = self._transport(
                    self.config.endpoint_url, payload, headers, self.config.timeout)
            except (ConnectionError, OSError, TimeoutError) as exc:
                last_error = exc
                continue
            if 200 <= status < 300:
                return self._parse_rows(body, len(batch))
            message = body.get("error") if isinstance(body, dict) else None
            if status in _RETRYABLE_STATUS:
                last_error = ProviderError(f"HTTP {status}: {message}")
                continue
            raise ProviderError(f"HTTP {status}: {message}")
        if isinstance(last_error, ProviderError):
            raise last_error
        raise TransportError(f"request failed after {_MAX_ATTEMPTS} attempts: {last_error}")

    @staticmethod
    def _parse_rows(body: dict, expected: int) -> list[np.ndarray]:
        data = body.get("data") if isinstance(body, dict) else None
        if not isinstance(data, list) or len(data) != expected:
            raise ProviderError(f"response carries {len(data) if isinstance(data, list) else 'no'} "
                                f"items, expected {expected}")
        rows: list[np.ndarray | None] = [None] * expected
        for item in data:
            try:
                rows[int(item["index"])] = np.asarray(item["embedding"], dtype=np.float64)
            except (KeyError, ValueError, TypeError, IndexError) as exc:
                raise ProviderError(f"malformed response item: {exc}") from exc
        out = []
        for row in rows:
            if row is None or row.ndim != 1 or row.size == 0:
                raise ProviderError("response is missing an embedding row")
            try:
                out.append(l2_normalize(row))
            except ZeroVector as exc:
                raise ProviderError("provider returned a zero embedding") from exc
        return out


def embed_batch(texts: Sequence[str], config: ProviderConfig,
                transport: Transport | None = None) -> EmbeddingMatrix:
    """One-shot remote embedding with the default client."""
    return HttpEmbeddingProvider(config, transport=transport).embed(texts)
