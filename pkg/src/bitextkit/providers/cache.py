"""On-disk vector cache keyed by (model id, text hash).

Layout: one binary file per vector under <cache_dir>/<model>/<hash>.vec,
plus a JSON manifest per model directory. The per-vector file keeps the
format append-only and corruption-isolated: a bad file invalidates one
entry, never the cache.

File format (little-endian):
    bytes 0-7   magic b"BXKVEC01"
    bytes 8-11  uint32 dimension
    bytes 12-15 reserved (zero)
    bytes 16-   float32 values
"""

from __future__ import annotations

import json
import os
import re
import struct
import threading
from pathlib import Path

import numpy as np

from ..textutil import fnv1a64

MAGIC = b"BXKVEC01"
_HEADER = struct.Struct("<8sI4x")

CACHE_DIR_ENV = "BITEXT_CACHE_DIR"


def cache_key(text: str) -> str:
    return f"{fnv1a64(text):016x}"


def _safe_model_dir(model_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", model_id) or "_"


def resolve_cache_dir(configured: str | os.PathLike) -> Path:
    """Environment variable BITEXT_CACHE_DIR overrides the configured path."""
    override = os.environ.get(CACHE_DIR_ENV)
    return Path(override) if override else Path(configured)


class VectorCache:
    """Concurrent-reader / single-writer-per-key vector store.

    Values are deterministic per key, so last-write-wins on identical
    content is safe. Writes go through a temp file + rename.
    """

    def __init__(self, cache_dir: str | os.PathLike, model_id: str):
        self.model_id = model_id
        self.dir = resolve_cache_dir(cache_dir) / _safe_model_dir(model_id)
        self.dir.mkdir(parents=True, exist_ok=True)
        self._manifest_path = self.dir / "manifest.json"
        self._lock = threading.Lock()

    def _path(self, key: str) -> Path:
        return self.dir / f"{key}.vec"

    def get(self, text: str) -> np.ndarray | None:
        path = self._path(cache_key(text))
        try:
            blob = path.read_bytes()
        except FileNotFoundError:
            return None
        if len(blob) < _HEADER.size:
            return None
        magic, dim = _HEADER.unpack_from(blob)
        if magic != MAGIC or len(blob) != _HEADER.size + 4 * dim:
            return None
        return np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).astype(np.float64)

    def put(self, text: str, vector: np.ndarray) -> None:
        key = cache_key(text)
        vec32 = np.asarray(vector, dtype="<f4")
        blob = _HEADER.pack(MAGIC, vec32.shape[0]) + vec32.tobytes()
        path = self._path(key)
        tmp = path.with_suffix(f".tmp{os.getpid()}.{threading.get_ident()}")
        tmp.write_bytes(blob)
        os.replace(tmp, path)
        self._record(key, vec32.shape[0])

    def _record(self, key: str, dim: int) -> None:
        with self._lock:
            manifest = self.manifest()
            manifest["entries"][key] = {"dim": dim}
            tmp = self._manifest_path.with_suffix(f".tmp{os.getpid()}")
            tmp.write_text(json.dumps(manifest, sort_keys=True, indent=0), encoding="utf-8")
            os.replace(tmp, self._manifest_path)

    def manifest(self) -> dict:
        try:
            return json.loads(self._manifest_path.read_text(encoding="utf-8"))
        except (FileNotFoundError, json.JSONDecodeError):
            return {"model": self.model_id, "entries": {}}
