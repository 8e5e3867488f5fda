"""Precomputed-embedding files: TSV with columns id, text, base64 vector.

Vector payloads are little-endian float32, base64-encoded. Lines starting
with '#' are ignored so files may carry a reproducibility header.
"""

from __future__ import annotations

import base64
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..errors import EmptyText, ProviderError, SchemaError
from ..vecmath import EmbeddingMatrix


def encode_vector(vector: np.ndarray) -> str:
    return base64.b64encode(np.asarray(vector, dtype="<f4").tobytes()).decode("ascii")


def decode_vector(payload: str) -> np.ndarray:
    try:
        raw = base64.b64decode(payload.encode("ascii"), validate=True)
    except (ValueError, UnicodeEncodeError) as exc:
        raise SchemaError(f"invalid base64 vector payload: {exc}") from exc
    if not raw or len(raw) % 4:
        raise SchemaError(f"vector payload has {len(raw)} bytes, not a float32 multiple")
    return np.frombuffer(raw, dtype="<f4").astype(np.float64)


def write_embedding_tsv(path, rows: Iterable[tuple[str, str, np.ndarray]],
                        header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        for row_id, text, vec in rows:
            clean = " ".join(text.split())
            fh.write(f"{row_id}\t{clean}\t{encode_vector(vec)}\n")


def read_embedding_tsv(path) -> list[tuple[str, str, np.ndarray]]:
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise SchemaError(f"{path}:{lineno}: expected 3 tab-separated columns, got {len(parts)}")
        rows.append((parts[0], parts[1], decode_vector(parts[2])))
    if not rows:
        raise SchemaError(f"{path}: no vector rows")
    return rows


def load_embedding_matrix(path) -> EmbeddingMatrix:
    rows = read_embedding_tsv(path)
    return EmbeddingMatrix([r[0] for r in rows], np.stack([r[2] for r in rows]))


class FileEmbeddingProvider:
    """Serves embeddings for known texts from a precomputed TSV file."""

    def __init__(self, path):
        self.path = str(path)
        self.name = f"file({Path(path).name})"
        self._by_text: dict[str, np.ndarray] = {}
        for _, text, vec in read_embedding_tsv(path):
            self._by_text.setdefault(text, vec)

    def embed(self, texts: Sequence[str]) -> EmbeddingMatrix:
        if not texts:
            raise EmptyText("no texts to embed")
        vecs = []
        for t in texts:
            if not t.strip():
                raise EmptyText("cannot embed an empty text")
            key = " ".join(t.split())
            if key not in self._by_text:
                raise ProviderError(f"no precomputed vector for text: {t[:80]!r}")
            vecs.append(self._by_text[key])
        return EmbeddingMatrix([str(i) for i in range(len(texts))], np.stack(vecs))
