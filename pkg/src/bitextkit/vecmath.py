"""Dense-vector primitives: normalization, cosine geometry, thresholded retrieval.

All similarity math runs in double precision. Inputs are not implicitly
normalized; providers store unit vectors, in which case dot products double
as cosines, but nothing here relies on that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, RowCountMismatch, ZeroVector
from . import kernels

# Norms below this are treated as zero (degenerate direction).
ZERO_NORM_EPS = 1e-30


def as_vector(values) -> np.ndarray:
    """Coerce to a 1-D float64 array and validate it is finite and nonempty."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ZeroVector("vector contains NaN or Inf entries")
    return v


def l2_normalize(v) -> np.ndarray:
    """Scale `v` to unit Euclidean norm, preserving direction.

    Raises ZeroVector when the norm is numerically zero.
    """
    v = as_vector(v)
    norm = float(np.linalg.norm(v))
    if norm < ZERO_NORM_EPS:
        raise ZeroVector("cannot normalize a zero vector")
    return v / norm


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between `a` and `b`, in [-1, 1]."""
    a = as_vector(a)
    b = as_vector(b)
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"dimensions differ: {a.shape[0]} vs {b.shape[0]}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na < ZERO_NORM_EPS or nb < ZERO_NORM_EPS:
        raise ZeroVector("cosine undefined for zero vectors")
    return float(np.dot(a, b) / (na * nb))


def cosine_distance(a, b) -> float:
    """1 - cosine_similarity(a, b); ranges over [0, 2]."""
    return 1.0 - cosine_similarity(a, b)


class EmbeddingMatrix:
    """N row vectors of identical dimension, each tagged with a unique id.

    Rows are stored as a C-contiguous (N, m) float64 array. NaN/Inf entries
    are rejected at construction, not at use time.
    """

    __slots__ = ("ids", "vectors", "_norms")

    def __init__(self, ids: Sequence[str], vectors) -> None:
        arr = np.ascontiguousarray(vectors, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"expected a nonempty (N, m) matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ZeroVector("matrix contains NaN or Inf entries")
        ids = tuple(str(i) for i in ids)
        if len(ids) != arr.shape[0]:
            raise RowCountMismatch(f"{len(ids)} ids for {arr.shape[0]} rows")
        if len(set(ids)) != len(ids):
            raise ValueError("row ids must be unique")
        self.ids = ids
        self.vectors = arr
        self._norms: np.ndarray | None = None

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[str, Sequence[float]]]) -> "EmbeddingMatrix":
        ids, vecs = zip(*rows)
        return cls(ids, np.array([as_vector(v) for v in vecs]))

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def row(self, index: int) -> np.ndarray:
        return self.vectors[index]

    def norms(self) -> np.ndarray:
        if self._norms is None:
            self._norms = np.linalg.norm(self.vectors, axis=1)
        return self._norms

    def index_of(self, row_id: str) -> int:
        try:
            return self.ids.index(row_id)
        except ValueError:
            raise KeyError(row_id) from None


@dataclass(frozen=True)
class Match:
    """Best-candidate retrieval result; score is the pair's cosine similarity."""

    query_index: int
    candidate_index: int
    score: float


def best_match(query, candidates: EmbeddingMatrix, threshold: float) -> Match | None:
    """Highest-cosine candidate for `query`, if it exceeds `threshold`.

    The comparison is strict (score > threshold). Ties break to the lowest
    candidate index, so results are reproducible across runs.
    """
    q = as_vector(query)
    if q.shape[0] != candidates.dim:
        raise DimensionMismatch(f"query dim {q.shape[0]} vs candidates dim {candidates.dim}")
    if float(np.linalg.norm(q)) < ZERO_NORM_EPS:
        raise ZeroVector("query vector has zero norm")
    idx, score = kernels.argmax_cosine(q[np.newaxis, :], candidates.vectors, float(threshold))
    if idx[0] < 0:
        return None
    return Match(query_index=0, candidate_index=int(idx[0]), score=float(score[0]))
