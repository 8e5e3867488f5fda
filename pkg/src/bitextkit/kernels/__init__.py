"""Retrieval kernels with a compiled core and a numpy fallback.

The compiled extension (`bitextkit.kernels._native`, built from
_native.pyx) is preferred when importable; otherwise the numpy
implementation in `pure` takes over with identical semantics. Set
BITEXT_KERNELS=pure|native to force a backend (native raises if the
extension is missing). `benchmarks/bench_kernels.py` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

from . import pure as _pure

try:
    from . import _native as _native_mod
except ImportError:
    _native_mod = None


def available_backends() -> tuple[str, ...]:
    return ("native", "pure") if _native_mod is not None else ("pure",)


def _select(name: str | None):
    if name is None:
        name = os.environ.get("BITEXT_KERNELS", "").strip() or None
    if name is None:
        return _native_mod if _native_mod is not None else _pure
    if name == "pure":
        return _pure
    if name == "native":
        if _native_mod is None:
            raise ImportError("native kernels requested but the extension is not built")
        return _native_mod
    raise ValueError(f"unknown kernel backend {name!r} (expected 'native' or 'pure')")


_backend = _select(None)


def backend_name() -> str:
    return _backend.NAME


def set_backend(name: str | None) -> str:
    """Switch the active backend; mainly for tests and benchmarks."""
    global _backend
    _backend = _select(name)
    return _backend.NAME


def _prep(arr) -> np.ndarray:
    return np.ascontiguousarray(arr, dtype=np.float64)


def argmax_cosine(queries, cands, threshold: float, backend=None):
    """For each query row, the candidate row with maximal cosine similarity,
    provided it strictly exceeds `threshold`.

    Returns (idx, score) with idx == -1 / score == NaN where no candidate
    qualifies. Ties go to the lowest candidate index. Zero-norm queries
    never match; zero-norm candidates are skipped.
    """
    q = _prep(queries)
    c = _prep(cands)
    if q.shape[1] != c.shape[1]:
        raise ValueError(f"dimension mismatch: {q.shape[1]} vs {c.shape[1]}")
    qn = np.linalg.norm(q, axis=1)
    cn = np.linalg.norm(c, axis=1)
    mod = _backend if backend is None else _select(backend)
    return mod.argmax_cosine(q, c, qn, cn, float(threshold))


def argmax_cosine_subsets(queries, cands, offsets, cand_idx, threshold: float, backend=None):
    """argmax_cosine restricted per query i to candidate rows
    cand_idx[offsets[i]:offsets[i+1]] (ties -> earliest listed)."""
    q = _prep(queries)
    c = _prep(cands)
    if q.shape[1] != c.shape[1]:
        raise ValueError(f"dimension mismatch: {q.shape[1]} vs {c.shape[1]}")
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    cand_idx = np.ascontiguousarray(cand_idx, dtype=np.int64)
    if offsets.shape[0] != q.shape[0] + 1:
        raise ValueError("offsets must have len(queries) + 1 entries")
    qn = np.linalg.norm(q, axis=1)
    cn = np.linalg.norm(c, axis=1)
    mod = _backend if backend is None else _select(backend)
    return mod.argmax_cosine_subsets(q, c, qn, cn, offsets, cand_idx, float(threshold))
