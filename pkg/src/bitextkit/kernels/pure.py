"""Pure-numpy retrieval kernels; the fallback when the extension is absent.

Semantics must match bitextkit.kernels._native exactly: strict `>` against
the threshold, first maximum wins (lowest index), zero-norm rows never
match any query and never win as candidates.
"""

from __future__ import annotations

import numpy as np

NAME = "pure"

_ZERO = 1e-30


def argmax_cosine(queries, cands, q_norms, c_norms, threshold):
    """Row-wise best cosine match of `queries` against all of `cands`.

    Returns (idx, score) int64/float64 arrays of length len(queries);
    idx is -1 (score NaN) where no candidate strictly exceeds `threshold`.
    """
    n_q = queries.shape[0]
    idx = np.full(n_q, -1, dtype=np.int64)
    score = np.full(n_q, np.nan, dtype=np.float64)
    valid_c = c_norms > _ZERO
    if not valid_c.any():
        return idx, score
    inv_c = np.where(valid_c, 1.0 / np.where(valid_c, c_norms, 1.0), 0.0)
    for i in range(n_q):
        qn = q_norms[i]
        if qn <= _ZERO:
            continue
        sims = (cands @ queries[i]) * (inv_c / qn)
        sims[~valid_c] = -np.inf
        j = int(np.argmax(sims))
        if sims[j] > threshold:
            idx[i] = j
            score[i] = sims[j]
    return idx, score


def argmax_cosine_subsets(queries, cands, q_norms, c_norms, offsets, cand_idx, threshold):
    """Like argmax_cosine, but query i only sees candidate rows
    cand_idx[offsets[i]:offsets[i+1]]; ties break to the earliest listed."""
    n_q = queries.shape[0]
    idx = np.full(n_q, -1, dtype=np.int64)
    score = np.full(n_q, np.nan, dtype=np.float64)
    for i in range(n_q):
        qn = q_norms[i]
        sub = cand_idx[offsets[i] : offsets[i + 1]]
        if qn <= _ZERO or sub.size == 0:
            continue
        cn = c_norms[sub]
        valid = cn > _ZERO
        if not valid.any():
            continue
        sims = (cands[sub] @ queries[i]) / (np.where(valid, cn, 1.0) * qn)
        sims[~valid] = -np.inf
        k = int(np.argmax(sims))
        if sims[k] > threshold:
            idx[i] = int(sub[k])
            score[i] = sims[k]
    return idx, score
