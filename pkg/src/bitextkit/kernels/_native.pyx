# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled retrieval kernels: fused cosine + thresholded argmax.

Unlike the numpy fallback these never materialize a similarity matrix or
per-query temporaries, which is what makes them win on the many-small-
candidate-set workloads the miner produces.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "native"

cdef double _ZERO = 1e-30


cdef inline double _dot(const double* a, const double* b, Py_ssize_t m) nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t k
    for k in range(m):
        acc += a[k] * b[k]
    return acc


def argmax_cosine(const double[:, ::1] queries, const double[:, ::1] cands,
                  const double[::1] q_norms, const double[::1] c_norms,
                  double threshold):
    """Row-wise best cosine match of `queries` against all of `cands`.

    Returns (idx, score); idx is -1 (score NaN) where nothing strictly
    exceeds `threshold`. Ties break to the lowest candidate index.
    """
    cdef Py_ssize_t n_q = queries.shape[0]
    cdef Py_ssize_t n_c = cands.shape[0]
    cdef Py_ssize_t m = queries.shape[1]
    idx_arr = np.full(n_q, -1, dtype=np.int64)
    score_arr = np.full(n_q, np.nan, dtype=np.float64)
    cdef long long[::1] idx = idx_arr
    cdef double[::1] score = score_arr
    cdef Py_ssize_t i, j
    cdef double best, sim, qn
    cdef long long best_j
    with nogil:
        for i in range(n_q):
            qn = q_norms[i]
            if qn <= _ZERO:
                continue
            best = -2.0
            best_j = -1
            for j in range(n_c):
                if c_norms[j] <= _ZERO:
                    continue
                sim = _dot(&queries[i, 0], &cands[j, 0], m) / (qn * c_norms[j])
                if sim > best:
                    best = sim
                    best_j = j
            if best_j >= 0 and best > threshold:
                idx[i] = best_j
                score[i] = best
    return idx_arr, score_arr


def argmax_cosine_subsets(const double[:, ::1] queries, const double[:, ::1] cands,
                          const double[::1] q_norms, const double[::1] c_norms,
                          const long long[::1] offsets, const long long[::1] cand_idx,
                          double threshold):
    """Like argmax_cosine, but query i only sees candidate rows
    cand_idx[offsets[i]:offsets[i+1]]; ties break to the earliest listed."""
    cdef Py_ssize_t n_q = queries.shape[0]
    cdef Py_ssize_t m = queries.shape[1]
    idx_arr = np.full(n_q, -1, dtype=np.int64)
    score_arr = np.full(n_q, np.nan, dtype=np.float64)
    cdef long long[::1] idx = idx_arr
    cdef double[::1] score = score_arr
    cdef Py_ssize_t i, p
    cdef long long j, best_j
    cdef double best, sim, qn
    with nogil:
        for i in range(n_q):
            qn = q_norms[i]
            if qn <= _ZERO:
                continue
            best = -2.0
            best_j = -1
            for p in range(offsets[i], offsets[i + 1]):
                j = cand_idx[p]
                if c_norms[j] <= _ZERO:
                    continue
                sim = _dot(&queries[i, 0], &cands[j, 0], m) / (qn * c_norms[j])
                if sim > best:
                    best = sim
                    best_j = j
            if best_j >= 0 and best > threshold:
                idx[i] = best_j
                score[i] = best
    return idx_arr, score_arr
