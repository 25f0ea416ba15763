# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the O(n^2) loops: LCS, pairwise cluster statistics,
nearest-centroid assignment and greedy near-duplicate selection.

Every function mirrors the one of the same name in ``_fallback.py``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


cdef inline double _dist(const double[:, ::1] X, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef Py_ssize_t t
    cdef double s = 0.0, diff
    for t in range(X.shape[1]):
        diff = X[i, t] - X[j, t]
        s += diff * diff
    return sqrt(s)


def lcs_length(a, b):
    cdef cnp.intp_t[::1] x = np.ascontiguousarray(a, dtype=np.intp)
    cdef cnp.intp_t[::1] y = np.ascontiguousarray(b, dtype=np.intp)
    if x.shape[0] < y.shape[0]:
        x, y = y, x
    cdef Py_ssize_t m = x.shape[0], n = y.shape[0], i, j
    if n == 0:
        return 0
    cdef cnp.intp_t[::1] prev = np.zeros(n + 1, dtype=np.intp)
    cdef cnp.intp_t[::1] cur = np.zeros(n + 1, dtype=np.intp)
    cdef cnp.intp_t[::1] tmp
    with nogil:
        for i in range(m):
            cur[0] = 0
            for j in range(n):
                if x[i] == y[j]:
                    cur[j + 1] = prev[j] + 1
                elif cur[j] > prev[j + 1]:
                    cur[j + 1] = cur[j]
                else:
                    cur[j + 1] = prev[j + 1]
            tmp = prev
            prev = cur
            cur = tmp
    return int(prev[n])


def cluster_distance_sums(X, labels, Py_ssize_t k):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const cnp.intp_t[::1] lab = np.ascontiguousarray(labels, dtype=np.intp)
    cdef Py_ssize_t n = Xv.shape[0], i, j
    out_arr = np.zeros((n, k), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double d
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                d = _dist(Xv, i, j)
                out[i, lab[j]] += d
                out[j, lab[i]] += d
    return out_arr


def linkage_extremes(X, labels, Py_ssize_t k):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const cnp.intp_t[::1] lab = np.ascontiguousarray(labels, dtype=np.intp)
    cdef Py_ssize_t n = Xv.shape[0], i, j, a, b
    mb_arr = np.full((k, k), np.inf)
    diam_arr = np.zeros(k)
    cdef double[:, ::1] mb = mb_arr
    cdef double[::1] diam = diam_arr
    cdef double d
    with nogil:
        for i in range(n):
            a = lab[i]
            for j in range(i + 1, n):
                b = lab[j]
                d = _dist(Xv, i, j)
                if a == b:
                    if d > diam[a]:
                        diam[a] = d
                else:
                    if d < mb[a, b]:
                        mb[a, b] = d
                        mb[b, a] = d
    return mb_arr, diam_arr


def assign_labels(X, C):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:, ::1] Cv = np.ascontiguousarray(C, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0], k = Cv.shape[0], dim = Xv.shape[1], i, c, t
    labels_arr = np.empty(n, dtype=np.intp)
    best_arr = np.empty(n, dtype=np.float64)
    cdef cnp.intp_t[::1] labels = labels_arr
    cdef double[::1] best = best_arr
    cdef double s, diff, bs
    cdef cnp.intp_t bc
    with nogil:
        for i in range(n):
            bs = INFINITY
            bc = 0
            for c in range(k):
                s = 0.0
                for t in range(dim):
                    diff = Xv[i, t] - Cv[c, t]
                    s += diff * diff
                if s < bs:
                    bs = s
                    bc = c
            labels[i] = bc
            best[i] = bs
    return labels_arr, best_arr


def greedy_select(V, double threshold):
    cdef const double[:, ::1] Vv = np.ascontiguousarray(V, dtype=np.float64)
    cdef Py_ssize_t n = Vv.shape[0], dim = Vv.shape[1], i, j, t, m = 0
    kept_arr = np.empty(n, dtype=np.intp)
    cdef cnp.intp_t[::1] kept = kept_arr
    cdef double s
    cdef bint keep
    with nogil:
        for i in range(n):
            keep = True
            for j in range(m):
                s = 0.0
                for t in range(dim):
                    s += Vv[i, t] * Vv[kept[j], t]
                if s >= threshold:
                    keep = False
                    break
            if keep:
                kept[m] = i
                m += 1
    return kept_arr[:m].copy()
