"""Interpreted (numpy/scipy) versions of the hot kernels.

Signatures match ``_kernels.pyx``; integer results are identical and float
results agree to rounding. ``mmkgqa._backend`` picks one at import time.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

# rows per block when materialising pairwise distances
_BLOCK = 256


def _block_distances(X: np.ndarray, start: int, stop: int) -> np.ndarray:
    return cdist(X[start:stop], X)


def lcs_length(a, b) -> int:
    """Length of the longest common subsequence of two int sequences."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            if x == y:
                cur.append(prev[j] + 1)
            else:
                cur.append(cur[j] if cur[j] > prev[j + 1] else prev[j + 1])
        prev = cur
    return prev[-1]


def cluster_distance_sums(X: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """``out[i, c]`` = sum of Euclidean distances from point i to members of cluster c."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.intp)
    n = X.shape[0]
    out = np.zeros((n, k), dtype=np.float64)
    onehot = np.zeros((n, k), dtype=np.float64)
    onehot[np.arange(n), labels] = 1.0
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        out[start:stop] = _block_distances(X, start, stop) @ onehot
    return out


def linkage_extremes(X: np.ndarray, labels: np.ndarray, k: int):
    """Single-linkage distances between clusters and complete-linkage diameters.

    Returns ``(min_between, diameter)`` where ``min_between`` is a k x k
    matrix (``inf`` on the diagonal) and ``diameter`` has length k.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.intp)
    n = X.shape[0]
    min_between = np.full((k, k), np.inf)
    diameter = np.zeros(k)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        D = _block_distances(X, start, stop)
        for row, i in enumerate(range(start, stop)):
            li = labels[i]
            d = D[row]
            same = labels == li
            if same.any():
                diameter[li] = max(diameter[li], d[same].max())
            per_cluster = np.full(k, np.inf)
            np.minimum.at(per_cluster, labels[~same], d[~same])
            np.minimum(min_between[li], per_cluster, out=min_between[li])
    min_between = np.minimum(min_between, min_between.T)
    np.fill_diagonal(min_between, np.inf)
    return min_between, diameter


def assign_labels(X: np.ndarray, C: np.ndarray):
    """Nearest centroid per point (lowest index on ties) and squared distance."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    n = X.shape[0]
    labels = np.empty(n, dtype=np.intp)
    best = np.empty(n, dtype=np.float64)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        d2 = cdist(X[start:stop], C, "sqeuclidean")
        idx = np.argmin(d2, axis=1)
        labels[start:stop] = idx
        best[start:stop] = d2[np.arange(stop - start), idx]
    return labels, best


def greedy_select(V: np.ndarray, threshold: float) -> np.ndarray:
    """Indices kept by a keep-first sweep: row i survives if its dot product
    with every earlier survivor is below ``threshold``."""
    V = np.ascontiguousarray(V, dtype=np.float64)
    n, d = V.shape
    kept = np.empty((n, d), dtype=np.float64)
    out = []
    m = 0
    for i in range(n):
        v = V[i]
        if m and float((kept[:m] @ v).max()) >= threshold:
            continue
        kept[m] = v
        m += 1
        out.append(i)
    return np.asarray(out, dtype=np.intp)
