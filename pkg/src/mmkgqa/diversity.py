"""K-Means and cluster-validity indices (Silhouette, Davies-Bouldin, Dunn).

Distances are Euclidean. The pairwise loops run in the compiled kernels when
available (see ``mmkgqa._backend``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .embeddings import embed_texts
from .errors import ClusteringError, ValidationError


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    centroids: np.ndarray
    k: int
    iterations: int
    seed: int
    inertia: float
    inertia_history: list[float] = field(default_factory=list)


@dataclass
class DiversityReport:
    silhouette: float
    davies_bouldin: float
    dunn: float
    k: int
    n: int

    def as_dict(self) -> dict:
        return {
            "silhouette": self.silhouette,
            "davies_bouldin": self.davies_bouldin,
            "dunn": self.dunn,
            "k": self.k,
            "n": self.n,
        }


def _as_points(points) -> np.ndarray:
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError("points must be a 2-D array (n, dim)")
    if not np.all(np.isfinite(X)):
        raise ValidationError("points must be finite")
    return np.ascontiguousarray(X)


def _kmeanspp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = [int(rng.integers(n))]
    d2 = np.sum((X - X[centers[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total == 0:
            # every point coincides with a centre; take unused indices in order
            unused = [i for i in range(n) if i not in set(centers)]
            centers.append(unused[0])
        else:
            centers.append(int(rng.choice(n, p=d2 / total)))
        d2 = np.minimum(d2, np.sum((X - X[centers[-1]]) ** 2, axis=1))
    return X[centers].copy()


def kmeans(points, k: int, seed: int = 42, max_iter: int = 300) -> ClusterAssignment:
    """Lloyd's algorithm from a seeded k-means++ start.

    Stops when assignments stop changing or after ``max_iter`` rounds. A
    cluster left empty is reseeded on the point farthest from its current
    centroid. ``inertia_history`` holds the sum of squared distances after
    each assignment step; it never increases.
    """
    X = _as_points(points)
    n = X.shape[0]
    if k < 1:
        raise ValidationError("k must be >= 1")
    if n < k:
        raise ValidationError(f"need at least k={k} points, got {n}")
    rng = np.random.default_rng(seed)
    C = _kmeanspp(X, k, rng)
    labels, d2 = _backend.assign_labels(X, C)
    history = [float(d2.sum())]
    it = 0
    for it in range(1, max_iter + 1):
        C = _update_centroids(X, labels, d2, C)
        new_labels, d2 = _backend.assign_labels(X, C)
        history.append(float(d2.sum()))
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    return ClusterAssignment(
        labels=np.asarray(labels, dtype=np.intp),
        centroids=C,
        k=k,
        iterations=it,
        seed=seed,
        inertia=history[-1],
        inertia_history=history,
    )


def _update_centroids(X, labels, d2, C_old):
    k = C_old.shape[0]
    counts = np.bincount(labels, minlength=k)
    C = np.zeros_like(C_old)
    np.add.at(C, labels, X)
    nonempty = counts > 0
    C[nonempty] /= counts[nonempty, None]
    empty = np.flatnonzero(~nonempty)
    if empty.size:
        cost = d2.copy()
        taken: set[int] = set()
        for c in empty:
            order = np.argsort(-cost, kind="stable")
            idx = next(int(i) for i in order if int(i) not in taken)
            taken.add(idx)
            C[c] = X[idx]
            cost[idx] = -1.0
    return C


def _relabel(labels) -> tuple[np.ndarray, int]:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValidationError("labels must be 1-D")
    _, inverse = np.unique(labels, return_inverse=True)
    inverse = inverse.astype(np.intp)
    return inverse, int(inverse.max()) + 1 if inverse.size else 0


def _check(X, labels):
    if X.shape[0] != len(labels):
        raise ValidationError("labels and points differ in length")


def silhouette(points, labels) -> float:
    """Mean silhouette width; points in singleton clusters score 0."""
    X = _as_points(points)
    lab, k = _relabel(labels)
    _check(X, lab)
    if k < 2:
        raise ClusteringError("silhouette needs at least 2 clusters")
    sums = _backend.cluster_distance_sums(X, lab, k)
    counts = np.bincount(lab, minlength=k).astype(np.float64)
    n = X.shape[0]
    idx = np.arange(n)
    own = counts[lab]
    a = np.where(own > 1, sums[idx, lab] / np.maximum(own - 1, 1), 0.0)
    mean_other = sums / counts[None, :]
    mean_other[idx, lab] = np.inf
    b = mean_other.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where((own > 1) & (denom > 0), (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    return float(s.mean())


def davies_bouldin(points, labels) -> float:
    X = _as_points(points)
    lab, k = _relabel(labels)
    _check(X, lab)
    if k < 2:
        raise ClusteringError("Davies-Bouldin needs at least 2 clusters")
    counts = np.bincount(lab, minlength=k)
    C = np.zeros((k, X.shape[1]))
    np.add.at(C, lab, X)
    C /= counts[:, None]
    spread = np.zeros(k)
    np.add.at(spread, lab, np.sqrt(np.sum((X - C[lab]) ** 2, axis=1)))
    spread /= counts
    worst = np.zeros(k)
    for i in range(k):
        best = 0.0
        for j in range(k):
            if i == j:
                continue
            d = math.sqrt(float(np.sum((C[i] - C[j]) ** 2)))
            num = spread[i] + spread[j]
            if d == 0.0:
                if num == 0.0:
                    continue
                raise ClusteringError(f"clusters {i} and {j} have coincident centroids")
            best = max(best, num / d)
        worst[i] = best
    return float(worst.mean())


def dunn(points, labels) -> float:
    """Smallest single-linkage gap over largest complete-linkage diameter.

    Returns ``inf`` when every cluster has zero diameter but clusters are
    apart; raises when the ratio is 0/0.
    """
    X = _as_points(points)
    lab, k = _relabel(labels)
    _check(X, lab)
    if k < 2:
        raise ClusteringError("Dunn index needs at least 2 clusters")
    between, diameter = _backend.linkage_extremes(X, lab, k)
    gap = float(between.min())
    widest = float(diameter.max())
    if widest == 0.0:
        if gap == 0.0:
            raise ClusteringError("Dunn index undefined: zero diameter and zero separation")
        return math.inf
    return gap / widest


def diversity_report(corpus, embedder, k: int = 50, seed: int = 42, max_iter: int = 300) -> DiversityReport:
    """Embed the questions, cluster them, and score the clustering."""
    questions = [p.question if hasattr(p, "question") else str(p) for p in corpus]
    n = len(questions)
    if k > n:
        raise ValidationError(f"k={k} exceeds corpus size {n}")
    X = embed_texts(embedder, questions)
    assignment = kmeans(X, k, seed=seed, max_iter=max_iter)
    return DiversityReport(
        silhouette=silhouette(X, assignment.labels),
        davies_bouldin=davies_bouldin(X, assignment.labels),
        dunn=dunn(X, assignment.labels),
        k=k,
        n=n,
    )
