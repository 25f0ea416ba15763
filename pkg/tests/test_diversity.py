import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmkgqa.diversity import davies_bouldin, diversity_report, dunn, kmeans, silhouette
from mmkgqa.errors import ClusteringError, ValidationError

from oracles import FIXTURES, davies_bouldin_ref, dunn_ref, inertia_ref, silhouette_ref


def blobs(rng, centers, n=20, scale=0.1):
    pts = np.vstack([rng.normal(c, scale, size=(n, len(c))) for c in centers])
    truth = np.repeat(np.arange(len(centers)), n)
    return pts, truth


def random_instances(count=25, seed=3):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(12, 200))
        k = int(rng.integers(2, 11))
        dim = int(rng.integers(1, 6))
        X = rng.normal(size=(n, dim))
        labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
        rng.shuffle(labels)
        yield X, labels


def test_indices_match_brute_force(backend):
    for X, labels in random_instances():
        assert abs(silhouette(X, labels) - silhouette_ref(X, labels)) <= 1e-9
        assert abs(davies_bouldin(X, labels) - davies_bouldin_ref(X, labels)) <= 1e-9
        assert abs(dunn(X, labels) - dunn_ref(X, labels)) <= 1e-9


def test_kmeans_single_cluster():
    X = np.random.default_rng(0).normal(size=(30, 3))
    a = kmeans(X, 1)
    assert set(a.labels) == {0}
    assert np.allclose(a.centroids[0], X.mean(axis=0))


def test_kmeans_recovers_planted_blobs(backend):
    X, truth = blobs(np.random.default_rng(1), [(0, 0), (10, 10)])
    a = kmeans(X, 2, seed=5)
    agree = (a.labels == truth).mean()
    assert agree in (0.0, 1.0)


def test_kmeans_k_equals_n_has_zero_inertia():
    X = np.random.default_rng(2).normal(size=(9, 2))
    a = kmeans(X, 9)
    assert sorted(a.labels) == list(range(9))
    assert a.inertia == pytest.approx(0.0, abs=1e-12)


def test_kmeans_invariants(backend):
    for seed in range(5):
        X = np.random.default_rng(seed).normal(size=(150, 4))
        a = kmeans(X, 7, seed=seed)
        h = a.inertia_history
        assert all(h[i + 1] <= h[i] + 1e-9 for i in range(len(h) - 1))
        assert a.inertia == pytest.approx(inertia_ref(X, a.labels, a.centroids), rel=1e-9)
        assert all(0 <= lab < 7 for lab in a.labels)
        for c in range(7):
            members = X[a.labels == c]
            if len(members):
                assert np.allclose(a.centroids[c], members.mean(axis=0))
        b = kmeans(X, 7, seed=seed)
        assert np.array_equal(a.labels, b.labels)


def test_kmeans_repairs_empty_clusters():
    X = np.array([[0.0, 0]] * 5 + [[1.0, 1]] * 5 + [[5.0, 5]])
    a = kmeans(X, 3, seed=0)
    assert len(set(a.labels)) == 3


def test_kmeans_validation():
    with pytest.raises(ValidationError):
        kmeans(np.zeros((2, 2)), 3)
    with pytest.raises(ValidationError):
        kmeans(np.zeros((2, 2)), 0)
    with pytest.raises(ValidationError):
        kmeans([1, 2, 3], 1)
    with pytest.raises(ValidationError):
        kmeans([[np.nan, 0]], 1)


def test_silhouette_examples():
    X, truth = blobs(np.random.default_rng(4), [(0, 0), (50, 50)], scale=0.5)
    assert silhouette(X, truth) > 0.9
    one, _ = blobs(np.random.default_rng(5), [(0, 0)], n=200)
    split = np.random.default_rng(6).integers(0, 2, size=200)
    assert abs(silhouette(one, split)) < 0.05
    assert silhouette(one, split) == pytest.approx(silhouette_ref(one, split), abs=1e-9)
    with pytest.raises(ClusteringError):
        silhouette(X, np.zeros(len(X)))


def test_davies_bouldin_examples():
    rng = np.random.default_rng(7)
    shape = rng.normal(0, 1, size=(20, 2))
    near = np.vstack([shape, shape + [5, 0]])
    far = np.vstack([shape, shape + [15, 0]])
    labels = np.repeat([0, 1], 20)
    assert davies_bouldin(far, labels) < davies_bouldin(near, labels)
    assert davies_bouldin([[0, 0], [9, 9], [30, 1]], [0, 1, 2]) == 0.0
    with pytest.raises(ClusteringError):
        davies_bouldin([[0, 0], [2, 2], [0, 0], [2, 2], [1, 1]], [0, 0, 1, 1, 2])


def test_dunn_examples():
    rng = np.random.default_rng(8)
    shape = rng.normal(0, 1, size=(20, 2))
    labels = np.repeat([0, 1], 20)
    assert dunn(np.vstack([shape, shape + [6, 0]]), labels) < dunn(np.vstack([shape, shape + [20, 0]]), labels)
    with pytest.raises(ClusteringError):
        dunn(np.ones((4, 2)), [0, 0, 1, 1])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.floats(-50, 50), min_size=3, max_size=3))
def test_indices_invariant_to_translation_and_relabel(seed, shift):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 3))
    labels = np.arange(40) % 4
    perm = rng.permutation(4)
    Y = X + np.array(shift)
    relabelled = perm[labels]
    for f in (silhouette, davies_bouldin, dunn):
        base = f(X, labels)
        assert f(Y, labels) == pytest.approx(base, rel=1e-6, abs=1e-9)
        assert f(X, relabelled) == pytest.approx(base, rel=1e-12, abs=1e-12)
    s = silhouette(X, labels)
    assert -1 <= s <= 1 and davies_bouldin(X, labels) >= 0 and dunn(X, labels) >= 0


def _questions(name):
    lines = (FIXTURES / "diversity" / name).read_text().splitlines()
    return [json.loads(l)["question"] for l in lines if l.strip()]


def test_augmented_corpus_is_more_diverse(embedder):
    t = diversity_report(_questions("template.jsonl"), embedder, k=8, seed=42)
    a = diversity_report(_questions("augmented.jsonl"), embedder, k=8, seed=42)
    assert t.n == a.n == 160
    assert a.silhouette > t.silhouette
    assert a.davies_bouldin < t.davies_bouldin


def test_report_rejects_k_above_n(embedder):
    with pytest.raises(ValidationError):
        diversity_report(["a b", "c d"], embedder, k=3)
