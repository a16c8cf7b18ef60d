"""Skip-gram training: gradient correctness, ascent, cluster separation."""

import numpy as np
import pytest

from femkit.skipgram import (
    pair_gradients,
    pair_objective,
    skipgram_pairs,
    train_embeddings,
)


def finite_difference(func, arr, eps=1e-6):
    grad = np.zeros_like(arr)
    flat = arr.ravel()
    out = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        plus = func()
        flat[i] = orig - eps
        minus = func()
        flat[i] = orig
        out[i] = (plus - minus) / (2 * eps)
    return grad


class TestPairGradients:
    def test_matches_central_differences(self):
        rng = np.random.default_rng(1234)
        for _ in range(100):
            dim = rng.integers(3, 12)
            center = rng.normal(size=dim)
            context = rng.normal(size=dim)
            negs = rng.normal(size=(rng.integers(1, 6), dim))

            g_center, g_context, g_negs = pair_gradients(center, context,
                                                         negs)
            fd_center = finite_difference(
                lambda: pair_objective(center, context, negs), center)
            fd_context = finite_difference(
                lambda: pair_objective(center, context, negs), context)
            fd_negs = finite_difference(
                lambda: pair_objective(center, context, negs), negs)

            for got, want in ((g_center, fd_center), (g_context, fd_context),
                              (g_negs, fd_negs)):
                # denominator floored at the finite-difference noise scale
                denom = np.maximum(np.maximum(np.abs(got), np.abs(want)),
                                   1e-4)
                assert np.max(np.abs(got - want) / denom) < 1e-4


class TestPairEnumeration:
    def test_window(self):
        walks = [["a", "b", "c", "d"]]
        index = {"a": 0, "b": 1, "c": 2, "d": 3}
        centers, contexts = skipgram_pairs(walks, index, window=1)
        pairs = set(zip(centers.tolist(), contexts.tolist()))
        assert pairs == {(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2)}

    def test_window_two(self):
        walks = [["a", "b", "c"]]
        index = {"a": 0, "b": 1, "c": 2}
        centers, _ = skipgram_pairs(walks, index, window=2)
        assert centers.size == 6


def two_clique_walks(rng, size=10, walks_per_vertex=30, length=8):
    """Dense walks inside each of two disjoint cliques."""
    cliques = [[f"a{i}" for i in range(size)], [f"b{i}" for i in range(size)]]
    walks = []
    for members in cliques:
        for start in members:
            for _ in range(walks_per_vertex):
                walk = [start]
                for _ in range(length - 1):
                    walk.append(members[rng.integers(0, size)])
                walks.append(walk)
    return walks, cliques


class TestTraining:
    def test_two_cluster_separation(self):
        rng = np.random.default_rng(7)
        walks, (left, right) = two_clique_walks(rng)
        model = train_embeddings(walks, dim=32, window=3, negatives=5,
                                 epochs=3, seed=11)

        def cosine(u, v):
            return float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))

        intra, inter = [], []
        for i, u in enumerate(left):
            for v in left[i + 1:]:
                intra.append(cosine(model[u], model[v]))
            for v in right:
                inter.append(cosine(model[u], model[v]))
        assert np.mean(intra) > np.mean(inter)

    def test_objective_non_decreasing_smoothed(self):
        rng = np.random.default_rng(3)
        walks, _ = two_clique_walks(rng, size=6, walks_per_vertex=10,
                                    length=6)
        model = train_embeddings(walks, dim=16, window=5, negatives=3,
                                 epochs=12, learning_rate=0.01, seed=5)
        history = np.asarray(model.objective_history)
        smoothed = np.convolve(history, np.ones(5) / 5, mode="valid")
        assert np.all(np.diff(smoothed) >= -1e-9)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(9)
        walks, _ = two_clique_walks(rng, size=4, walks_per_vertex=4, length=5)
        a = train_embeddings(walks, dim=8, epochs=2, seed=21)
        b = train_embeddings(walks, dim=8, epochs=2, seed=21)
        for vertex in a.vectors:
            np.testing.assert_array_equal(a[vertex], b[vertex])

    def test_single_vertex_walks(self):
        model = train_embeddings([["only"]], dim=4, seed=0)
        assert set(model.vectors) == {"only"}

    def test_no_walks_rejected(self):
        with pytest.raises(ValueError):
            train_embeddings([])
