"""PageRank against an independent power-iteration oracle."""

import random

import pytest

from femkit.errors import EmptyGraphError
from femkit.pagerank import pagerank


def oracle_pagerank(nodes, edges, damping=0.85, iterations=500):
    """Straight textbook power iteration, written independently: scores as a
    dict, per-step dangling redistribution, uniform teleport."""
    nodes = sorted(nodes)
    n = len(nodes)
    out = {u: [] for u in nodes}
    for src, dst in edges:
        if src in out and dst in out:
            out[src].append(dst)
    scores = {u: 1.0 / n for u in nodes}
    for _ in range(iterations):
        new = {u: 0.0 for u in nodes}
        dangling = sum(scores[u] for u in nodes if not out[u])
        for u in nodes:
            if out[u]:
                share = scores[u] / len(out[u])
                for v in out[u]:
                    new[v] += share
        for u in nodes:
            new[u] = damping * (new[u] + dangling / n) + (1 - damping) / n
        scores = new
    total = sum(scores.values())
    return {u: s / total for u, s in scores.items()}


def random_graph(rng, n=50, p=0.08):
    nodes = [f"v{i}" for i in range(n)]
    edges = [(a, b) for a in nodes for b in nodes
             if a != b and rng.random() < p]
    return nodes, edges


class TestPagerank:
    def test_two_cycle_is_symmetric(self):
        scores = pagerank(["a", "b"], [("a", "b"), ("b", "a")])
        assert scores["a"] == pytest.approx(0.5, abs=1e-9)
        assert scores["b"] == pytest.approx(0.5, abs=1e-9)

    def test_star_matches_oracle(self):
        nodes = ["hub", "l1", "l2", "l3"]
        edges = [("l1", "hub"), ("l2", "hub"), ("l3", "hub")]
        got = pagerank(nodes, edges)
        expected = oracle_pagerank(nodes, edges)
        for node in nodes:
            assert got[node] == pytest.approx(expected[node], abs=1e-6)
        assert got["hub"] == max(got.values())

    def test_no_inlinks_vertex(self):
        nodes = ["a", "b", "c"]
        edges = [("a", "b"), ("b", "a")]
        got = pagerank(nodes, edges)
        expected = oracle_pagerank(nodes, edges)
        # per-component agreement within the iteration's own stopping rule
        assert got["c"] == pytest.approx(expected["c"], abs=1e-7)

    def test_random_graphs_match_oracle(self):
        rng = random.Random(42)
        for _ in range(20):
            nodes, edges = random_graph(rng)
            got = pagerank(nodes, edges)
            expected = oracle_pagerank(nodes, edges)
            l1 = sum(abs(got[u] - expected[u]) for u in nodes)
            assert l1 <= 1e-6
            assert sum(got.values()) == pytest.approx(1.0, abs=1e-6)

    def test_empty_graph_raises(self):
        with pytest.raises(EmptyGraphError):
            pagerank([], [])

    def test_personalized_teleport_prefers_seed(self):
        nodes = ["a", "b", "c", "d"]
        edges = [("a", "b"), ("b", "c"), ("c", "a"), ("d", "a")]
        plain = pagerank(nodes, edges)
        seeded = pagerank(nodes, edges, personalization={"d": 1.0})
        assert seeded["d"] > plain["d"]
        assert sum(seeded.values()) == pytest.approx(1.0, abs=1e-9)
