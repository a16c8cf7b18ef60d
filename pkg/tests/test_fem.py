"""Evolution-map construction: relations, direction, transitions, walks,
probabilities, pruning, subgraphs, and deterministic persistence."""

import math
import random
from collections import Counter

import numpy as np
import pytest

from femkit.corpus import RawFormula, WikiPage
from femkit.errors import MissingEmbeddingError, UnknownFormulaError
from femkit.fem import (
    FEMGraph,
    FEMParams,
    FormulaVertex,
    build_fem,
    compute_generality,
    context_transition,
    determine_direction,
    evolution_probability,
    fuse_transition,
    generality_transition,
    generate_relations,
    guided_walks,
    load_fem,
    prune,
    save_fem,
    subgraph,
)
from femkit.lm import CollectionStats
from femkit.tree import TermSet, parse_latex


def vertex(fid, latex="x+y", birth=None, generality=0.0, complexity=0,
           context="", embedding=None):
    return FormulaVertex(
        formula_id=fid, latex=latex, home_pages=("p",), context=context,
        term_set=TermSet(terms=[], source_node_count=0), birth_year=birth,
        generality=generality, layout_complexity=complexity,
        embedding=embedding)


def raw(fid, pages, latex="a+b", context=""):
    return RawFormula(formula_id=fid, latex=latex, home_pages=set(pages),
                      context=context, variable_count=2, operator_count=1,
                      serialization=latex)


class TestGenerateRelations:
    def test_same_page_pair(self):
        pages = {"A": WikiPage("A", "A", "", set())}
        formulas = {"f1": raw("f1", ["A"]), "f2": raw("f2", ["A"])}
        assert generate_relations(pages, formulas) == {("f1", "f2")}

    def test_hyperlink_either_direction(self):
        pages = {"A": WikiPage("A", "A", "", {"B"}),
                 "B": WikiPage("B", "B", "", set())}
        formulas = {"f1": raw("f1", ["A"]), "f2": raw("f2", ["B"])}
        assert generate_relations(pages, formulas) == {("f1", "f2")}
        # reverse link direction gives the same undirected candidate
        pages2 = {"A": WikiPage("A", "A", "", set()),
                  "B": WikiPage("B", "B", "", {"A"})}
        assert generate_relations(pages2, formulas) == {("f1", "f2")}

    def test_unconnected_pages_no_candidate(self):
        pages = {"A": WikiPage("A", "A", "", set()),
                 "B": WikiPage("B", "B", "", set())}
        formulas = {"f1": raw("f1", ["A"]), "f2": raw("f2", ["B"])}
        assert generate_relations(pages, formulas) == set()

    def test_no_self_pairs(self):
        pages = {"A": WikiPage("A", "A", "", {"B"}),
                 "B": WikiPage("B", "B", "", set())}
        formulas = {"f1": raw("f1", ["A", "B"])}
        assert generate_relations(pages, formulas) == set()


class TestDirectionCascade:
    def test_birth_year_wins(self):
        a = vertex("a", birth=1950)
        b = vertex("b", birth=1990)
        assert determine_direction(a, b) == ("a", "b")
        assert determine_direction(b, a) == ("a", "b")

    def test_missing_year_falls_to_complexity(self):
        a = vertex("a", birth=None, complexity=10)
        b = vertex("b", birth=1990, complexity=30)
        # ratio 20/30 >= 0.1: simple evolves to complex
        assert determine_direction(a, b) == ("a", "b")

    def test_equal_years_fall_through(self):
        a = vertex("a", birth=1980, complexity=30)
        b = vertex("b", birth=1980, complexity=10)
        assert determine_direction(a, b) == ("b", "a")

    def test_close_complexity_uses_generality(self):
        a = vertex("a", complexity=20, generality=0.3)
        b = vertex("b", complexity=21, generality=0.1)
        # ratio 1/21 < 0.1: higher generality is the source
        assert determine_direction(a, b) == ("a", "b")
        assert determine_direction(b, a) == ("a", "b")

    def test_ratio_boundary_is_inclusive(self):
        # |18 - 20| / 20 = 0.1 exactly: the complexity rule applies
        a = vertex("a", complexity=18, generality=0.0)
        b = vertex("b", complexity=20, generality=1.0)
        assert determine_direction(a, b) == ("a", "b")

    def test_zero_complexity_degenerate(self):
        a = vertex("a", complexity=0, generality=0.7)
        b = vertex("b", complexity=0, generality=0.2)
        assert determine_direction(a, b) == ("a", "b")

    def test_full_tie_breaks_lexicographically(self):
        a = vertex("a", complexity=5, generality=0.5)
        b = vertex("b", complexity=5, generality=0.5)
        assert determine_direction(a, b) == ("a", "b")
        assert determine_direction(b, a) == ("a", "b")


class TestGenerality:
    def test_two_cycle(self):
        pages = {"A": WikiPage("A", "A", "", {"B"}),
                 "B": WikiPage("B", "B", "", {"A"})}
        formulas = {"f1": raw("f1", ["A"]), "f2": raw("f2", ["B"])}
        scores = compute_generality(pages, formulas)
        assert scores["f1"] == pytest.approx(0.5, abs=1e-9)
        assert scores["f2"] == pytest.approx(0.5, abs=1e-9)
        assert sum(scores.values()) == pytest.approx(1.0, abs=1e-9)

    def test_hub_receives_most(self):
        pages = {"H": WikiPage("H", "H", "", set()),
                 "L1": WikiPage("L1", "L1", "", {"H"}),
                 "L2": WikiPage("L2", "L2", "", {"H"}),
                 "L3": WikiPage("L3", "L3", "", {"H"})}
        formulas = {"hub": raw("hub", ["H"]), "a": raw("a", ["L1"]),
                    "b": raw("b", ["L2"]), "c": raw("c", ["L3"])}
        scores = compute_generality(pages, formulas)
        assert scores["hub"] == max(scores.values())


class TestTransitions:
    def test_identical_context_takes_row_maximum(self):
        contexts = ["posterior update from prior and likelihood",
                    "matrix decomposition with singular values",
                    "random walk over weighted graphs"]
        stats = CollectionStats.from_texts(contexts)
        row = context_transition(contexts[0], contexts, stats, mu=50.0)
        assert row.argmax() == 0
        assert row.sum() == pytest.approx(1.0, abs=1e-12)

    def test_generality_transition_is_source_score(self):
        assert generality_transition(vertex("a", generality=0.5)) == 0.5

    def test_fuse_constants(self):
        assert fuse_transition(0.0, 0.0, 0.0) == 0.0
        assert fuse_transition(1.0, 1.0, 1.0) == pytest.approx(
            math.tanh(3.0), abs=1e-6)
        assert fuse_transition(1.0, 1.0, 1.0) == pytest.approx(0.995055,
                                                               abs=1e-6)
        assert fuse_transition(0.5, 0.0, 0.0, (1.0, 0.0, 0.0)) == pytest.approx(
            0.462117, abs=1e-6)


class TestGuidedWalks:
    def test_single_out_edge_is_deterministic(self):
        transition = {"a": (["b"], np.array([1.0])),
                      "b": (["a"], np.array([1.0]))}
        walks = guided_walks(["a", "b"], transition, walk_length=6,
                             walks_per_vertex=2, seed=1)
        for walk in walks:
            for prev, nxt in zip(walk, walk[1:]):
                assert nxt == ("b" if prev == "a" else "a")

    def test_empirical_frequencies_match_weights(self):
        transition = {"a": (["b", "c"], np.array([0.9, 0.1])),
                      "b": (["a"], np.array([1.0])),
                      "c": (["a"], np.array([1.0]))}
        walks = guided_walks(["a"], transition, walk_length=20001,
                             walks_per_vertex=1, seed=7)
        steps = Counter()
        for walk in walks:
            for prev, nxt in zip(walk, walk[1:]):
                if prev == "a":
                    steps[nxt] += 1
        total = steps["b"] + steps["c"]
        assert total >= 10000
        assert steps["b"] / total == pytest.approx(0.9, abs=0.02)

    def test_isolated_vertex(self):
        walks = guided_walks(["solo"], {"solo": ([], np.zeros(0))},
                             walk_length=40, walks_per_vertex=3, seed=0)
        assert walks == [["solo"], ["solo"], ["solo"]]

    def test_seeded_reproducibility(self):
        transition = {"a": (["b", "c"], np.array([0.5, 0.5])),
                      "b": (["a"], np.array([1.0])),
                      "c": (["a"], np.array([1.0]))}
        first = guided_walks(["a", "b", "c"], transition, 10, 4, seed=99)
        second = guided_walks(["a", "b", "c"], transition, 10, 4, seed=99)
        assert first == second


class TestEvolutionProbability:
    def test_identical_vectors(self):
        a = vertex("a", embedding=np.array([1.0, 2.0]))
        b = vertex("b", embedding=np.array([1.0, 2.0]))
        assert evolution_probability(a, b) == pytest.approx(1.0)

    def test_opposite_vectors_clamped(self):
        a = vertex("a", embedding=np.array([1.0, 0.0]))
        b = vertex("b", embedding=np.array([-1.0, 0.0]))
        assert evolution_probability(a, b) == 0.0

    def test_orthogonal_vectors(self):
        a = vertex("a", embedding=np.array([1.0, 0.0]))
        b = vertex("b", embedding=np.array([0.0, 1.0]))
        assert evolution_probability(a, b) == 0.0

    def test_missing_embedding(self):
        a = vertex("a", embedding=None)
        b = vertex("b", embedding=np.array([1.0]))
        with pytest.raises(MissingEmbeddingError):
            evolution_probability(a, b)


def graph_from_edges(edge_probs):
    ids = sorted({v for pair in edge_probs for v in pair})
    vertices = {fid: vertex(fid) for fid in ids}
    return FEMGraph(vertices=vertices, edges=dict(edge_probs))


class TestPrune:
    def test_threshold_is_inclusive(self):
        graph = graph_from_edges({("a", "b"): 0.49, ("b", "c"): 0.5,
                                  ("c", "a"): 0.9})
        kept = prune(graph, 0.5)
        assert set(kept.edges.values()) == {0.5, 0.9}
        assert set(kept.vertices) == {"a", "b", "c"}

    def test_zero_threshold_keeps_all(self):
        graph = graph_from_edges({("a", "b"): 0.0, ("b", "c"): 0.3})
        assert prune(graph, 0.0).edges == graph.edges

    def test_above_one_removes_all(self):
        graph = graph_from_edges({("a", "b"): 1.0})
        assert prune(graph, 1.0 + 1e-9).edges == {}


class TestSubgraph:
    def test_isolated_target(self):
        graph = FEMGraph(vertices={"t": vertex("t")}, edges={})
        result = subgraph(graph, "t")
        assert result.distances == {"t": 0}
        assert result.edges == []

    def test_chain_distances(self):
        graph = graph_from_edges({("a", "b"): 1, ("b", "c"): 1,
                                  ("c", "d"): 1, ("d", "e"): 1})
        result = subgraph(graph, "c", max_depth=3)
        assert result.distances == {"a": 2, "b": 1, "c": 0, "d": 1, "e": 2}

    def test_depth_limit(self):
        graph = graph_from_edges({("a", "b"): 1, ("b", "c"): 1,
                                  ("c", "d"): 1, ("d", "e"): 1})
        result = subgraph(graph, "a", max_depth=2)
        assert set(result.distances) == {"a", "b", "c"}
        assert all(e.src in result.distances and e.dst in result.distances
                   for e in result.edges)

    def test_unknown_target(self):
        graph = graph_from_edges({("a", "b"): 1})
        with pytest.raises(UnknownFormulaError):
            subgraph(graph, "ghost")

    def test_random_graphs_match_bfs_oracle(self):
        rng = random.Random(31)
        for _ in range(20):
            n = 30
            ids = [f"v{i}" for i in range(n)]
            edges = {}
            for a in ids:
                for b in ids:
                    if a != b and rng.random() < 0.08:
                        edges[(a, b)] = rng.random()
            graph = graph_from_edges(edges) if edges else FEMGraph(
                vertices={fid: vertex(fid) for fid in ids}, edges={})
            for fid in ids:
                if fid not in graph.vertices:
                    graph.vertices[fid] = vertex(fid)
            target = rng.choice(ids)
            got = subgraph(graph, target, max_depth=3)

            # oracle: undirected breadth-first search by hand
            undirected = {v: set() for v in graph.vertices}
            for (a, b) in edges:
                undirected[a].add(b)
                undirected[b].add(a)
            expected = {target: 0}
            queue = [target]
            while queue:
                nxt = []
                for u in queue:
                    for w in undirected[u]:
                        if w not in expected and expected[u] < 3:
                            expected[w] = expected[u] + 1
                            nxt.append(w)
                queue = nxt
            assert got.distances == expected


@pytest.fixture
def tiny_inputs():
    pages = {
        "A": WikiPage("A", "Alpha topic", "", {"B"}),
        "B": WikiPage("B", "Beta topic", "", {"C"}),
        "C": WikiPage("C", "Gamma topic", "", set()),
    }
    latexes = {
        "fa": r"x^{2}+\frac{1}{a+b}",
        "fb": "a+b",
        "fc": r"\sqrt{x+y}+z",
        "fd": r"\frac{p}{q}+r^{2}",
    }
    contexts = {
        "fa": "expansion of squares with a fraction of a sum",
        "fb": "plain sum of two symbols",
        "fc": "square root of a sum plus another symbol",
        "fd": "fraction plus a square of a symbol",
    }
    homes = {"fa": ["A"], "fb": ["A"], "fc": ["B"], "fd": ["C"]}
    formulas = {}
    for fid, latex in latexes.items():
        tree = parse_latex(latex)
        formulas[fid] = RawFormula(
            formula_id=fid, latex=latex, home_pages=set(homes[fid]),
            context=contexts[fid], variable_count=2, operator_count=3,
            serialization=fid)
    return pages, formulas


class TestBuildAndPersistence:
    def test_build_is_deterministic(self, tiny_inputs):
        pages, formulas = tiny_inputs
        params = FEMParams(dim=16, walk_length=10, walks_per_vertex=4,
                           epochs=2, prune_threshold=0.0, seed=5)
        first = build_fem(pages, formulas, {"fb": 1900}, params)
        second = build_fem(pages, formulas, {"fb": 1900}, params)
        assert first.edges == second.edges

    def test_probabilities_in_unit_interval(self, tiny_inputs):
        pages, formulas = tiny_inputs
        params = FEMParams(dim=16, walk_length=10, walks_per_vertex=4,
                           epochs=2, prune_threshold=0.0, seed=5)
        graph = build_fem(pages, formulas, None, params)
        assert graph.edges, "expected candidate edges in the tiny fixture"
        for p in graph.edges.values():
            assert 0.0 <= p <= 1.0
        total_generality = sum(v.generality for v in graph.vertices.values())
        assert total_generality == pytest.approx(1.0, abs=1e-6)

    def test_save_load_roundtrip_and_bitwise_identity(self, tiny_inputs,
                                                      tmp_path):
        pages, formulas = tiny_inputs
        params = FEMParams(dim=8, walk_length=8, walks_per_vertex=3,
                           epochs=2, prune_threshold=0.0, seed=13)
        graph = build_fem(pages, formulas, {"fb": 1900}, params)
        dir_a = tmp_path / "a"
        dir_b = tmp_path / "b"
        save_fem(graph, dir_a)
        save_fem(build_fem(pages, formulas, {"fb": 1900}, params), dir_b)
        assert (dir_a / "edges.jsonl").read_bytes() == (
            dir_b / "edges.jsonl").read_bytes()
        assert (dir_a / "vertices.jsonl").read_bytes() == (
            dir_b / "vertices.jsonl").read_bytes()

        loaded = load_fem(dir_a)
        assert loaded.edges == graph.edges
        assert set(loaded.vertices) == set(graph.vertices)
        reloaded_vertex = loaded.vertices["fa"]
        assert reloaded_vertex.layout_complexity == graph.vertices[
            "fa"].layout_complexity
        np.testing.assert_allclose(reloaded_vertex.embedding,
                                   graph.vertices["fa"].embedding)
