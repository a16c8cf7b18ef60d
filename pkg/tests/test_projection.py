"""Query projection: keyword extraction and the 12-feature scoring."""

import numpy as np
import pytest

from femkit.errors import EmptyMapError, NoParseError
from femkit.fem import FEMGraph, FEMParams, FormulaVertex
from femkit.projection import (
    FEATURE_NAMES,
    N_FEATURES,
    Projector,
    QueryFormula,
    extract_keywords,
    project,
)
from femkit.tree import extract_terms, parse_latex


class TestExtractKeywords:
    VOCAB = ["latent dirichlet allocation", "dirichlet", "topic model"]

    def test_longest_match_wins_without_overlap(self):
        got = extract_keywords("the latent dirichlet allocation model",
                               self.VOCAB)
        assert got == ["latent dirichlet allocation"]

    def test_empty_text(self):
        assert extract_keywords("", self.VOCAB) == []

    def test_two_disjoint_phrases_in_order(self):
        got = extract_keywords(
            "a topic model built on a dirichlet prior", self.VOCAB)
        assert got == ["topic model", "dirichlet"]

    def test_case_insensitive(self):
        got = extract_keywords("Latent Dirichlet Allocation", self.VOCAB)
        assert got == ["latent dirichlet allocation"]

    def test_empty_vocabulary(self):
        assert extract_keywords("anything", []) == []


def make_fem(chain=("f1", "f2", "f3", "f4", "f5")):
    """Chain-shaped map with distinct formulas and contexts."""
    latexes = {
        "f1": "a+b",
        "f2": "a+b+c",
        "f3": r"x^{2}+\frac{1}{a+b}",
        "f4": r"\sqrt{x^{2}+y^{2}}",
        "f5": r"\frac{u}{v}+w^{3}",
    }
    contexts = {
        "f1": "adding two quantities together",
        "f2": "sum with a third term included",
        "f3": "square plus the reciprocal of a sum",
        "f4": "euclidean norm of a plane vector",
        "f5": "ratio plus a cubed factor",
    }
    vertices = {}
    for i, fid in enumerate(chain):
        tree = parse_latex(latexes[fid])
        term_set = extract_terms(tree)
        vertices[fid] = FormulaVertex(
            formula_id=fid, latex=latexes[fid], home_pages=("p",),
            context=contexts[fid], term_set=term_set, birth_year=None,
            generality=1.0 / len(chain), layout_complexity=len(term_set.terms),
            embedding=np.ones(4))
    edges = {(chain[i], chain[i + 1]): 0.9 for i in range(len(chain) - 1)}
    return FEMGraph(vertices=vertices, edges=edges, params=FEMParams())


class TestProject:
    def test_exact_match_is_anchor_with_unit_layout_row(self):
        fem = make_fem()
        query = QueryFormula(latex=r"x^{2}+\frac{1}{a+b}",
                             context="square plus the reciprocal of a sum")
        result = project(query, fem, top_n=None)
        assert result.anchor == "f3"
        anchor_score = result.by_candidate()["f3"]
        assert anchor_score.features[4] == pytest.approx(1.0, abs=1e-9)
        assert anchor_score.distance == 0

    def test_absent_question_zeroes_rows_three_and_four(self):
        fem = make_fem()
        query = QueryFormula(latex="a+b", context="adding two quantities")
        result = project(query, fem, top_n=None)
        for score in result.scores:
            assert score.features[2] == 0.0
            assert score.features[3] == 0.0

    def test_question_fills_row_three(self):
        fem = make_fem()
        query = QueryFormula(latex="a+b", context="adding two quantities",
                             question="what is a euclidean norm")
        result = project(query, fem, top_n=None)
        assert any(s.features[2] > 0 for s in result.scores)

    def test_candidates_match_bfs_within_three_hops(self):
        fem = make_fem()
        query = QueryFormula(latex=r"x^{2}+\frac{1}{a+b}",
                             context="square plus the reciprocal of a sum")
        result = project(query, fem, top_n=None)
        # anchor f3 sits mid-chain: every vertex is within 3 hops
        got = {s.candidate: s.distance for s in result.scores}
        assert got == {"f1": 2, "f2": 1, "f3": 0, "f4": 1, "f5": 2}

    def test_feature_vector_shape_and_bounds(self):
        fem = make_fem()
        query = QueryFormula(latex="a+b+c", context="sum with a third term",
                             paper_keywords=["euclidean norm"],
                             weekly_topics=["vectors"])
        result = project(query, fem, top_n=None)
        assert len(FEATURE_NAMES) == N_FEATURES == 12
        for score in result.scores:
            assert score.features.shape == (12,)
            assert 0.0 <= score.features[4] <= 1.0
            assert 0.0 <= score.features[9] <= 1.0
            assert score.features[10] <= 1.0
            assert score.features[11] in (0.0, 1.0, 2.0, 3.0)

    def test_anchor_stability(self):
        fem = make_fem()
        query = QueryFormula(latex="a+b", context="adding two quantities")
        projector = Projector(fem)
        first = projector.project(query, top_n=None)
        second = projector.project(query, top_n=None)
        assert first.anchor == second.anchor
        for a, b in zip(first.scores, second.scores):
            np.testing.assert_array_equal(a.features, b.features)

    def test_weights_override_ranking(self):
        fem = make_fem()
        query = QueryFormula(latex=r"x^{2}+\frac{1}{a+b}",
                             context="square plus the reciprocal of a sum")
        weights = np.zeros(12)
        weights[11] = 1.0  # prefer remote candidates
        result = project(query, fem, top_n=2, weights=weights)
        assert all(s.distance == 2 for s in result.scores)

    def test_top_n_truncates(self):
        fem = make_fem()
        query = QueryFormula(latex="a+b", context="adding two quantities")
        result = project(query, fem, top_n=2)
        assert len(result.scores) == 2

    def test_bad_latex_raises_noparse(self):
        fem = make_fem()
        with pytest.raises(NoParseError):
            project(QueryFormula(latex=r"\frac{1}", context="c"), fem)

    def test_empty_map_raises(self):
        empty = FEMGraph(vertices={}, edges={})
        with pytest.raises(EmptyMapError):
            Projector(empty)
