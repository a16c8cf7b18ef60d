"""End-to-end resource recommendation.

A query is projected onto the evolution map; every formula within three hops
of the anchor contributes the bilinear cross of its twelve projection
features with each resource's ranking features, weighted by the trained
matrix.  Resources are returned with their strongest hosting formula and its
evolution distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fem import FEMGraph
from .hetgraph import HetGraph, ORFConfig, orf_feature_matrix
from .l2r import L2RModel
from .lm import Document, mean_log_likelihood, tokenize
from .projection import (
    N_FEATURES,
    ProjectionResult,
    Projector,
    QueryFormula,
)


@dataclass
class QueryAttachment:
    """The online query vertices and their projection edges into the map."""

    query_formula: str
    context_attached: bool
    question_attached: bool
    projection_edges: list[tuple[str, float]]


def attach_query(query: QueryFormula,
                 projection: ProjectionResult) -> QueryAttachment:
    """Normalize projection scores into query-to-formula edge weights."""
    means = np.array([s.features.mean() for s in projection.scores])
    total = means.sum()
    if total > 0:
        weights = means / total
    else:
        weights = np.full(len(means), 1.0 / max(len(means), 1))
    edges = [(s.candidate, float(w))
             for s, w in zip(projection.scores, weights)]
    return QueryAttachment(query_formula=query.latex,
                           context_attached=bool(query.context),
                           question_attached=query.question is not None,
                           projection_edges=edges)


@dataclass
class ScoredResource:
    oer_id: str
    score: float
    hosting_formula: str
    distance: int
    type: str
    title: str
    features: np.ndarray  # summed cross matrix (projection x resource)


@dataclass
class Recommendation:
    anchor: str
    results: list[ScoredResource]
    projection: ProjectionResult
    attachment: QueryAttachment


class Recommender:
    """Joins the map, the resource graph and the trained weights."""

    def __init__(self, fem: FEMGraph, graph: HetGraph,
                 model: L2RModel | None = None,
                 orf_config: ORFConfig | None = None):
        self.fem = fem
        self.graph = graph
        self.model = model
        self.config = orf_config or ORFConfig(mu=graph.mu)
        self.projector = Projector(fem, vocabulary=graph.keywords,
                                   mu=graph.mu)
        self.oer_ids = sorted(graph.oers)
        self._static_orf: dict[str, np.ndarray] = {}
        names = self.config.feature_names()
        self._query_columns_idx = {
            "lm_paper_abstract": names.index("lm_paper_abstract"),
            "lm_paper_keywords": names.index("lm_paper_keywords"),
            "lm_weekly_topics": names.index("lm_weekly_topics"),
        }

    # -- feature assembly ---------------------------------------------------

    def weight_matrix(self) -> np.ndarray:
        if self.model is not None:
            return self.model.weights
        return np.ones((N_FEATURES, self.config.size))

    def _static_matrix(self, formula_id: str) -> np.ndarray:
        cached = self._static_orf.get(formula_id)
        if cached is None:
            _, cached = orf_feature_matrix(self.graph, formula_id,
                                           self.config, query=None)
            self._static_orf[formula_id] = cached
        return cached

    def _query_column(self, source_text: str) -> np.ndarray:
        column = np.zeros(len(self.oer_ids))
        if not source_text.strip():
            return column
        doc = Document.from_text(source_text)
        for i, rid in enumerate(self.oer_ids):
            toks = tokenize(self.graph.oers[rid].text)
            if not toks:
                continue
            value = mean_log_likelihood(toks, doc, self.graph.stats,
                                        self.config.mu)
            column[i] = math.exp(value) if math.isfinite(value) else 0.0
        return column

    def _orf_for_query(self, query: QueryFormula,
                       formula_ids) -> dict[str, np.ndarray]:
        """Per-formula resource feature matrices with the query-dependent
        likelihood columns filled in."""
        columns = {
            "lm_paper_abstract": self._query_column(query.paper_abstract),
            "lm_paper_keywords": self._query_column(
                " ".join(query.paper_keywords)),
            "lm_weekly_topics": self._query_column(
                " ".join(query.weekly_topics)),
        }
        matrices: dict[str, np.ndarray] = {}
        for fid in formula_ids:
            matrix = self._static_matrix(fid).copy()
            for name, col_idx in self._query_columns_idx.items():
                matrix[:, col_idx] = columns[name]
            matrices[fid] = matrix
        return matrices

    # -- public API -----------------------------------------------------------

    def cross_features(self, query: QueryFormula,
                       oer_ids=None) -> tuple[ProjectionResult, dict]:
        """Summed bilinear feature matrix per resource.

        Returns the projection and, for each requested resource, the matrix
        X with X[m, k] = sum over projected formulas f of FPF_m(f) * ORF_k(f, r).
        """
        projection = self.projector.project(query, top_n=None)
        orf = self._orf_for_query(query,
                                  [s.candidate for s in projection.scores])
        wanted = list(oer_ids) if oer_ids is not None else self.oer_ids
        index = {rid: i for i, rid in enumerate(self.oer_ids)}
        crosses = {rid: np.zeros((N_FEATURES, self.config.size))
                   for rid in wanted}
        for score in projection.scores:
            matrix = orf[score.candidate]
            for rid in wanted:
                row = matrix[index[rid]]
                crosses[rid] += np.outer(score.features, row)
        return projection, crosses

    def recommend(self, query: QueryFormula,
                  top_n: int = 10) -> Recommendation:
        projection = self.projector.project(query, top_n=None)
        orf = self._orf_for_query(query,
                                  [s.candidate for s in projection.scores])
        weights = self.weight_matrix()

        n_oers = len(self.oer_ids)
        contributions = np.zeros((len(projection.scores), n_oers))
        for i, score in enumerate(projection.scores):
            # fpf' W orf_row for every resource at once
            projected = weights.T @ score.features          # (K,)
            contributions[i] = orf[score.candidate] @ projected
        totals = contributions.sum(axis=0)

        order = sorted(range(n_oers),
                       key=lambda i: (-totals[i], self.oer_ids[i]))
        selected = order[:top_n]

        distance_of = {s.candidate: s.distance for s in projection.scores}
        formula_order = [s.candidate for s in projection.scores]
        results: list[ScoredResource] = []
        for i in selected:
            rid = self.oer_ids[i]
            best_row = min(
                range(len(formula_order)),
                key=lambda r: (-contributions[r, i],
                               distance_of[formula_order[r]],
                               formula_order[r]))
            hosting = formula_order[best_row]
            cross = np.zeros((N_FEATURES, self.config.size))
            for r, score in enumerate(projection.scores):
                cross += np.outer(score.features,
                                  orf[score.candidate][i])
            resource = self.graph.oers[rid]
            results.append(ScoredResource(
                oer_id=rid, score=float(totals[i]), hosting_formula=hosting,
                distance=distance_of[hosting], type=resource.type,
                title=resource.title, features=cross))
        return Recommendation(anchor=projection.anchor, results=results,
                              projection=projection,
                              attachment=attach_query(query, projection))
