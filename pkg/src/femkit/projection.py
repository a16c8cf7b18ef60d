"""Projecting a math-information need onto the evolution map.

A query (formula + context, optionally a question and reading-paper
metadata) is scored against every map vertex with twelve features: seven
likelihood rows, a layout-similarity row, and four evolution rows computed
relative to the best direct-match vertex (the anchor).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tree as formula_tree
from .errors import EmptyMapError, NoParseError, ParseError
from .fem import FEMGraph, subgraph
from .lm import DEFAULT_MU, CollectionStats, Document, likelihood_row, tokenize

FEATURE_NAMES = (
    "context_likelihood",
    "context_keyword_likelihood",
    "question_likelihood",
    "question_keyword_likelihood",
    "layout_similarity",
    "abstract_likelihood",
    "paper_keyword_likelihood",
    "weekly_topic_likelihood",
    "anchor_context_likelihood",
    "anchor_layout_similarity",
    "candidate_generality",
    "evolution_distance",
)

N_FEATURES = len(FEATURE_NAMES)
MAX_PROJECTION_HOPS = 3


@dataclass
class QueryFormula:
    latex: str
    context: str
    question: str | None = None
    paper_abstract: str = ""
    paper_keywords: list[str] = field(default_factory=list)
    weekly_topics: list[str] = field(default_factory=list)


@dataclass
class ProjectionScore:
    candidate: str
    features: np.ndarray  # the 12 rows, in FEATURE_NAMES order
    anchor: str
    distance: int


@dataclass
class ProjectionResult:
    anchor: str
    scores: list[ProjectionScore]

    def by_candidate(self) -> dict[str, ProjectionScore]:
        return {s.candidate: s for s in self.scores}


def extract_keywords(text: str, vocabulary) -> list[str]:
    """Longest-match, non-overlapping, case-insensitive phrase matching.

    Returns the matched vocabulary entries in document order; at each word
    position the longest matching phrase wins and matching resumes after it.
    """
    words = tokenize(text)
    if not words or not vocabulary:
        return []
    phrases: dict[tuple[str, ...], str] = {}
    for entry in vocabulary:
        key = tuple(tokenize(entry))
        if key:
            phrases.setdefault(key, entry)
    if not phrases:
        return []
    max_len = max(len(key) for key in phrases)
    matches: list[str] = []
    i = 0
    while i < len(words):
        hit = None
        for length in range(min(max_len, len(words) - i), 0, -1):
            candidate = tuple(words[i:i + length])
            if candidate in phrases:
                hit = phrases[candidate]
                i += length
                break
        if hit is None:
            i += 1
        else:
            matches.append(hit)
    return matches


class Projector:
    """Precomputes per-map statistics so repeated queries stay cheap."""

    def __init__(self, fem: FEMGraph, vocabulary=(), mu: float = DEFAULT_MU):
        if not fem.vertices:
            raise EmptyMapError("the evolution map has no vertices")
        self.fem = fem
        self.vocabulary = list(vocabulary)
        self.mu = mu
        self.ids = sorted(fem.vertices)
        self.stats = CollectionStats.from_texts(
            fem.vertices[fid].context for fid in self.ids)
        self.docs = [Document.from_text(fem.vertices[fid].context)
                     for fid in self.ids]

    # -- row helpers -------------------------------------------------------

    def _likelihood(self, text: str, docs) -> np.ndarray:
        query = tokenize(text)
        if not query:
            return np.zeros(len(docs))
        return likelihood_row(query, docs, self.stats, self.mu)

    def _keyword_sum(self, keywords, docs) -> np.ndarray:
        total = np.zeros(len(docs))
        for keyword in keywords:
            total += self._likelihood(keyword, docs)
        return total

    # -- projection ----------------------------------------------------------

    def project(self, query: QueryFormula, top_n: int | None = 10,
                weights=None,
                max_hops: int = MAX_PROJECTION_HOPS) -> ProjectionResult:
        """Score the query against the map and return ranked candidates
        within `max_hops` of the anchor.

        Candidates are ordered by `weights` (a 12-vector) when given, else
        by the uniform mean of the feature rows.  `top_n=None` keeps all.
        """
        try:
            parsed = formula_tree.parse_latex(query.latex)
        except ParseError as exc:
            raise NoParseError(str(exc), exc.offset) from exc
        query_terms = formula_tree.extract_terms(parsed)

        context_keywords = extract_keywords(query.context, self.vocabulary)
        question_keywords = (extract_keywords(query.question, self.vocabulary)
                             if query.question else [])

        rows = np.zeros((8, len(self.ids)))
        rows[0] = self._likelihood(query.context, self.docs)
        rows[1] = self._keyword_sum(context_keywords, self.docs)
        if query.question:
            rows[2] = self._likelihood(query.question, self.docs)
            rows[3] = self._keyword_sum(question_keywords, self.docs)
        rows[4] = [formula_tree.layout_transition(
            self.fem.vertices[fid].term_set, query_terms,
            self.fem.params.generalized_penalty) for fid in self.ids]
        rows[5] = self._likelihood(query.paper_abstract, self.docs)
        rows[6] = self._keyword_sum(query.paper_keywords, self.docs)
        rows[7] = self._keyword_sum(query.weekly_topics, self.docs)

        # anchor: best direct match under a uniform combination of the
        # non-evolution rows, smallest id on ties
        anchor_scores = rows.mean(axis=0)
        best = anchor_scores.max()
        anchor_idx = min(i for i, s in enumerate(anchor_scores)
                         if s == best)
        anchor = self.ids[anchor_idx]
        anchor_vertex = self.fem.vertices[anchor]

        reachable = subgraph(self.fem, anchor, max_hops).distances
        candidates = sorted(reachable)
        index_of = {fid: i for i, fid in enumerate(self.ids)}
        candidate_docs = [self.docs[index_of[fid]] for fid in candidates]

        anchor_row = self._likelihood(anchor_vertex.context, candidate_docs)
        scores: list[ProjectionScore] = []
        for pos, fid in enumerate(candidates):
            vertex = self.fem.vertices[fid]
            features = np.empty(N_FEATURES)
            features[:8] = rows[:, index_of[fid]]
            features[8] = anchor_row[pos]
            features[9] = formula_tree.layout_transition(
                vertex.term_set, anchor_vertex.term_set,
                self.fem.params.generalized_penalty)
            features[10] = vertex.generality
            features[11] = reachable[fid]
            scores.append(ProjectionScore(candidate=fid, features=features,
                                          anchor=anchor,
                                          distance=reachable[fid]))

        if weights is not None:
            weights = np.asarray(weights, dtype=np.float64)
            key = {s.candidate: float(s.features @ weights) for s in scores}
        else:
            key = {s.candidate: float(s.features.mean()) for s in scores}
        scores.sort(key=lambda s: (-key[s.candidate], s.candidate))
        if top_n is not None:
            scores = scores[:top_n]
        return ProjectionResult(anchor=anchor, scores=scores)


def project(query: QueryFormula, fem: FEMGraph, top_n: int | None = 10,
            vocabulary=(), weights=None,
            mu: float = DEFAULT_MU) -> ProjectionResult:
    """One-shot projection; build a Projector for repeated queries."""
    return Projector(fem, vocabulary=vocabulary, mu=mu).project(
        query, top_n=top_n, weights=weights)
