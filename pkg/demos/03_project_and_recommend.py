#!/usr/bin/env python3
"""Project a query onto the map and rank learning resources.

Shows the twelve projection features for the anchor match, then the fused
projection-times-resource scoring that produces the final ranking.
"""

import tempfile

from femkit.corpus import filter_formulas, load_corpus
from femkit.datagen import generate_corpus
from femkit.fem import FEMParams, build_fem
from femkit.hetgraph import build_het_graph, load_oers, load_papers
from femkit.projection import FEATURE_NAMES, QueryFormula
from femkit.recommend import Recommender

workdir = tempfile.mkdtemp(prefix="fem_demo_")
paths = generate_corpus(workdir, n_pages=40, seed=99)
corpus = load_corpus(paths.corpus)
kept = filter_formulas(corpus.formulas)
fem = build_fem(corpus.pages, kept, {},
                FEMParams(dim=48, walk_length=16, walks_per_vertex=6,
                          epochs=2, prune_threshold=0.4, seed=3))

keywords = [k for k in open(paths.keywords).read().splitlines() if k]
topics = [t for t in open(paths.topics).read().splitlines() if t]
graph = build_het_graph(load_papers(paths.papers), keywords, topics,
                        load_oers(paths.oers), fem)
recommender = Recommender(fem, graph)

# query: a formula from the corpus with reader-side context
target = sorted(fem.vertices.values(), key=lambda v: -v.generality)[0]
query = QueryFormula(
    latex=target.latex,
    context=target.context,
    question="why does this transition use a conditional probability",
    paper_abstract="a reading about random walks and transition measures",
    paper_keywords=["random walk", "conditional probability"],
    weekly_topics=["probability foundations"],
)

outcome = recommender.recommend(query, top_n=5)
anchor = outcome.projection.by_candidate()[outcome.anchor]
print(f"anchor formula: {fem.vertices[outcome.anchor].latex}")
print("anchor feature vector:")
for name, value in zip(FEATURE_NAMES, anchor.features):
    print(f"  {name:32s} {value:.6f}")

print(f"\ncandidates within three hops: {len(outcome.projection.scores)}")
print("\ntop resources:")
for result in outcome.results:
    print(f"  {result.score:9.4f}  [{result.type:6s}] {result.title:42s} "
          f"via {fem.vertices[result.hosting_formula].latex} "
          f"(hop {result.distance})")
