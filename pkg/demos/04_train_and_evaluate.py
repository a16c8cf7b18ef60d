#!/usr/bin/env python3
"""Train the ranking weights on simulated judgments and evaluate them.

Simulates rating sessions against the uniform-weight recommender, trains
the coordinate-ascent model with 10-fold cross-validation, and reports the
metric row plus the mean judgement distance per rating class.
"""

import os
import tempfile

from femkit.cli import feature_store_from_queries, read_judgment_file
from femkit.corpus import filter_formulas, load_corpus
from femkit.datagen import generate_corpus, simulate_judgments
from femkit.fem import FEMParams, build_fem
from femkit.hetgraph import build_het_graph, load_oers, load_papers
from femkit.l2r import train_l2r
from femkit.metrics import ajd
from femkit.projection import N_FEATURES
from femkit.recommend import Recommender

workdir = tempfile.mkdtemp(prefix="fem_demo_")
paths = generate_corpus(workdir, n_pages=40, seed=5)
corpus = load_corpus(paths.corpus)
fem = build_fem(corpus.pages, filter_formulas(corpus.formulas), {},
                FEMParams(dim=48, walk_length=16, walks_per_vertex=6,
                          epochs=2, prune_threshold=0.4, seed=21))
keywords = [k for k in open(paths.keywords).read().splitlines() if k]
topics = [t for t in open(paths.topics).read().splitlines() if t]
graph = build_het_graph(load_papers(paths.papers), keywords, topics,
                        load_oers(paths.oers), fem)
recommender = Recommender(fem, graph)

judgments_path = os.path.join(workdir, "judgments.jsonl")
n = simulate_judgments(recommender, judgments_path, n_requests=20,
                       per_request=6, seed=17)
print(f"simulated {n} judgments over 20 rating sessions")

judgments, queries = read_judgment_file(judgments_path)
store = feature_store_from_queries(recommender, judgments, queries)
model, cv = train_l2r(judgments, store, N_FEATURES, folds=10, restarts=3,
                      seed=1,
                      feature_names=recommender.config.feature_names())

print(f"\ncross-validation over {cv['folds']} folds:")
for key, value in cv["mean"].items():
    print(f"  {key:10s} {value:.4f}")

print("\nmean judgement distance per rating class:")
for rating in ("Good", "OK", "Bad"):
    print(f"  {rating:5s} {ajd(judgments, rating):.3f}")

weights = model.weights
names = recommender.config.feature_names()
flat = [(abs(weights[m, k]), m, k) for m in range(weights.shape[0])
        for k in range(weights.shape[1])]
print("\nstrongest learned feature crosses:")
for magnitude, m, k in sorted(flat, reverse=True)[:5]:
    from femkit.projection import FEATURE_NAMES

    print(f"  {FEATURE_NAMES[m]:32s} x {names[k]:24s} "
          f"{weights[m, k]:+.3f}")
