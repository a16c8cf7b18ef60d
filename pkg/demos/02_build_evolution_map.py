#!/usr/bin/env python3
"""Build a formula evolution map over a synthetic wiki corpus.

Generates a themed corpus, ingests and filters its formulae, mines birth
years from a dated paper corpus, builds the map (direction cascade, fused
transitions, guided walks, embeddings), and inspects one vertex's
neighborhood.
"""

import tempfile

from femkit.corpus import (
    filter_formulas,
    load_corpus,
    load_paper_corpus,
    mine_birth_times,
)
from femkit.datagen import generate_corpus
from femkit.fem import FEMParams, build_fem, subgraph

workdir = tempfile.mkdtemp(prefix="fem_demo_")
paths = generate_corpus(workdir, n_pages=50, seed=20240810)
print(f"synthetic corpus written under {workdir}")

corpus = load_corpus(paths.corpus)
print(f"pages: {len(corpus.pages)}  formulas: {len(corpus.formulas)}  "
      f"unparseable spans skipped: {corpus.skipped_spans}")

kept = filter_formulas(corpus.formulas)
print(f"after the >=2 variables / >=3 operators filter: {len(kept)}")

birth = mine_birth_times(kept, corpus.pages,
                         load_paper_corpus(paths.papers_dated))
print(f"birth years mined for {len(birth)} formulae")

params = FEMParams(dim=64, walk_length=20, walks_per_vertex=8, epochs=3,
                   prune_threshold=0.5, seed=7)
fem = build_fem(corpus.pages, kept, birth, params)
print(f"\nmap built: {len(fem.vertices)} vertices, "
      f"{len(fem.edges)} evolution edges at probability >= "
      f"{params.prune_threshold}")

# generality is a distribution over all formulae
total = sum(v.generality for v in fem.vertices.values())
top = max(fem.vertices.values(), key=lambda v: v.generality)
print(f"generality sums to {total:.6f}; most general formula: {top.latex} "
      f"(score {top.generality:.4f})")

# three-hop neighborhood around the best-connected vertex
degree = {fid: 0 for fid in fem.vertices}
for src, dst in fem.edges:
    degree[src] += 1
    degree[dst] += 1
hub = max(degree, key=degree.get)
fragment = subgraph(fem, hub, max_depth=3)
print(f"\nneighborhood of {fem.vertices[hub].latex}:")
for fid in sorted(fragment.distances, key=fragment.distances.get)[:8]:
    vertex = fem.vertices[fid]
    print(f"  hop {fragment.distances[fid]}  {vertex.latex:40s} "
          f"complexity={vertex.layout_complexity}")
