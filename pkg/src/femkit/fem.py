"""Formula evolution map construction.

Pipeline: undirected candidate relations from page co-location and
hyperlinks, a direction cascade (birth year, then layout complexity, then
generality), fused transition probabilities per directed edge, guided random
walks, skip-gram embeddings, and finally per-edge evolution probabilities
(clamped cosine) with pruning.  Build phases run in sequence; the resulting
graph is immutable and safe to share.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, asdict
from itertools import combinations

import numpy as np

from . import tree as formula_tree
from .corpus import RawFormula, WikiPage
from .errors import (
    EmptyGraphError,
    MissingEmbeddingError,
    UnknownFormulaError,
)
from .lm import CollectionStats, Document, likelihood_row, tokenize
from .pagerank import pagerank
from .skipgram import train_embeddings

COMPLEXITY_TIE_RATIO = 0.1


@dataclass
class FEMParams:
    theta_context: float = 1.0
    theta_layout: float = 1.0
    theta_generality: float = 1.0
    walk_length: int = 40
    walks_per_vertex: int = 10
    dim: int = 128
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    mu: float = 2000.0
    damping: float = 0.85
    prune_threshold: float = 0.5
    generalized_penalty: float = 0.5
    seed: int = 2024

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "FEMParams":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})


@dataclass
class FormulaVertex:
    formula_id: str
    latex: str
    home_pages: tuple[str, ...]
    context: str
    term_set: formula_tree.TermSet
    birth_year: int | None = None
    generality: float = 0.0
    layout_complexity: int = 0
    embedding: np.ndarray | None = None


@dataclass(frozen=True)
class EvolutionEdge:
    src: str
    dst: str
    probability: float


@dataclass
class FEMGraph:
    vertices: dict[str, FormulaVertex]
    edges: dict[tuple[str, str], float]
    params: FEMParams = field(default_factory=FEMParams)

    def out_neighbors(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {v: [] for v in self.vertices}
        for (src, dst) in sorted(self.edges):
            out[src].append(dst)
        return out

    def undirected_neighbors(self) -> dict[str, list[str]]:
        adj: dict[str, set[str]] = {v: set() for v in self.vertices}
        for (src, dst) in self.edges:
            adj[src].add(dst)
            adj[dst].add(src)
        return {v: sorted(adj[v]) for v in adj}

    def edge_list(self) -> list[EvolutionEdge]:
        return [EvolutionEdge(src, dst, p)
                for (src, dst), p in sorted(self.edges.items())]


# ---------------------------------------------------------------------------
# Candidate relations and direction
# ---------------------------------------------------------------------------

def generate_relations(pages: dict[str, WikiPage],
                       formulas: dict) -> set[tuple[str, str]]:
    """Undirected candidate pairs: formulas that share a page or whose home
    pages are hyperlinked in either direction.  No self pairs."""
    by_page: dict[str, list[str]] = {}
    for fid in sorted(formulas):
        for page_id in formulas[fid].home_pages:
            by_page.setdefault(page_id, []).append(fid)

    candidates: set[tuple[str, str]] = set()

    def add_pair(a: str, b: str) -> None:
        if a != b:
            candidates.add((a, b) if a < b else (b, a))

    for page_id, group in by_page.items():
        for a, b in combinations(group, 2):
            add_pair(a, b)
    for page_id, page in pages.items():
        group_a = by_page.get(page_id, [])
        if not group_a:
            continue
        for linked in page.outlinks:
            for a in group_a:
                for b in by_page.get(linked, []):
                    add_pair(a, b)
    return candidates


def determine_direction(fa: FormulaVertex,
                        fb: FormulaVertex) -> tuple[str, str]:
    """Orient a candidate pair.

    Cascade: earlier birth year wins when both years exist and differ;
    otherwise the relative complexity gap decides (simple evolves to complex)
    unless the gap ratio is under 0.1; then higher generality evolves to
    lower, with a lexicographic id tie-break so builds stay deterministic.
    """
    if (fa.birth_year is not None and fb.birth_year is not None
            and fa.birth_year != fb.birth_year):
        if fa.birth_year < fb.birth_year:
            return fa.formula_id, fb.formula_id
        return fb.formula_id, fa.formula_id

    peak = max(fa.layout_complexity, fb.layout_complexity)
    ratio = (abs(fa.layout_complexity - fb.layout_complexity) / peak
             if peak > 0 else 0.0)
    if ratio >= COMPLEXITY_TIE_RATIO:
        if fa.layout_complexity < fb.layout_complexity:
            return fa.formula_id, fb.formula_id
        return fb.formula_id, fa.formula_id

    if fa.generality != fb.generality:
        if fa.generality > fb.generality:
            return fa.formula_id, fb.formula_id
        return fb.formula_id, fa.formula_id
    if fa.formula_id < fb.formula_id:
        return fa.formula_id, fb.formula_id
    return fb.formula_id, fa.formula_id


def compute_generality(pages: dict[str, WikiPage], formulas: dict,
                       damping: float = 0.85) -> dict[str, float]:
    """Generality per formula: PageRank over the formula-formula graph
    induced by shared pages and page hyperlinks."""
    by_page: dict[str, list[str]] = {}
    for fid in sorted(formulas):
        for page_id in formulas[fid].home_pages:
            by_page.setdefault(page_id, []).append(fid)

    edges: set[tuple[str, str]] = set()
    for page_id, group in by_page.items():
        for a in group:
            for b in group:
                if a != b:
                    edges.add((a, b))
    for page_id, page in pages.items():
        for linked in page.outlinks:
            for a in by_page.get(page_id, []):
                for b in by_page.get(linked, []):
                    if a != b:
                        edges.add((a, b))
    return pagerank(sorted(formulas), sorted(edges), damping=damping)


# ---------------------------------------------------------------------------
# Transition probabilities
# ---------------------------------------------------------------------------

def context_transition(source_context: str, candidate_contexts,
                       stats: CollectionStats, mu: float) -> np.ndarray:
    """Context transition row: likelihood of the source's context under each
    candidate's context model (uniform prior), normalized to sum to 1."""
    query = tokenize(source_context)
    docs = [Document.from_text(c) for c in candidate_contexts]
    return likelihood_row(query, docs, stats, mu)


def generality_transition(fprev: FormulaVertex) -> float:
    """Generality transition is the source vertex's own generality score."""
    return fprev.generality


def fuse_transition(pt: float, pl: float, pg: float,
                    theta: tuple[float, float, float] = (1.0, 1.0, 1.0)) -> float:
    """Squash the weighted component sum through tanh into [0, 1)."""
    tt, tl, tg = theta
    return math.tanh(tt * pt + tl * pl + tg * pg)


# ---------------------------------------------------------------------------
# Guided walks
# ---------------------------------------------------------------------------

def guided_walks(vertex_ids, transition: dict, walk_length: int,
                 walks_per_vertex: int, seed: int) -> list[list[str]]:
    """Sample `walks_per_vertex` sequences from every vertex.

    `transition` maps a vertex to (neighbor list, probability vector); the
    probabilities must sum to 1.  A vertex with no out-edges truncates its
    walk.  Walk length counts vertices, so an isolated vertex yields [vertex].
    """
    rng = np.random.default_rng(seed)
    cumulative = {}
    for vid, (neighbors, probs) in transition.items():
        if neighbors:
            cumulative[vid] = (neighbors, np.cumsum(probs))
    walks: list[list[str]] = []
    for vid in sorted(vertex_ids):
        for _ in range(walks_per_vertex):
            walk = [vid]
            while len(walk) < walk_length:
                step = cumulative.get(walk[-1])
                if step is None:
                    break
                neighbors, cum = step
                draw = rng.random()
                walk.append(neighbors[int(np.searchsorted(cum, draw,
                                                          side="right"))])
            walks.append(walk)
    return walks


# ---------------------------------------------------------------------------
# Evolution probability, pruning, subgraphs
# ---------------------------------------------------------------------------

def evolution_probability(fa: FormulaVertex, fb: FormulaVertex) -> float:
    """Clamped cosine similarity of the two embeddings."""
    if fa.embedding is None or fb.embedding is None:
        missing = fa.formula_id if fa.embedding is None else fb.formula_id
        raise MissingEmbeddingError(missing)
    u, v = fa.embedding, fb.embedding
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return max(0.0, float(u @ v) / (nu * nv))


def prune(graph: FEMGraph, threshold: float) -> FEMGraph:
    """Drop edges below the probability threshold; vertices stay."""
    kept = {pair: p for pair, p in graph.edges.items() if p >= threshold}
    return FEMGraph(vertices=graph.vertices, edges=kept, params=graph.params)


@dataclass
class Subgraph:
    target: str
    distances: dict[str, int]
    edges: list[EvolutionEdge]


def subgraph(graph: FEMGraph, target: str, max_depth: int = 3) -> Subgraph:
    """Vertices within `max_depth` hops of the target, following edges in
    both directions, with their hop distances and the induced edge set."""
    if target not in graph.vertices:
        raise UnknownFormulaError(target)
    adjacency = graph.undirected_neighbors()
    distances = {target: 0}
    frontier = [target]
    depth = 0
    while frontier and depth < max_depth:
        depth += 1
        nxt: list[str] = []
        for vid in frontier:
            for neighbor in adjacency[vid]:
                if neighbor not in distances:
                    distances[neighbor] = depth
                    nxt.append(neighbor)
        frontier = nxt
    edges = [EvolutionEdge(src, dst, p)
             for (src, dst), p in sorted(graph.edges.items())
             if src in distances and dst in distances]
    return Subgraph(target=target, distances=distances, edges=edges)


# ---------------------------------------------------------------------------
# End-to-end build
# ---------------------------------------------------------------------------

def build_fem(pages: dict[str, WikiPage], formulas: dict[str, RawFormula],
              birth_years: dict[str, int] | None = None,
              params: FEMParams | None = None) -> FEMGraph:
    """Build the full evolution map from ingested pages and formulas."""
    params = params or FEMParams()
    birth_years = birth_years or {}
    if not formulas:
        raise EmptyGraphError("no formulas to build a map from")

    generality = compute_generality(pages, formulas, damping=params.damping)

    vertices: dict[str, FormulaVertex] = {}
    for fid in sorted(formulas):
        raw = formulas[fid]
        parsed = formula_tree.parse_latex(raw.latex)
        term_set = formula_tree.extract_terms(parsed)
        vertices[fid] = FormulaVertex(
            formula_id=fid,
            latex=raw.latex,
            home_pages=tuple(sorted(raw.home_pages)),
            context=raw.context,
            term_set=term_set,
            birth_year=birth_years.get(fid),
            generality=generality[fid],
            layout_complexity=formula_tree.complexity(term_set),
        )

    candidates = generate_relations(pages, formulas)
    directed: dict[str, list[str]] = {fid: [] for fid in vertices}
    for a, b in sorted(candidates):
        src, dst = determine_direction(vertices[a], vertices[b])
        directed[src].append(dst)

    stats = CollectionStats.from_texts(v.context for v in vertices.values())
    docs = {fid: Document.from_text(v.context)
            for fid, v in vertices.items()}
    theta = (params.theta_context, params.theta_layout,
             params.theta_generality)

    transition: dict[str, tuple[list[str], np.ndarray]] = {}
    for src in sorted(directed):
        targets = sorted(directed[src])
        if not targets:
            transition[src] = ([], np.zeros(0))
            continue
        source_vertex = vertices[src]
        query = tokenize(source_vertex.context)
        pt_row = likelihood_row(query, [docs[t] for t in targets], stats,
                                params.mu)
        pg = generality_transition(source_vertex)
        fused = np.array([
            fuse_transition(
                float(pt_row[i]),
                formula_tree.layout_transition(
                    vertices[t].term_set, source_vertex.term_set,
                    params.generalized_penalty),
                pg, theta)
            for i, t in enumerate(targets)
        ])
        total = fused.sum()
        probs = fused / total if total > 0 else np.full(len(targets),
                                                        1.0 / len(targets))
        transition[src] = (targets, probs)

    walks = guided_walks(vertices.keys(), transition, params.walk_length,
                         params.walks_per_vertex, params.seed)
    model = train_embeddings(walks, dim=params.dim, window=params.window,
                             negatives=params.negatives, epochs=params.epochs,
                             seed=params.seed)
    for fid, vertex in vertices.items():
        vertex.embedding = model.vectors.get(fid)

    edges: dict[tuple[str, str], float] = {}
    for src in sorted(directed):
        for dst in sorted(directed[src]):
            edges[(src, dst)] = evolution_probability(vertices[src],
                                                      vertices[dst])
    graph = FEMGraph(vertices=vertices, edges=edges, params=params)
    return prune(graph, params.prune_threshold)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

VERTICES_FILE = "vertices.jsonl"
EDGES_FILE = "edges.jsonl"
MANIFEST_FILE = "manifest.json"


def save_fem(graph: FEMGraph, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, VERTICES_FILE), "w",
              encoding="utf-8") as handle:
        for fid in sorted(graph.vertices):
            v = graph.vertices[fid]
            record = {
                "id": v.formula_id,
                "latex": v.latex,
                "pages": list(v.home_pages),
                "context": v.context,
                "lt": v.birth_year,
                "lg": v.generality,
                "lc": v.layout_complexity,
                "emb": ([float(x) for x in v.embedding]
                        if v.embedding is not None else None),
            }
            handle.write(json.dumps(record) + "\n")
    with open(os.path.join(out_dir, EDGES_FILE), "w",
              encoding="utf-8") as handle:
        for (src, dst), p in sorted(graph.edges.items()):
            handle.write(json.dumps({"src": src, "dst": dst, "p": p}) + "\n")
    manifest = {
        "params": graph.params.to_dict(),
        "vertex_count": len(graph.vertices),
        "edge_count": len(graph.edges),
    }
    with open(os.path.join(out_dir, MANIFEST_FILE), "w",
              encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_fem(map_dir: str) -> FEMGraph:
    with open(os.path.join(map_dir, MANIFEST_FILE), encoding="utf-8") as handle:
        manifest = json.load(handle)
    params = FEMParams.from_dict(manifest.get("params", {}))
    vertices: dict[str, FormulaVertex] = {}
    with open(os.path.join(map_dir, VERTICES_FILE), encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            parsed = formula_tree.parse_latex(record["latex"])
            term_set = formula_tree.extract_terms(parsed)
            embedding = (np.asarray(record["emb"], dtype=np.float64)
                         if record.get("emb") is not None else None)
            vertices[record["id"]] = FormulaVertex(
                formula_id=record["id"],
                latex=record["latex"],
                home_pages=tuple(record.get("pages", [])),
                context=record.get("context", ""),
                term_set=term_set,
                birth_year=record.get("lt"),
                generality=float(record.get("lg", 0.0)),
                layout_complexity=int(record.get("lc",
                                                 formula_tree.complexity(term_set))),
                embedding=embedding,
            )
    edges: dict[tuple[str, str], float] = {}
    with open(os.path.join(map_dir, EDGES_FILE), encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            edges[(record["src"], record["dst"])] = float(record["p"])
    return FEMGraph(vertices=vertices, edges=edges, params=params)
