"""Typed graph over papers, keywords, weekly topics, formulas and learning
resources, with meta-path tour scoring and per-pair ranking features.

Edge weights are per-type row-normalized so each out-row is a distribution
(walk semantics).  Resource-side likelihood edges use per-token mean log
likelihood so short resource texts cannot dominate on length alone.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CorpusFormatError,
    EmptyCatalogError,
    SchemaError,
    UnknownVertexError,
)
from .fem import FEMGraph
from .lm import DEFAULT_MU, CollectionStats, Document, mean_log_likelihood, tokenize
from .pagerank import pagerank
from .projection import QueryFormula, extract_keywords

log = logging.getLogger(__name__)

# Edge type names: <source type>-<target type>, with a qualifier where one
# typed pair carries two relations.
P_K = "P-K"
P_W = "P-W"
P_R = "P-R"
K_K_CITE = "K-K-cite"
K_K_CO = "K-K-co"
K_P = "K-P"
K_R = "K-R"
W_W_CO = "W-W-co"
W_R = "W-R"
R_R = "R-R"
F_R = "F-R"
F_K = "F-K"
F_F = "F-F"

EDGE_TYPES = (P_K, P_W, P_R, K_K_CITE, K_K_CO, K_P, K_R, W_W_CO, W_R, R_R,
              F_R, F_K, F_F)

RESOURCE_TYPES = ("video", "slides", "code", "wiki")

MAX_META_PATH_LENGTH = 4


@dataclass
class PaperDoc:
    paper_id: str
    title: str
    abstract: str
    keywords: list[str] = field(default_factory=list)
    weekly_topics: list[str] = field(default_factory=list)
    cites: list[str] = field(default_factory=list)

    @property
    def text(self) -> str:
        return f"{self.title} {self.abstract}"


@dataclass
class OerResource:
    oer_id: str
    type: str
    title: str
    description: str
    related: list[str] = field(default_factory=list)

    @property
    def text(self) -> str:
        return f"{self.title} {self.description}"


Adjacency = dict[str, list[tuple[str, float]]]


@dataclass
class HetGraph:
    papers: dict[str, PaperDoc]
    keywords: list[str]
    topics: list[str]
    oers: dict[str, OerResource]
    formula_ids: list[str]
    formula_contexts: dict[str, str]
    edges: dict[str, Adjacency]
    stats: CollectionStats
    mu: float = DEFAULT_MU

    def all_vertices(self) -> set[str]:
        return (set(self.papers) | set(self.keywords) | set(self.topics)
                | set(self.oers) | set(self.formula_ids))

    def out_edges(self, edge_type: str, src: str) -> list[tuple[str, float]]:
        return self.edges.get(edge_type, {}).get(src, [])

    def formula_context(self, formula_id: str) -> str:
        return self.formula_contexts.get(formula_id, "")


# ---------------------------------------------------------------------------
# Input files
# ---------------------------------------------------------------------------

def _read_jsonl(path):
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"invalid JSON: {exc.msg}", lineno)


def load_papers(path) -> dict[str, PaperDoc]:
    papers: dict[str, PaperDoc] = {}
    for lineno, record in _read_jsonl(path):
        if "id" not in record:
            raise CorpusFormatError("paper record without id", lineno)
        pid = str(record["id"])
        papers[pid] = PaperDoc(
            paper_id=pid,
            title=str(record.get("title", "")),
            abstract=str(record.get("abstract", "")),
            keywords=[str(k) for k in record.get("keywords", [])],
            weekly_topics=[str(w) for w in record.get("weekly_topics", [])],
            cites=[str(c) for c in record.get("cites", [])],
        )
    return papers


def load_oers(path, resource_types=RESOURCE_TYPES) -> dict[str, OerResource]:
    oers: dict[str, OerResource] = {}
    for lineno, record in _read_jsonl(path):
        if "id" not in record:
            raise CorpusFormatError("resource record without id", lineno)
        rtype = str(record.get("type", ""))
        if rtype not in resource_types:
            raise SchemaError(
                f"line {lineno}: unknown resource type {rtype!r}")
        rid = str(record["id"])
        oers[rid] = OerResource(
            oer_id=rid,
            type=rtype,
            title=str(record.get("title", "")),
            description=str(record.get("description", "")),
            related=[str(r) for r in record.get("related", [])],
        )
    if not oers:
        raise EmptyCatalogError(str(path))
    return oers


# ---------------------------------------------------------------------------
# Graph construction
# ---------------------------------------------------------------------------

def _normalize(weights: dict[str, float]) -> list[tuple[str, float]]:
    total = sum(weights.values())
    if total <= 0:
        return []
    return [(dst, w / total) for dst, w in sorted(weights.items())]


def _lm_rows(sources: list[tuple[str, str]], targets: list[tuple[str, str]],
             stats: CollectionStats, mu: float) -> Adjacency:
    """Likelihood edges source->target: softmax over targets of the mean
    per-token log likelihood of the target text under the source model."""
    target_tokens = [(tid, tokenize(text)) for tid, text in targets]
    rows: Adjacency = {}
    for sid, text in sources:
        doc = Document.from_text(text)
        logs = np.array([
            mean_log_likelihood(toks, doc, stats, mu) if toks else -math.inf
            for _, toks in target_tokens
        ])
        finite = np.isfinite(logs)
        if not finite.any():
            continue
        shifted = np.where(finite, logs - logs[finite].max(), -np.inf)
        weights = np.exp(shifted, where=finite, out=np.zeros_like(shifted))
        weights /= weights.sum()
        rows[sid] = [(target_tokens[i][0], float(weights[i]))
                     for i in range(len(target_tokens))]
    return rows


def build_het_graph(papers: dict[str, PaperDoc], keyword_vocab,
                    weekly_topics, oer_catalog: dict[str, OerResource],
                    fem: FEMGraph, mu: float = DEFAULT_MU) -> HetGraph:
    """Assemble every edge family of the recommendation graph.

    Paper-keyword weights come from phrase overlap (explicit listing plus
    matches in title/abstract); keyword-paper weights come from PageRank
    with the keyword's papers as the teleport prior.  Unknown `related` and
    `cites` references are dropped with a warning.
    """
    if not oer_catalog:
        raise EmptyCatalogError("no resources")
    keywords = sorted({str(k) for k in keyword_vocab if str(k).strip()})
    topics = sorted({str(t) for t in weekly_topics if str(t).strip()})
    formula_ids = sorted(fem.vertices)

    all_texts = (
        [p.text for p in papers.values()] + keywords + topics +
        [r.text for r in oer_catalog.values()] +
        [fem.vertices[fid].context for fid in formula_ids]
    )
    stats = CollectionStats.from_texts(all_texts)

    edges: dict[str, Adjacency] = {etype: {} for etype in EDGE_TYPES}
    paper_ids = sorted(papers)
    oer_targets = [(rid, oer_catalog[rid].text) for rid in sorted(oer_catalog)]

    # citation graph; unknown citations are dropped, papers cite widely
    citation_edges: list[tuple[str, str]] = []
    for pid in paper_ids:
        for cited in papers[pid].cites:
            if cited in papers:
                citation_edges.append((pid, cited))
            else:
                log.warning("paper %s cites unknown paper %s; dropped",
                            pid, cited)

    # P-K: explicit keyword listing plus phrase matches in the paper text
    keyword_set = set(keywords)
    for pid in paper_ids:
        paper = papers[pid]
        raw: dict[str, float] = {}
        for k in paper.keywords:
            if k in keyword_set:
                raw[k] = raw.get(k, 0.0) + 1.0
        for k in extract_keywords(paper.text, keywords):
            raw[k] = raw.get(k, 0.0) + 1.0
        row = _normalize(raw)
        if row:
            edges[P_K][pid] = row

    # K-P: PageRank over the citation graph with the keyword's papers as prior
    papers_by_keyword: dict[str, list[str]] = {k: [] for k in keywords}
    for pid in paper_ids:
        for k in papers[pid].keywords:
            if k in keyword_set:
                papers_by_keyword[k].append(pid)
    for k in keywords:
        seeds = papers_by_keyword[k]
        if not seeds or not papers:
            continue
        scores = pagerank(paper_ids, citation_edges,
                          personalization={pid: 1.0 for pid in seeds})
        edges[K_P][k] = [(pid, scores[pid]) for pid in paper_ids
                         if scores[pid] > 0]

    # P-W: uniform over assigned weekly topics
    topic_set = set(topics)
    for pid in paper_ids:
        assigned = [w for w in papers[pid].weekly_topics if w in topic_set]
        if assigned:
            share = 1.0 / len(assigned)
            edges[P_W][pid] = [(w, share) for w in sorted(set(assigned))]
            if len(set(assigned)) != len(assigned):
                edges[P_W][pid] = _normalize(
                    {w: assigned.count(w) for w in set(assigned)})

    # K-K co-occurrence and citation-induced keyword links
    co_counts: dict[str, dict[str, float]] = {}
    for pid in paper_ids:
        listed = sorted({k for k in papers[pid].keywords if k in keyword_set})
        for a in listed:
            for b in listed:
                if a != b:
                    co_counts.setdefault(a, {})[b] = co_counts.setdefault(
                        a, {}).get(b, 0.0) + 1.0
    for k, row in co_counts.items():
        edges[K_K_CO][k] = _normalize(row)

    cite_counts: dict[str, dict[str, float]] = {}
    for src_pid, dst_pid in citation_edges:
        for a in papers[src_pid].keywords:
            if a not in keyword_set:
                continue
            for b in papers[dst_pid].keywords:
                if b in keyword_set and a != b:
                    cite_counts.setdefault(a, {})[b] = cite_counts.setdefault(
                        a, {}).get(b, 0.0) + 1.0
    for k, row in cite_counts.items():
        edges[K_K_CITE][k] = _normalize(row)

    # W-W co-assignment
    topic_co: dict[str, dict[str, float]] = {}
    for pid in paper_ids:
        assigned = sorted({w for w in papers[pid].weekly_topics
                           if w in topic_set})
        for a in assigned:
            for b in assigned:
                if a != b:
                    topic_co.setdefault(a, {})[b] = topic_co.setdefault(
                        a, {}).get(b, 0.0) + 1.0
    for w, row in topic_co.items():
        edges[W_W_CO][w] = _normalize(row)

    # R-R from the catalog's related lists
    for rid in sorted(oer_catalog):
        related = []
        for other in oer_catalog[rid].related:
            if other in oer_catalog and other != rid:
                related.append(other)
            else:
                log.warning("resource %s relates to unknown resource %s; "
                            "dropped", rid, other)
        if related:
            edges[R_R][rid] = _normalize({r: 1.0 for r in related})

    # F-K from greedy phrase matches in the formula context
    for fid in formula_ids:
        matches = extract_keywords(fem.vertices[fid].context, keywords)
        if matches:
            counts: dict[str, float] = {}
            for k in matches:
                counts[k] = counts.get(k, 0.0) + 1.0
            edges[F_K][fid] = _normalize(counts)

    # F-F copied from the evolution map, row-normalized
    evo: dict[str, dict[str, float]] = {}
    for (src, dst), p in fem.edges.items():
        if p > 0:
            evo.setdefault(src, {})[dst] = p
    for fid, row in evo.items():
        edges[F_F][fid] = _normalize(row)

    # Likelihood edges toward resources
    edges[P_R] = _lm_rows([(pid, papers[pid].text) for pid in paper_ids],
                          oer_targets, stats, mu)
    edges[K_R] = _lm_rows([(k, k) for k in keywords], oer_targets, stats, mu)
    edges[W_R] = _lm_rows([(w, w) for w in topics], oer_targets, stats, mu)
    edges[F_R] = _lm_rows(
        [(fid, fem.vertices[fid].context) for fid in formula_ids],
        oer_targets, stats, mu)

    return HetGraph(papers=papers, keywords=keywords, topics=topics,
                    oers=oer_catalog, formula_ids=formula_ids,
                    formula_contexts={fid: fem.vertices[fid].context
                                      for fid in formula_ids},
                    edges=edges, stats=stats, mu=mu)


# ---------------------------------------------------------------------------
# Meta-path scoring
# ---------------------------------------------------------------------------

def metapath_frontier(graph: HetGraph, start: str, meta_path) -> dict[str, float]:
    """Mass per terminal vertex after pushing probability 1 from `start`
    along the typed edge sequence; equals the sum over all conforming tours
    of their edge-weight products."""
    if len(meta_path) > MAX_META_PATH_LENGTH:
        raise ValueError(f"meta-path longer than {MAX_META_PATH_LENGTH}: "
                         f"{meta_path}")
    frontier = {start: 1.0}
    for edge_type in meta_path:
        adjacency = graph.edges.get(edge_type, {})
        nxt: dict[str, float] = {}
        for node, mass in frontier.items():
            for dst, weight in adjacency.get(node, []):
                nxt[dst] = nxt.get(dst, 0.0) + mass * weight
        frontier = nxt
        if not frontier:
            break
    return frontier


def metapath_score(graph: HetGraph, start: str, end: str, meta_path) -> float:
    """Sum over all tours from start to end conforming to the meta-path of
    the product of edge weights along the tour."""
    vertices = graph.all_vertices()
    if start not in vertices:
        raise UnknownVertexError(start)
    if end not in vertices:
        raise UnknownVertexError(end)
    return metapath_frontier(graph, start, meta_path).get(end, 0.0)


# ---------------------------------------------------------------------------
# Resource-ranking features
# ---------------------------------------------------------------------------

DEFAULT_META_PATHS = (
    ("F-R", (F_R,)),
    ("F-K-R", (F_K, K_R)),
    ("F-F-R", (F_F, F_R)),
    ("F-K-K-R", (F_K, K_K_CO, K_R)),
    ("F-F-K-R", (F_F, F_K, K_R)),
    ("F-F-F-R", (F_F, F_F, F_R)),
)

TEXT_FEATURE_NAMES = ("lm_formula_context", "lm_paper_abstract",
                      "lm_paper_keywords", "lm_weekly_topics")


@dataclass
class ORFConfig:
    meta_paths: tuple = DEFAULT_META_PATHS
    include_type_indicators: bool = True
    resource_types: tuple = RESOURCE_TYPES
    mu: float = DEFAULT_MU

    def feature_names(self) -> list[str]:
        names = [f"path_{name}" for name, _ in self.meta_paths]
        names.extend(TEXT_FEATURE_NAMES)
        if self.include_type_indicators:
            names.extend(f"type_{t}" for t in self.resource_types)
        return names

    @property
    def size(self) -> int:
        return len(self.feature_names())


def _geometric_likelihood(oer_tokens, source_text: str,
                          stats: CollectionStats, mu: float) -> float:
    """exp(mean per-token log likelihood) of the resource text under the
    source text's model: a length-free per-token probability in (0, 1]."""
    if not oer_tokens or not source_text.strip():
        return 0.0
    doc = Document.from_text(source_text)
    value = mean_log_likelihood(oer_tokens, doc, stats, mu)
    return math.exp(value) if math.isfinite(value) else 0.0


def orf_feature_matrix(graph: HetGraph, formula_id: str,
                       config: ORFConfig | None = None,
                       query: QueryFormula | None = None):
    """Feature matrix (resources x features) for one formula.

    Graph-family columns and the formula-context likelihood depend only on
    the graph; the abstract/keyword/topic likelihood columns depend on the
    query and are zero without one.
    """
    config = config or ORFConfig()
    if formula_id not in set(graph.formula_ids):
        raise UnknownVertexError(formula_id)
    oer_ids = sorted(graph.oers)
    index = {rid: i for i, rid in enumerate(oer_ids)}
    matrix = np.zeros((len(oer_ids), config.size))

    col = 0
    for _, meta_path in config.meta_paths:
        frontier = metapath_frontier(graph, formula_id, meta_path)
        for rid, mass in frontier.items():
            if rid in index:
                matrix[index[rid], col] = mass
        col += 1

    context_sources = {
        "lm_formula_context": graph.formula_context(formula_id),
        "lm_paper_abstract": query.paper_abstract if query else "",
        "lm_paper_keywords": " ".join(query.paper_keywords) if query else "",
        "lm_weekly_topics": " ".join(query.weekly_topics) if query else "",
    }
    oer_tokens = [tokenize(graph.oers[rid].text) for rid in oer_ids]

    for name in TEXT_FEATURE_NAMES:
        source = context_sources[name]
        if source:
            for i, toks in enumerate(oer_tokens):
                matrix[i, col] = _geometric_likelihood(toks, source,
                                                       graph.stats, config.mu)
        col += 1

    if config.include_type_indicators:
        for i, rid in enumerate(oer_ids):
            rtype = graph.oers[rid].type
            if rtype in config.resource_types:
                matrix[i, col + config.resource_types.index(rtype)] = 1.0
        col += len(config.resource_types)

    return oer_ids, matrix


def orf_features(graph: HetGraph, formula_id: str, oer_id: str,
                 config: ORFConfig | None = None,
                 query: QueryFormula | None = None) -> np.ndarray:
    """Feature vector for one (formula, resource) pair."""
    config = config or ORFConfig()
    oer_ids, matrix = orf_feature_matrix(graph, formula_id, config, query)
    if oer_id not in graph.oers:
        raise UnknownVertexError(oer_id)
    return matrix[oer_ids.index(oer_id)]


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

GRAPH_FILE = "hetgraph.json"


def save_het_graph(graph: HetGraph, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    payload = {
        "mu": graph.mu,
        "papers": [
            {"id": p.paper_id, "title": p.title, "abstract": p.abstract,
             "keywords": p.keywords, "weekly_topics": p.weekly_topics,
             "cites": p.cites}
            for p in (graph.papers[k] for k in sorted(graph.papers))
        ],
        "keywords": graph.keywords,
        "topics": graph.topics,
        "oers": [
            {"id": r.oer_id, "type": r.type, "title": r.title,
             "description": r.description, "related": r.related}
            for r in (graph.oers[k] for k in sorted(graph.oers))
        ],
        "formula_ids": graph.formula_ids,
        "formula_contexts": {fid: graph.formula_context(fid)
                             for fid in graph.formula_ids},
        "edges": {etype: [[src, dst, w] for src in sorted(adj)
                          for dst, w in adj[src]]
                  for etype, adj in graph.edges.items()},
    }
    with open(os.path.join(out_dir, GRAPH_FILE), "w",
              encoding="utf-8") as handle:
        json.dump(payload, handle)
        handle.write("\n")


def load_het_graph(graph_dir: str) -> HetGraph:
    with open(os.path.join(graph_dir, GRAPH_FILE), encoding="utf-8") as handle:
        payload = json.load(handle)
    papers = {p["id"]: PaperDoc(paper_id=p["id"], title=p["title"],
                                abstract=p["abstract"],
                                keywords=p["keywords"],
                                weekly_topics=p["weekly_topics"],
                                cites=p["cites"])
              for p in payload["papers"]}
    oers = {r["id"]: OerResource(oer_id=r["id"], type=r["type"],
                                 title=r["title"],
                                 description=r["description"],
                                 related=r["related"])
            for r in payload["oers"]}
    edges: dict[str, Adjacency] = {}
    for etype, rows in payload["edges"].items():
        adjacency: Adjacency = {}
        for src, dst, w in rows:
            adjacency.setdefault(src, []).append((dst, float(w)))
        edges[etype] = adjacency
    contexts = payload.get("formula_contexts", {})
    all_texts = (
        [p.text for p in papers.values()] + payload["keywords"] +
        payload["topics"] + [r.text for r in oers.values()] +
        [contexts.get(fid, "") for fid in payload["formula_ids"]]
    )
    return HetGraph(papers=papers, keywords=payload["keywords"],
                    topics=payload["topics"], oers=oers,
                    formula_ids=payload["formula_ids"],
                    formula_contexts=contexts, edges=edges,
                    stats=CollectionStats.from_texts(all_texts),
                    mu=float(payload.get("mu", DEFAULT_MU)))
