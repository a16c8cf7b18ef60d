"""Command-line entry points: map building (fem), resource ranking (rec),
and the HTTP service (serve)."""

from __future__ import annotations

import json
import os
import sys

import click

from . import fem as fem_mod
from . import tree as formula_tree
from .corpus import (
    RawFormula,
    WikiPage,
    filter_formulas,
    load_corpus,
    load_paper_corpus,
    mine_birth_times,
)
from .errors import FemkitError
from .hetgraph import (
    build_het_graph,
    load_het_graph,
    load_oers,
    load_papers,
    save_het_graph,
)
from .l2r import L2RModel, train_l2r
from .metrics import METRIC_KEYS, Judgment, evaluate
from .projection import N_FEATURES, Projector, QueryFormula
from .recommend import Recommender
from .service import ServiceConfig
from .service import serve as run_service

PAGES_FILE = "pages.jsonl"
FORMULAS_FILE = "formulas.jsonl"
BIRTH_FILE = "birth.json"
STATS_FILE = "stats.json"


def _fail(message: str) -> None:
    raise click.ClickException(message)


# ---------------------------------------------------------------------------
# fem
# ---------------------------------------------------------------------------

@click.group()
def fem():
    """Formula evolution map tools."""


@fem.command("parse-formula")
@click.argument("latex")
def parse_formula_command(latex):
    """Print the layout tree and the extracted term table."""
    try:
        tree = formula_tree.parse_latex(latex)
    except formula_tree.ParseError as exc:
        _fail(str(exc))
    click.echo(formula_tree.render_tree(tree))
    click.echo()
    click.echo("serialization\tkind\tlevel")
    for term in formula_tree.extract_terms(tree).terms:
        click.echo(f"{term.serialization}\t{term.kind}\t{term.level}")


@fem.command("ingest")
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True))
@click.option("--papers", "papers_path", type=click.Path(exists=True),
              default=None, help="dated paper corpus for birth years")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--context-window", default=250, show_default=True)
@click.option("--context-unit", default="words",
              type=click.Choice(["words", "chars"]), show_default=True)
@click.option("--min-variables", default=2, show_default=True)
@click.option("--min-operators", default=3, show_default=True)
def ingest_command(corpus_path, papers_path, out_dir, context_window,
                   context_unit, min_variables, min_operators):
    """Load the wiki corpus, filter formulae, and mine birth years."""
    try:
        corpus = load_corpus(corpus_path, context_window=context_window,
                             context_unit=context_unit)
        kept = filter_formulas(corpus.formulas,
                               min_variables=min_variables,
                               min_operators=min_operators)
        birth = {}
        if papers_path:
            papers = load_paper_corpus(papers_path)
            birth = mine_birth_times(kept, corpus.pages, papers)
    except FemkitError as exc:
        _fail(str(exc))

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, PAGES_FILE), "w",
              encoding="utf-8") as handle:
        for page_id in sorted(corpus.pages):
            page = corpus.pages[page_id]
            handle.write(json.dumps({"id": page.page_id, "title": page.title,
                                     "links": sorted(page.outlinks)}) + "\n")
    with open(os.path.join(out_dir, FORMULAS_FILE), "w",
              encoding="utf-8") as handle:
        for fid in sorted(kept):
            f = kept[fid]
            handle.write(json.dumps({
                "id": f.formula_id, "latex": f.latex,
                "pages": sorted(f.home_pages), "context": f.context,
                "vars": f.variable_count, "ops": f.operator_count,
                "serialization": f.serialization}) + "\n")
    with open(os.path.join(out_dir, BIRTH_FILE), "w",
              encoding="utf-8") as handle:
        json.dump({fid: birth[fid] for fid in sorted(birth)}, handle,
                  indent=0, sort_keys=True)
        handle.write("\n")
    stats = {"pages": len(corpus.pages),
             "formulas_total": len(corpus.formulas),
             "formulas_kept": len(kept),
             "spans_skipped": corpus.skipped_spans,
             "links_dropped": corpus.dropped_links,
             "birth_years": len(birth)}
    with open(os.path.join(out_dir, STATS_FILE), "w",
              encoding="utf-8") as handle:
        json.dump(stats, handle, indent=2, sort_keys=True)
        handle.write("\n")
    click.echo(f"pages={stats['pages']} formulas={stats['formulas_total']} "
               f"kept={stats['formulas_kept']} "
               f"skipped={stats['spans_skipped']} "
               f"birth_years={stats['birth_years']}")


def load_ingest_dir(in_dir):
    pages: dict[str, WikiPage] = {}
    with open(os.path.join(in_dir, PAGES_FILE), encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                record = json.loads(line)
                pages[record["id"]] = WikiPage(
                    page_id=record["id"], title=record["title"], body="",
                    outlinks=set(record.get("links", [])))
    formulas: dict[str, RawFormula] = {}
    with open(os.path.join(in_dir, FORMULAS_FILE),
              encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                record = json.loads(line)
                formulas[record["id"]] = RawFormula(
                    formula_id=record["id"], latex=record["latex"],
                    home_pages=set(record["pages"]),
                    context=record.get("context", ""),
                    variable_count=int(record.get("vars", 0)),
                    operator_count=int(record.get("ops", 0)),
                    serialization=record.get("serialization", ""))
    birth_path = os.path.join(in_dir, BIRTH_FILE)
    birth = {}
    if os.path.exists(birth_path):
        with open(birth_path, encoding="utf-8") as handle:
            birth = {k: int(v) for k, v in json.load(handle).items()}
    return pages, formulas, birth


@fem.command("build")
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--theta-t", default=1.0, show_default=True)
@click.option("--theta-l", default=1.0, show_default=True)
@click.option("--theta-g", default=1.0, show_default=True)
@click.option("--walk-len", default=40, show_default=True)
@click.option("--walks", default=10, show_default=True)
@click.option("--dim", default=128, show_default=True)
@click.option("--window", default=5, show_default=True)
@click.option("--negatives", default=5, show_default=True)
@click.option("--epochs", default=5, show_default=True)
@click.option("--mu", default=2000.0, show_default=True)
@click.option("--prune", default=0.5, show_default=True)
@click.option("--seed", default=2024, show_default=True)
def build_command(in_dir, out_dir, theta_t, theta_l, theta_g, walk_len,
                  walks, dim, window, negatives, epochs, mu, prune, seed):
    """Build the evolution map from ingested artifacts."""
    pages, formulas, birth = load_ingest_dir(in_dir)
    params = fem_mod.FEMParams(
        theta_context=theta_t, theta_layout=theta_l, theta_generality=theta_g,
        walk_length=walk_len, walks_per_vertex=walks, dim=dim, window=window,
        negatives=negatives, epochs=epochs, mu=mu, prune_threshold=prune,
        seed=seed)
    try:
        graph = fem_mod.build_fem(pages, formulas, birth, params)
    except FemkitError as exc:
        _fail(str(exc))
    fem_mod.save_fem(graph, out_dir)
    click.echo(f"vertices={len(graph.vertices)} edges={len(graph.edges)} "
               f"seed={seed}")


@fem.command("query")
@click.option("--map", "map_dir", required=True, type=click.Path(exists=True))
@click.option("--latex", required=True)
@click.option("--context", "context_file", type=click.Path(exists=True),
              default=None)
@click.option("--question", default=None)
@click.option("--abstract", "abstract_file", type=click.Path(exists=True),
              default=None)
@click.option("--keywords", default="", help="comma-separated paper keywords")
@click.option("--topics", default="", help="comma-separated weekly topics")
@click.option("--vocab", "vocab_file", type=click.Path(exists=True),
              default=None, help="keyword vocabulary, one phrase per line")
@click.option("--top", default=10, show_default=True)
def query_command(map_dir, latex, context_file, question, abstract_file,
                  keywords, topics, vocab_file, top):
    """Project a query formula and print tab-separated candidate features."""
    graph = fem_mod.load_fem(map_dir)
    context = ""
    if context_file:
        with open(context_file, encoding="utf-8") as handle:
            context = handle.read()
    abstract = ""
    if abstract_file:
        with open(abstract_file, encoding="utf-8") as handle:
            abstract = handle.read()
    vocabulary = []
    if vocab_file:
        with open(vocab_file, encoding="utf-8") as handle:
            vocabulary = [line.strip() for line in handle if line.strip()]
    query = QueryFormula(
        latex=latex, context=context, question=question,
        paper_abstract=abstract,
        paper_keywords=[k.strip() for k in keywords.split(",") if k.strip()],
        weekly_topics=[t.strip() for t in topics.split(",") if t.strip()])
    try:
        result = Projector(graph, vocabulary=vocabulary).project(query,
                                                                 top_n=top)
    except FemkitError as exc:
        _fail(str(exc))
    click.echo(f"anchor\t{result.anchor}")
    for score in result.scores:
        features = "\t".join(f"{x:.6g}" for x in score.features)
        click.echo(f"{score.candidate}\t{score.distance}\t{features}")


# ---------------------------------------------------------------------------
# rec
# ---------------------------------------------------------------------------

@click.group()
def rec():
    """Resource recommendation tools."""


@rec.command("build-graph")
@click.option("--map", "map_dir", required=True, type=click.Path(exists=True))
@click.option("--papers", "papers_path", required=True,
              type=click.Path(exists=True))
@click.option("--oers", "oers_path", required=True,
              type=click.Path(exists=True))
@click.option("--keywords", "keywords_path", required=True,
              type=click.Path(exists=True))
@click.option("--topics", "topics_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--mu", default=2000.0, show_default=True)
def build_graph_command(map_dir, papers_path, oers_path, keywords_path,
                        topics_path, out_dir, mu):
    """Assemble the typed recommendation graph."""
    fem_graph = fem_mod.load_fem(map_dir)
    with open(keywords_path, encoding="utf-8") as handle:
        keywords = [line.strip() for line in handle if line.strip()]
    with open(topics_path, encoding="utf-8") as handle:
        topics = [line.strip() for line in handle if line.strip()]
    try:
        graph = build_het_graph(load_papers(papers_path), keywords, topics,
                                load_oers(oers_path), fem_graph, mu=mu)
    except FemkitError as exc:
        _fail(str(exc))
    save_het_graph(graph, out_dir)
    edge_count = sum(len(row) for adj in graph.edges.values()
                     for row in adj.values())
    click.echo(f"papers={len(graph.papers)} keywords={len(graph.keywords)} "
               f"topics={len(graph.topics)} resources={len(graph.oers)} "
               f"formulas={len(graph.formula_ids)} edges={edge_count}")


def read_judgment_file(path):
    """Judgment records plus the query payload embedded per request."""
    judgments: list[Judgment] = []
    queries: dict[str, QueryFormula] = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            judgments.append(Judgment(
                request_id=record["request_id"], oer_id=record["oer_id"],
                hosting_formula=record.get("hosting_formula", ""),
                distance=int(record.get("distance", 0)),
                rating=record["rating"],
                timestamp=float(record.get("timestamp", 0.0))))
            query = record.get("query")
            if query and record["request_id"] not in queries:
                queries[record["request_id"]] = QueryFormula(
                    latex=query["latex"], context=query.get("context", ""),
                    question=query.get("question"),
                    paper_abstract=query.get("abstract") or "",
                    paper_keywords=query.get("keywords") or [],
                    weekly_topics=query.get("topics") or [])
    return judgments, queries


def feature_store_from_queries(recommender: Recommender, judgments,
                               queries) -> dict:
    """Recompute the bilinear feature crosses for every judged pair."""
    by_request: dict[str, list[Judgment]] = {}
    for j in judgments:
        by_request.setdefault(j.request_id, []).append(j)
    store: dict = {}
    for request_id in sorted(by_request):
        query = queries.get(request_id)
        if query is None:
            continue
        oer_ids = sorted({j.oer_id for j in by_request[request_id]})
        _, crosses = recommender.cross_features(query, oer_ids)
        for oer_id, cross in crosses.items():
            store[(request_id, oer_id)] = cross.reshape(-1)
    return store


@rec.command("train")
@click.option("--judgments", "judgments_path", required=True,
              type=click.Path(exists=True))
@click.option("--map", "map_dir", required=True, type=click.Path(exists=True))
@click.option("--graph", "graph_dir", required=True,
              type=click.Path(exists=True))
@click.option("--out", "model_path", required=True, type=click.Path())
@click.option("--folds", default=10, show_default=True)
@click.option("--restarts", default=5, show_default=True)
@click.option("--seed", default=0, show_default=True)
def train_command(judgments_path, map_dir, graph_dir, model_path, folds,
                  restarts, seed):
    """Train the ranking weights on a judgment log."""
    fem_graph = fem_mod.load_fem(map_dir)
    het = load_het_graph(graph_dir)
    recommender = Recommender(fem_graph, het)
    judgments, queries = read_judgment_file(judgments_path)
    try:
        store = feature_store_from_queries(recommender, judgments, queries)
        model, cv = train_l2r(
            judgments, store, N_FEATURES, folds=folds, restarts=restarts,
            seed=seed,
            feature_names=recommender.config.feature_names())
    except FemkitError as exc:
        _fail(str(exc))
    model.save(model_path)
    click.echo("fold\t" + "\t".join(METRIC_KEYS))
    for fold in cv["per_fold"]:
        click.echo(f"{fold['fold']}\t" + "\t".join(
            f"{fold[key]:.4f}" for key in METRIC_KEYS))
    click.echo("mean\t" + "\t".join(
        f"{cv['mean'][key]:.4f}" for key in METRIC_KEYS))
    click.echo(f"model written to {model_path}")


@rec.command("eval")
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True))
@click.option("--judgments", "judgments_path", required=True,
              type=click.Path(exists=True))
@click.option("--map", "map_dir", required=True, type=click.Path(exists=True))
@click.option("--graph", "graph_dir", required=True,
              type=click.Path(exists=True))
def eval_command(model_path, judgments_path, map_dir, graph_dir):
    """Score a judgment log with a trained model; print the metric row."""
    fem_graph = fem_mod.load_fem(map_dir)
    het = load_het_graph(graph_dir)
    model = L2RModel.load(model_path)
    recommender = Recommender(fem_graph, het, model=model)
    judgments, queries = read_judgment_file(judgments_path)
    store = feature_store_from_queries(recommender, judgments, queries)
    weights = model.flat_weights

    by_request: dict[str, list[Judgment]] = {}
    for j in judgments:
        by_request.setdefault(j.request_id, []).append(j)
    rankings = {}
    for request_id, entries in sorted(by_request.items()):
        scored = []
        for j in sorted(entries, key=lambda j: j.oer_id):
            features = store.get((request_id, j.oer_id))
            if features is None:
                continue
            scored.append((float(features @ weights), j.oer_id))
        scored.sort(key=lambda pair: (-pair[0], pair[1]))
        rankings[request_id] = [oer_id for _, oer_id in scored]
    summary = evaluate(rankings, judgments)
    click.echo("\t".join(METRIC_KEYS))
    click.echo("\t".join(f"{summary[key]:.4f}" for key in METRIC_KEYS))


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------

@click.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
def serve_command(config_path):
    """Run the HTTP service over built artifacts."""
    try:
        config = ServiceConfig.from_file(config_path)
        run_service(config)
    except FemkitError as exc:
        _fail(str(exc))


if __name__ == "__main__":  # pragma: no cover
    commands = {"fem": fem, "rec": rec, "serve": serve_command}
    name = os.path.basename(sys.argv[0])
    commands.get(name, fem)()
