"""Session-scoped pipeline artifacts shared by service and CLI tests."""

from dataclasses import dataclass

import pytest

from femkit.corpus import (
    filter_formulas,
    load_corpus,
    load_paper_corpus,
    mine_birth_times,
)
from femkit.datagen import generate_corpus, simulate_judgments
from femkit.fem import FEMGraph, FEMParams, build_fem, save_fem
from femkit.hetgraph import (
    HetGraph,
    build_het_graph,
    load_oers,
    load_papers,
    save_het_graph,
)
from femkit.recommend import Recommender


@dataclass
class Artifacts:
    inputs_dir: str
    map_dir: str
    graph_dir: str
    judgments_path: str
    fem: FEMGraph
    graph: HetGraph
    recommender: Recommender
    corpus_paths: object


# small map parameters keep the session build under a few seconds
TEST_PARAMS = FEMParams(dim=24, walk_length=12, walks_per_vertex=5,
                        epochs=2, prune_threshold=0.3, seed=11)


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory) -> Artifacts:
    root = tmp_path_factory.mktemp("artifacts")
    inputs = root / "inputs"
    paths = generate_corpus(inputs, n_pages=30, seed=4242)
    corpus = load_corpus(paths.corpus)
    kept = filter_formulas(corpus.formulas)
    birth = mine_birth_times(kept, corpus.pages,
                             load_paper_corpus(paths.papers_dated))
    fem = build_fem(corpus.pages, kept, birth, TEST_PARAMS)
    map_dir = root / "map"
    save_fem(fem, map_dir)

    with open(paths.keywords, encoding="utf-8") as handle:
        keywords = [line.strip() for line in handle if line.strip()]
    with open(paths.topics, encoding="utf-8") as handle:
        topics = [line.strip() for line in handle if line.strip()]
    graph = build_het_graph(load_papers(paths.papers), keywords, topics,
                            load_oers(paths.oers), fem)
    graph_dir = root / "graph"
    save_het_graph(graph, graph_dir)

    recommender = Recommender(fem, graph)
    judgments_path = root / "judgments.jsonl"
    simulate_judgments(recommender, judgments_path, n_requests=10,
                       per_request=5, seed=5)
    return Artifacts(inputs_dir=str(inputs), map_dir=str(map_dir),
                     graph_dir=str(graph_dir),
                     judgments_path=str(judgments_path), fem=fem,
                     graph=graph, recommender=recommender,
                     corpus_paths=paths)
