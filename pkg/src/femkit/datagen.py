"""Deterministic synthetic corpus generation for demos and tests.

Builds a themed wiki-style corpus (pages with math spans and hyperlinks), an
auxiliary dated paper corpus for birth-year mining, reading papers, a
resource catalog, and simulated judgment logs.  Everything is seeded, so two
runs with the same seed produce identical files.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .metrics import BAD, GOOD, OK
from .projection import QueryFormula

THEMES = [
    {
        "name": "probability",
        "titles": ["Bayes' theorem", "Conditional probability",
                   "Law of total probability", "Chain rule of probability",
                   "Posterior distribution"],
        "words": ("probability prior posterior likelihood evidence "
                  "conditional independence random event measure").split(),
        "keywords": ["conditional probability", "posterior distribution"],
    },
    {
        "name": "linear algebra",
        "titles": ["Matrix multiplication", "Singular value decomposition",
                   "Eigenvalue equation", "Gram matrix", "Matrix inverse"],
        "words": ("matrix vector eigenvalue decomposition transpose rank "
                  "column basis projection orthogonal singular").split(),
        "keywords": ["singular value decomposition", "eigenvalue"],
    },
    {
        "name": "calculus",
        "titles": ["Derivative", "Chain rule", "Taylor series",
                   "Definite integral", "Partial derivative"],
        "words": ("derivative integral limit series expansion gradient "
                  "differential continuous rate curve slope").split(),
        "keywords": ["taylor series", "gradient"],
    },
    {
        "name": "optimization",
        "titles": ["Gradient descent", "Convex function",
                   "Lagrange multiplier", "Newton's method",
                   "Stochastic optimization"],
        "words": ("minimize objective constraint convex descent step "
                  "learning rate convergence stationary optimum").split(),
        "keywords": ["gradient descent", "convex optimization"],
    },
    {
        "name": "graphs",
        "titles": ["Adjacency matrix", "PageRank", "Graph Laplacian",
                   "Shortest path", "Random walk"],
        "words": ("graph vertex edge walk transition adjacency degree "
                  "path weighted directed network neighbor").split(),
        "keywords": ["random walk", "adjacency matrix"],
    },
    {
        "name": "statistics",
        "titles": ["Normal distribution", "Standard deviation",
                   "Maximum likelihood estimation", "Central limit theorem",
                   "Covariance"],
        "words": ("sample mean variance estimator distribution gaussian "
                  "deviation moment statistic population error").split(),
        "keywords": ["maximum likelihood", "normal distribution"],
    },
    {
        "name": "geometry",
        "titles": ["Euclidean distance", "Pythagorean theorem",
                   "Law of cosines", "Dot product", "Unit circle"],
        "words": ("distance angle triangle circle radius plane point "
                  "coordinate length projection cosine").split(),
        "keywords": ["euclidean distance", "dot product"],
    },
    {
        "name": "information theory",
        "titles": ["Shannon entropy", "Kullback-Leibler divergence",
                   "Mutual information", "Cross entropy",
                   "Channel capacity"],
        "words": ("entropy information divergence code bit channel "
                  "compression uncertainty message source").split(),
        "keywords": ["shannon entropy", "mutual information"],
    },
    {
        "name": "number theory",
        "titles": ["Euler's totient function", "Modular arithmetic",
                   "Greatest common divisor", "Fermat's little theorem",
                   "Prime factorization"],
        "words": ("integer prime divisor modulo residue congruence "
                  "factorization coprime remainder arithmetic").split(),
        "keywords": ["modular arithmetic", "prime factorization"],
    },
    {
        "name": "machine learning",
        "titles": ["Logistic regression", "Softmax function",
                   "Loss function", "Regularization term",
                   "Activation function"],
        "words": ("model feature weight training loss prediction label "
                  "classifier regression layer activation").split(),
        "keywords": ["logistic regression", "loss function"],
    },
]

# templates keep >= 2 distinct variables and >= 3 operator nodes so most
# generated formulae survive the corpus filter
_RICH_TEMPLATES = [
    "{a}^{{2}}+\\frac{{1}}{{{b}+{c}}}",
    "\\sqrt{{{a}^{{2}}+{b}^{{2}}}}",
    "\\frac{{{a}+{b}}}{{{c}-{d}}}",
    "\\sum_{{{i}=1}}^{{n}} {a}_{{{i}}} {b}_{{{i}}}",
    "\\frac{{{a}{b}}}{{{c}}}+{d}^{{3}}",
    "{a}^{{{b}}}+\\sqrt{{{c}+1}}",
    "\\frac{{P({a}|{b}) P({b})}}{{P({a})}}",
    "{a}_{{{i}+1}} = {a}_{{{i}}} - \\eta \\frac{{{b}}}{{{c}}}",
    "\\frac{{1}}{{1+e^{{-{a}{b}}}}}",
    "\\log \\frac{{{a}}}{{{b}}} + {c}^{{2}}",
    "({a}+{b})^{{2}} - 4{a}{c}",
    "\\frac{{{a}^{{2}}}}{{{b}}}+\\frac{{{c}^{{2}}}}{{{d}}}",
]

# below the variable/operator thresholds on purpose
_POOR_TEMPLATES = ["{a}+{b}", "{a}^{{2}}", "\\frac{{{a}}}{{2}}", "{a}{b}"]

_VARIABLES = "xyzuvwpqrst"
_WEEKLY_TOPICS = [
    "probability foundations", "matrix decompositions",
    "gradient methods", "graph mining", "statistical estimation",
    "information measures",
]

_OER_TYPES = ("video", "slides", "code", "wiki")


@dataclass
class FixturePaths:
    corpus: str
    papers_dated: str
    papers: str
    oers: str
    keywords: str
    topics: str


def _sentence(rng: random.Random, words, n: int) -> str:
    return " ".join(rng.choice(words) for _ in range(n))


def _fill(template: str, rng: random.Random) -> str:
    names = {}
    pool = list(_VARIABLES)
    rng.shuffle(pool)
    for key in "abcd":
        names[key] = pool.pop()
    names["i"] = "i"
    return template.format(**names)


def generate_corpus(out_dir, n_pages: int = 50, spans_per_page: int = 4,
                    seed: int = 20240810) -> FixturePaths:
    """Write the full input fixture into `out_dir` and return its paths."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    rng = random.Random(seed)

    pages = []
    for index in range(n_pages):
        theme = THEMES[index % len(THEMES)]
        title = theme["titles"][(index // len(THEMES)) % len(theme["titles"])]
        if index >= len(THEMES) * len(theme["titles"]):
            title = f"{title} (variant {index})"
        pages.append({"id": f"page{index:03d}", "title": title,
                      "theme": theme})

    records = []
    for index, page in enumerate(pages):
        theme = page["theme"]
        spans = []
        for s in range(spans_per_page):
            lead = _sentence(rng, theme["words"], 18)
            keyword = rng.choice(theme["keywords"])
            if s == spans_per_page - 1 and rng.random() < 0.5:
                latex = _fill(rng.choice(_POOR_TEMPLATES), rng)
            else:
                latex = _fill(rng.choice(_RICH_TEMPLATES), rng)
            trail = _sentence(rng, theme["words"], 18)
            spans.append(f"{lead} {keyword} <math>{latex}</math> {trail}")
        if index == 7:
            spans.append("broken span <math>\\frac{1}</math> here")
        # links: ring within the theme plus a couple of cross-theme links
        same_theme = [p["id"] for p in pages if p["theme"] is theme
                      and p["id"] != page["id"]]
        links = same_theme[:2]
        links.append(pages[(index + 3) % n_pages]["id"])
        records.append({"id": page["id"], "title": page["title"],
                        "text": " ".join(spans),
                        "links": sorted(set(links) - {page["id"]})})

    corpus_path = os.path.join(out_dir, "corpus.jsonl")
    with open(corpus_path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record) + "\n")

    # dated papers for birth-year mining: early mentions for a third of
    # the titles, later mentions for another third
    dated_path = os.path.join(out_dir, "papers_dated.jsonl")
    with open(dated_path, "w", encoding="utf-8") as handle:
        for index, page in enumerate(pages):
            if index % 3 == 2:
                continue
            year = 1900 + (index * 7) % 90
            text = (f"this classic work builds on {page['title']} "
                    f"and related ideas in {page['theme']['name']}")
            handle.write(json.dumps({
                "title": f"A study of {page['title'].lower()}",
                "year": year, "text": text}) + "\n")
            if index % 3 == 0:
                handle.write(json.dumps({
                    "title": "A later revisit", "year": year + 25,
                    "text": f"revisiting {page['title']} decades later"},
                ) + "\n")

    keywords = sorted({k for theme in THEMES for k in theme["keywords"]})
    keywords_path = os.path.join(out_dir, "keywords.txt")
    with open(keywords_path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(keywords) + "\n")

    topics_path = os.path.join(out_dir, "topics.txt")
    with open(topics_path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(_WEEKLY_TOPICS) + "\n")

    papers_path = os.path.join(out_dir, "papers.jsonl")
    with open(papers_path, "w", encoding="utf-8") as handle:
        for i in range(8):
            theme = THEMES[i % len(THEMES)]
            other = THEMES[(i + 4) % len(THEMES)]
            record = {
                "id": f"reading{i}",
                "title": f"Reading on {theme['name']}",
                "abstract": _sentence(rng, theme["words"] + other["words"],
                                      40),
                "keywords": theme["keywords"] + other["keywords"][:1],
                "weekly_topics": [_WEEKLY_TOPICS[i % len(_WEEKLY_TOPICS)],
                                  _WEEKLY_TOPICS[(i + 1) % len(_WEEKLY_TOPICS)]],
                "cites": [f"reading{(i + j) % 8}" for j in (1, 3)],
            }
            handle.write(json.dumps(record) + "\n")

    oers_path = os.path.join(out_dir, "oers.jsonl")
    with open(oers_path, "w", encoding="utf-8") as handle:
        for i in range(100):
            theme = THEMES[i % len(THEMES)]
            keyword = theme["keywords"][i % len(theme["keywords"])]
            record = {
                "id": f"oer{i:03d}",
                "type": _OER_TYPES[i % len(_OER_TYPES)],
                "title": f"{keyword} {_OER_TYPES[i % len(_OER_TYPES)]}",
                "description": (f"{keyword} explained: "
                                + _sentence(rng, theme["words"], 22)),
                "related": ([f"oer{(i + len(THEMES)) % 100:03d}"]
                            if i % 5 == 0 else []),
            }
            handle.write(json.dumps(record) + "\n")

    return FixturePaths(corpus=corpus_path, papers_dated=dated_path,
                        papers=papers_path, oers=oers_path,
                        keywords=keywords_path, topics=topics_path)


def simulate_judgments(recommender, out_path, n_requests: int = 25,
                       per_request: int = 6, seed: int = 7) -> int:
    """Run seeded queries through the recommender and emit rank-biased
    Good/OK/Bad judgments with the query embedded per record.

    The rating distribution is tilted so top-ranked resources are usually
    relevant, giving the rank learner a recoverable signal.
    """
    rng = random.Random(seed)
    fem = recommender.fem
    formula_ids = sorted(fem.vertices)
    written = 0
    with open(out_path, "w", encoding="utf-8") as handle:
        for r in range(n_requests):
            fid = formula_ids[(r * 7) % len(formula_ids)]
            vertex = fem.vertices[fid]
            theme = THEMES[r % len(THEMES)]
            query = QueryFormula(
                latex=vertex.latex,
                context=vertex.context,
                question=("what does this formula mean"
                          if r % 5 == 0 else None),
                paper_abstract=_sentence(rng, theme["words"], 30),
                paper_keywords=theme["keywords"],
                weekly_topics=[_WEEKLY_TOPICS[r % len(_WEEKLY_TOPICS)]],
            )
            result = recommender.recommend(query, top_n=per_request)
            request_id = f"fixreq{r:03d}"
            query_payload = {
                "latex": query.latex, "context": query.context,
                "question": query.question,
                "abstract": query.paper_abstract,
                "keywords": query.paper_keywords,
                "topics": query.weekly_topics,
            }
            for rank, scored in enumerate(result.results):
                roll = rng.random()
                if rank == 0:
                    rating = GOOD if roll < 0.8 else OK
                elif rank <= 2:
                    rating = OK if roll < 0.6 else (GOOD if roll < 0.75
                                                    else BAD)
                else:
                    rating = BAD if roll < 0.75 else OK
                record = {
                    "request_id": request_id,
                    "oer_id": scored.oer_id,
                    "hosting_formula": scored.hosting_formula,
                    "distance": scored.distance,
                    "rating": rating,
                    "timestamp": float(r * 100 + rank),
                    "query": query_payload,
                }
                handle.write(json.dumps(record) + "\n")
                written += 1
    return written
