"""Offline ranking metrics over judged recommendations.

Gain mapping: Good = 2, OK = 1, Bad = 0.  Precision, MAP and MRR treat Good
and OK as relevant.  All request-level metrics are macro-averaged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NoJudgmentsOfTypeError

GOOD = "Good"
OK = "OK"
BAD = "Bad"

GAINS = {GOOD: 2, OK: 1, BAD: 0}
RELEVANT_RATINGS = frozenset({GOOD, OK})

METRIC_KEYS = ("NDCG@3", "NDCG@5", "NDCG@all", "P@3", "P@5", "MAP", "MRR")


@dataclass(frozen=True)
class Judgment:
    request_id: str
    oer_id: str
    hosting_formula: str
    distance: int
    rating: str
    timestamp: float = 0.0


def dedupe_judgments(judgments) -> list[Judgment]:
    """One judgment per (request, resource): the latest timestamp wins."""
    best: dict[tuple[str, str], Judgment] = {}
    for j in sorted(judgments, key=lambda j: j.timestamp):
        best[(j.request_id, j.oer_id)] = j
    return [best[k] for k in sorted(best)]


def dcg(gains, k: int | None = None) -> float:
    if k is not None:
        gains = gains[:k]
    return sum(g / math.log2(i + 2) for i, g in enumerate(gains))


def ndcg(ratings_in_rank_order, k: int | None = None) -> float:
    gains = [GAINS[r] for r in ratings_in_rank_order]
    ideal = dcg(sorted(gains, reverse=True), k)
    if ideal == 0:
        return 0.0
    return dcg(gains, k) / ideal


def precision_at(ratings_in_rank_order, k: int) -> float:
    top = ratings_in_rank_order[:k]
    if k <= 0:
        return 0.0
    return sum(1 for r in top if r in RELEVANT_RATINGS) / k


def average_precision(ratings_in_rank_order) -> float:
    relevant_total = sum(1 for r in ratings_in_rank_order
                         if r in RELEVANT_RATINGS)
    if relevant_total == 0:
        return 0.0
    hits = 0
    acc = 0.0
    for i, rating in enumerate(ratings_in_rank_order, start=1):
        if rating in RELEVANT_RATINGS:
            hits += 1
            acc += hits / i
    return acc / relevant_total


def reciprocal_rank(ratings_in_rank_order) -> float:
    for i, rating in enumerate(ratings_in_rank_order, start=1):
        if rating in RELEVANT_RATINGS:
            return 1.0 / i
    return 0.0


def evaluate_request(ratings_in_rank_order) -> dict:
    return {
        "NDCG@3": ndcg(ratings_in_rank_order, 3),
        "NDCG@5": ndcg(ratings_in_rank_order, 5),
        "NDCG@all": ndcg(ratings_in_rank_order, None),
        "P@3": precision_at(ratings_in_rank_order, 3),
        "P@5": precision_at(ratings_in_rank_order, 5),
        "MAP": average_precision(ratings_in_rank_order),
        "MRR": reciprocal_rank(ratings_in_rank_order),
    }


def evaluate(rankings: dict, judgments) -> dict:
    """Macro-averaged metrics over requests.

    `rankings` maps request_id to resource ids in served rank order; the
    order is restricted to the judged resources of that request before any
    metric is computed.
    """
    ratings_by_request: dict[str, dict[str, str]] = {}
    for j in dedupe_judgments(judgments):
        ratings_by_request.setdefault(j.request_id, {})[j.oer_id] = j.rating

    per_request: list[dict] = []
    for request_id in sorted(ratings_by_request):
        ranked = rankings.get(request_id)
        if ranked is None:
            continue
        judged = ratings_by_request[request_id]
        ratings = [judged[oer] for oer in ranked if oer in judged]
        per_request.append(evaluate_request(ratings))
    if not per_request:
        return {key: 0.0 for key in METRIC_KEYS} | {"requests": 0}
    summary = {key: sum(r[key] for r in per_request) / len(per_request)
               for key in METRIC_KEYS}
    summary["requests"] = len(per_request)
    return summary


def ajd(judgments, rating_type: str) -> float:
    """Mean evolution distance over judgments of one rating class."""
    distances = [j.distance for j in dedupe_judgments(judgments)
                 if j.rating == rating_type]
    if not distances:
        raise NoJudgmentsOfTypeError(rating_type)
    return sum(distances) / len(distances)
