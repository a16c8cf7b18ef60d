"""Listwise learning to rank by coordinate ascent on mean reciprocal rank.

The model is a weight matrix over (projection feature, resource feature)
products.  Training sweeps one weight at a time, line-searching on a coarse
grid over [-2, 2] refined once around the best point, and keeps the best of
several random restarts.  The objective is mean MRR over training requests;
accepted updates never decrease it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError
from .metrics import RELEVANT_RATINGS, dedupe_judgments, evaluate

GRID_RANGE = (-2.0, 2.0)
GRID_POINTS = 21
DEFAULT_RESTARTS = 5
IMPROVEMENT_TOL = 1e-6
MAX_SWEEPS = 25


@dataclass
class L2RModel:
    weights: np.ndarray  # (n projection features, n resource features)
    metadata: dict = field(default_factory=dict)

    @property
    def flat_weights(self) -> np.ndarray:
        return self.weights.reshape(-1)

    def save(self, path) -> None:
        payload = {"weights": self.weights.tolist(),
                   "metadata": self.metadata}
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
            handle.write("\n")

    @classmethod
    def load(cls, path) -> "L2RModel":
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
        return cls(weights=np.asarray(payload["weights"], dtype=np.float64),
                   metadata=payload.get("metadata", {}))


@dataclass
class _TrainingData:
    features: np.ndarray        # (n judged pairs, n weights)
    relevant: np.ndarray        # bool per pair
    ratings: list[str]
    request_ids: list[str]      # one per slice
    oer_ids: list[str]          # one per pair
    slices: list[tuple[int, int]]

    def __post_init__(self):
        # cached index arrays for the vectorized objective
        self.starts = np.asarray([s for s, _ in self.slices], dtype=np.int64)
        counts = [e - s for s, e in self.slices]
        self.pair_counts = np.asarray(counts, dtype=np.int64)
        self.positions = np.arange(self.features.shape[0], dtype=np.int64)

    def subset(self, request_positions) -> "_TrainingData":
        keep = sorted(request_positions)
        rows: list[int] = []
        slices: list[tuple[int, int]] = []
        for pos in keep:
            start, end = self.slices[pos]
            slices.append((len(rows), len(rows) + (end - start)))
            rows.extend(range(start, end))
        idx = np.asarray(rows, dtype=np.int64)
        return _TrainingData(
            features=self.features[idx],
            relevant=self.relevant[idx],
            ratings=[self.ratings[i] for i in rows],
            request_ids=[self.request_ids[p] for p in keep],
            oer_ids=[self.oer_ids[i] for i in rows],
            slices=slices,
        )


def build_training_data(judgments, feature_store) -> _TrainingData:
    """Flatten judged (request, resource) pairs and their feature crosses.

    Requests without any relevant judgment carry a constant zero MRR and are
    excluded; fewer than two usable requests is not enough signal to train.
    """
    by_request: dict[str, list] = {}
    for j in dedupe_judgments(judgments):
        by_request.setdefault(j.request_id, []).append(j)

    rows = []
    relevant = []
    ratings = []
    oer_ids = []
    request_ids = []
    slices = []
    for request_id in sorted(by_request):
        entries = sorted(by_request[request_id], key=lambda j: j.oer_id)
        if not any(j.rating in RELEVANT_RATINGS for j in entries):
            continue
        start = len(rows)
        for j in entries:
            key = (j.request_id, j.oer_id)
            if key not in feature_store:
                raise InsufficientDataError(
                    f"no features for request {j.request_id!r} "
                    f"resource {j.oer_id!r}")
            rows.append(np.asarray(feature_store[key],
                                   dtype=np.float64).reshape(-1))
            relevant.append(j.rating in RELEVANT_RATINGS)
            ratings.append(j.rating)
            oer_ids.append(j.oer_id)
        request_ids.append(request_id)
        slices.append((start, len(rows)))

    if len(slices) < 2:
        raise InsufficientDataError(
            "training needs at least 2 requests with a relevant judgment")
    widths = {row.size for row in rows}
    if len(widths) != 1:
        raise InsufficientDataError(f"inconsistent feature widths: {widths}")
    return _TrainingData(features=np.vstack(rows),
                         relevant=np.asarray(relevant, dtype=bool),
                         ratings=ratings, request_ids=request_ids,
                         oer_ids=oer_ids, slices=slices)


def mean_mrr(scores: np.ndarray, data: _TrainingData) -> float:
    """Mean reciprocal rank of the first relevant item per request; ties
    rank by input position so the objective is deterministic.

    The first relevant item is the relevant row with the highest score
    (earliest position on ties); its rank is one plus the number of rows
    strictly above it plus equal-score rows before it.
    """
    n = scores.shape[0]
    rel_scores = np.where(data.relevant, scores, -np.inf)
    best = np.maximum.reduceat(rel_scores, data.starts)
    best_pair = np.repeat(best, data.pair_counts)
    above = np.add.reduceat(scores > best_pair, data.starts)
    hit = data.relevant & (scores == best_pair)
    first = np.minimum.reduceat(np.where(hit, data.positions, n),
                                data.starts)
    first_pair = np.repeat(first, data.pair_counts)
    tied_before = np.add.reduceat(
        (scores == best_pair) & (data.positions < first_pair), data.starts)
    ranks = above + tied_before + 1
    reciprocal = np.where(np.isfinite(best), 1.0 / ranks, 0.0)
    return float(reciprocal.mean())


def _line_search(scores, column, current, data, tol, objective):
    """Best grid point for one coordinate: coarse grid over the full range,
    refined once around the winner."""
    lo, hi = GRID_RANGE
    step = (hi - lo) / (GRID_POINTS - 1)
    best_value = objective
    best_point = current
    for point in np.linspace(lo, hi, GRID_POINTS):
        value = mean_mrr(scores + (point - current) * column, data)
        if value > best_value + tol:
            best_value = value
            best_point = point
    for point in np.linspace(best_point - step, best_point + step,
                             GRID_POINTS):
        value = mean_mrr(scores + (point - current) * column, data)
        if value > best_value + tol:
            best_value = value
            best_point = point
    return best_point, best_value


def _coordinate_ascent(data: _TrainingData, rng: np.random.Generator,
                       restarts: int, tol: float) -> tuple[np.ndarray, float]:
    """Greedy coordinate ascent: every round line-searches each coordinate
    and accepts the single most-improving move, so uninformative weights are
    never touched once the objective saturates."""
    n_weights = data.features.shape[1]
    lo, hi = GRID_RANGE

    best_weights = np.zeros(n_weights)
    best_objective = -1.0
    for restart in range(max(restarts, 1)):
        if restart == 0:
            weights = np.zeros(n_weights)
        else:
            weights = rng.uniform(lo, hi, size=n_weights)
        scores = data.features @ weights
        objective = mean_mrr(scores, data)
        for _ in range(MAX_SWEEPS * n_weights):
            move = None  # (value, coordinate, point)
            for j in range(n_weights):
                point, value = _line_search(scores, data.features[:, j],
                                            weights[j], data, tol, objective)
                if value > objective + tol and (
                        move is None or value > move[0]):
                    move = (value, j, point)
            if move is None:
                break
            objective, j, point = move
            scores = scores + (point - weights[j]) * data.features[:, j]
            weights[j] = point
        if objective > best_objective:
            best_objective = objective
            best_weights = weights.copy()
    return best_weights, best_objective


def _fold_metrics(weights: np.ndarray, data: _TrainingData,
                  judgments) -> dict:
    scores = data.features @ weights
    rankings = {}
    for pos, (start, end) in enumerate(data.slices):
        order = np.lexsort((np.arange(end - start), -scores[start:end]))
        rankings[data.request_ids[pos]] = [data.oer_ids[start + i]
                                           for i in order]
    held_requests = set(data.request_ids)
    held_judgments = [j for j in judgments if j.request_id in held_requests]
    return evaluate(rankings, held_judgments)


def train_l2r(judgments, feature_store, n_projection_features: int,
              folds: int = 10, restarts: int = DEFAULT_RESTARTS,
              seed: int = 0, tol: float = IMPROVEMENT_TOL,
              feature_names=None) -> tuple[L2RModel, dict]:
    """Train the weight matrix and report cross-validated metrics.

    Returns the final model (trained on all usable requests) and a summary
    with one metric row per fold plus their mean.
    """
    data = build_training_data(judgments, feature_store)
    n_weights = data.features.shape[1]
    if n_weights % n_projection_features != 0:
        raise InsufficientDataError(
            f"feature width {n_weights} is not a multiple of "
            f"{n_projection_features} projection features")
    rng = np.random.default_rng(seed)

    n_requests = len(data.slices)
    usable_folds = min(folds, n_requests)
    order = rng.permutation(n_requests)
    fold_of = {int(order[i]): i % usable_folds for i in range(n_requests)}

    per_fold: list[dict] = []
    for fold in range(usable_folds):
        train_pos = [p for p in range(n_requests) if fold_of[p] != fold]
        test_pos = [p for p in range(n_requests) if fold_of[p] == fold]
        if not train_pos or not test_pos:
            continue
        if len(train_pos) < 2:
            continue
        fold_rng = np.random.default_rng(seed * 1000 + fold)
        weights, _ = _coordinate_ascent(data.subset(train_pos), fold_rng,
                                        restarts, tol)
        metrics = _fold_metrics(weights, data.subset(test_pos), judgments)
        metrics["fold"] = fold
        per_fold.append(metrics)

    final_weights, final_objective = _coordinate_ascent(data, rng, restarts,
                                                        tol)
    n_resource_features = n_weights // n_projection_features
    cv = {
        "folds": len(per_fold),
        "per_fold": per_fold,
        "mean": {key: (sum(f[key] for f in per_fold) / len(per_fold)
                       if per_fold else 0.0)
                 for key in ("NDCG@3", "NDCG@5", "NDCG@all", "P@3", "P@5",
                             "MAP", "MRR")},
        "training_mrr": final_objective,
    }
    model = L2RModel(
        weights=final_weights.reshape(n_projection_features,
                                      n_resource_features),
        metadata={
            "objective": "MRR",
            "folds": usable_folds,
            "seed": seed,
            "restarts": restarts,
            "requests": n_requests,
            "projection_features": n_projection_features,
            "resource_features": n_resource_features,
            "resource_feature_names": list(feature_names or []),
        })
    return model, cv
