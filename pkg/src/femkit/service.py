"""HTTP service over built artifacts.

Read endpoints share immutable in-memory artifacts loaded at startup.
Recommendation requests are logged with their per-resource feature crosses,
so judgments can be joined to exact training rows later; judgment writes are
flushed to disk before the response is acknowledged.  Retraining writes a
new versioned model file and swaps the serving model atomically.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
import uuid
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import Response
from pydantic import BaseModel, Field

from . import fem as fem_mod
from .errors import (
    InsufficientDataError,
    NoJudgmentsOfTypeError,
    ParseError,
    UnknownFormulaError,
)
from .hetgraph import load_het_graph
from .l2r import L2RModel, train_l2r
from .metrics import GAINS, Judgment, ajd, evaluate
from .projection import N_FEATURES, QueryFormula
from .recommend import Recommender

REQUEST_LOG = "requests.jsonl"
JUDGMENT_LOG = "judgments.jsonl"
MODELS_DIR = "models"
CURRENT_MODEL_POINTER = "CURRENT"


@dataclass
class ServiceConfig:
    map_dir: str
    graph_dir: str
    log_dir: str
    model_path: str | None = None
    host: str = "127.0.0.1"
    port: int = 8351
    folds: int = 10
    restarts: int = 5
    seed: int = 0

    @classmethod
    def from_file(cls, path) -> "ServiceConfig":
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})


class QueryPayload(BaseModel):
    latex: str
    context: str = ""
    question: str | None = None
    abstract: str | None = None
    keywords: list[str] = Field(default_factory=list)
    topics: list[str] = Field(default_factory=list)

    def to_query(self) -> QueryFormula:
        return QueryFormula(latex=self.latex, context=self.context,
                            question=self.question,
                            paper_abstract=self.abstract or "",
                            paper_keywords=self.keywords,
                            weekly_topics=self.topics)

    def digest(self) -> str:
        canonical = json.dumps(self.model_dump(), sort_keys=True)
        return hashlib.sha1(canonical.encode("utf-8")).hexdigest()


class RecommendPayload(QueryPayload):
    top_n: int = 10


class JudgmentPayload(BaseModel):
    request_id: str
    oer_id: str
    rating: str

    def validate_rating(self) -> None:
        if self.rating not in GAINS:
            raise HTTPException(status_code=422,
                                detail=f"rating must be one of {sorted(GAINS)}")


class ArtifactStore:
    """Owns the serving artifacts, the append-only logs, and model versions."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.fem = fem_mod.load_fem(config.map_dir)
        self.graph = load_het_graph(config.graph_dir)
        os.makedirs(config.log_dir, exist_ok=True)
        os.makedirs(self.models_dir, exist_ok=True)
        self._write_lock = threading.Lock()
        self._request_index: dict[str, dict] = {}
        self._replay_request_log()
        model = self._load_serving_model()
        self.recommender = Recommender(self.fem, self.graph, model=model)

    # -- model versions -----------------------------------------------------

    @property
    def models_dir(self) -> str:
        return os.path.join(self.config.log_dir, MODELS_DIR)

    def _load_serving_model(self) -> L2RModel | None:
        pointer = os.path.join(self.models_dir, CURRENT_MODEL_POINTER)
        if os.path.exists(pointer):
            with open(pointer, encoding="utf-8") as handle:
                name = handle.read().strip()
            return L2RModel.load(os.path.join(self.models_dir, name))
        if self.config.model_path and os.path.exists(self.config.model_path):
            return L2RModel.load(self.config.model_path)
        return None

    def next_model_version(self) -> int:
        versions = [0]
        for name in os.listdir(self.models_dir):
            if name.startswith("model_v") and name.endswith(".json"):
                try:
                    versions.append(int(name[len("model_v"):-len(".json")]))
                except ValueError:
                    continue
        return max(versions) + 1

    def install_model(self, model: L2RModel, version: int) -> str:
        name = f"model_v{version}.json"
        model.save(os.path.join(self.models_dir, name))
        pointer = os.path.join(self.models_dir, CURRENT_MODEL_POINTER)
        tmp = pointer + ".tmp"
        with open(tmp, "w", encoding="utf-8") as handle:
            handle.write(name + "\n")
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, pointer)
        self.recommender = Recommender(self.fem, self.graph, model=model)
        return name

    # -- logs -----------------------------------------------------------------

    def _append(self, filename: str, record: dict) -> None:
        path = os.path.join(self.config.log_dir, filename)
        with self._write_lock:
            with open(path, "a", encoding="utf-8") as handle:
                handle.write(json.dumps(record) + "\n")
                handle.flush()
                os.fsync(handle.fileno())

    def _replay_request_log(self) -> None:
        path = os.path.join(self.config.log_dir, REQUEST_LOG)
        if not os.path.exists(path):
            return
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    record = json.loads(line)
                    self._request_index[record["request_id"]] = record

    def log_request(self, payload: QueryPayload, results) -> str:
        request_id = uuid.uuid4().hex
        record = {
            "request_id": request_id,
            "payload_hash": payload.digest(),
            "timestamp": time.time(),
            "query": payload.model_dump(),
            "results": [
                {"oer_id": r.oer_id, "hosting_formula": r.hosting_formula,
                 "distance": r.distance, "score": r.score,
                 "features": [float(x) for x in r.features.reshape(-1)]}
                for r in results
            ],
        }
        self._append(REQUEST_LOG, record)
        self._request_index[request_id] = record
        return request_id

    def request_entry(self, request_id: str) -> dict | None:
        return self._request_index.get(request_id)

    def log_judgment(self, judgment: Judgment) -> None:
        self._append(JUDGMENT_LOG, {
            "request_id": judgment.request_id,
            "oer_id": judgment.oer_id,
            "hosting_formula": judgment.hosting_formula,
            "distance": judgment.distance,
            "rating": judgment.rating,
            "timestamp": judgment.timestamp,
        })

    def load_judgments(self) -> list[Judgment]:
        path = os.path.join(self.config.log_dir, JUDGMENT_LOG)
        judgments: list[Judgment] = []
        if not os.path.exists(path):
            return judgments
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    record = json.loads(line)
                    judgments.append(Judgment(
                        request_id=record["request_id"],
                        oer_id=record["oer_id"],
                        hosting_formula=record.get("hosting_formula", ""),
                        distance=int(record.get("distance", 0)),
                        rating=record["rating"],
                        timestamp=float(record.get("timestamp", 0.0))))
        return judgments

    def feature_store(self) -> dict:
        store: dict = {}
        for request_id, record in self._request_index.items():
            for result in record.get("results", []):
                store[(request_id, result["oer_id"])] = np.asarray(
                    result["features"], dtype=np.float64)
        return store


def create_app(config: ServiceConfig) -> FastAPI:
    store = ArtifactStore(config)
    app = FastAPI(title="formula evolution service")
    app.state.store = store
    retrain_lock = threading.Lock()

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "vertices": len(store.fem.vertices),
                "resources": len(store.graph.oers)}

    @app.post("/project")
    def project_endpoint(payload: QueryPayload):
        try:
            result = store.recommender.projector.project(payload.to_query(),
                                                         top_n=None)
        except ParseError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "anchor": result.anchor,
            "candidates": [
                {"id": s.candidate, "distance": s.distance,
                 "features": [float(x) for x in s.features]}
                for s in result.scores
            ],
        }

    @app.post("/recommend")
    def recommend_endpoint(payload: RecommendPayload):
        try:
            outcome = store.recommender.recommend(payload.to_query(),
                                                  top_n=payload.top_n)
        except ParseError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        request_id = store.log_request(payload, outcome.results)
        return {
            "request_id": request_id,
            "anchor": outcome.anchor,
            "results": [
                {"oer_id": r.oer_id, "score": r.score,
                 "hosting_formula": r.hosting_formula,
                 "distance": r.distance, "type": r.type, "title": r.title}
                for r in outcome.results
            ],
        }

    @app.get("/fem/subgraph")
    def subgraph_endpoint(formula: str, depth: int = 3):
        try:
            fragment = fem_mod.subgraph(store.fem, formula, max_depth=depth)
        except UnknownFormulaError:
            raise HTTPException(status_code=404,
                                detail=f"unknown formula {formula!r}")
        vertices = []
        for fid in sorted(fragment.distances):
            vertex = store.fem.vertices[fid]
            vertices.append({"id": fid, "latex": vertex.latex,
                             "distance": fragment.distances[fid],
                             "lg": vertex.generality,
                             "lc": vertex.layout_complexity})
        return {
            "target": formula,
            "vertices": vertices,
            "edges": [{"src": e.src, "dst": e.dst, "p": e.probability}
                      for e in fragment.edges],
        }

    @app.post("/judgments", status_code=204)
    def judgments_endpoint(payload: JudgmentPayload):
        payload.validate_rating()
        entry = store.request_entry(payload.request_id)
        if entry is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown request "
                                       f"{payload.request_id!r}")
        by_oer = {r["oer_id"]: r for r in entry.get("results", [])}
        result = by_oer.get(payload.oer_id)
        if result is None:
            raise HTTPException(
                status_code=404,
                detail=f"resource {payload.oer_id!r} was not part of "
                       f"request {payload.request_id!r}")
        store.log_judgment(Judgment(
            request_id=payload.request_id, oer_id=payload.oer_id,
            hosting_formula=result["hosting_formula"],
            distance=int(result["distance"]), rating=payload.rating,
            timestamp=time.time()))
        return Response(status_code=204)

    @app.post("/admin/retrain")
    def retrain_endpoint():
        with retrain_lock:
            judgments = store.load_judgments()
            features = store.feature_store()
            try:
                model, cv = train_l2r(
                    judgments, features, N_FEATURES,
                    folds=config.folds, restarts=config.restarts,
                    seed=config.seed,
                    feature_names=store.recommender.config.feature_names())
            except InsufficientDataError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            version = store.next_model_version()
            name = store.install_model(model, version)
        return {"model_version": name, "cv_metrics": cv["mean"],
                "folds": cv["folds"]}

    @app.get("/metrics")
    def metrics_endpoint():
        judgments = store.load_judgments()
        rankings = {
            request_id: [r["oer_id"] for r in record.get("results", [])]
            for request_id, record in store._request_index.items()
        }
        summary = evaluate(rankings, judgments)
        distances = {}
        for rating in sorted(GAINS):
            try:
                distances[rating] = ajd(judgments, rating)
            except NoJudgmentsOfTypeError:
                distances[rating] = None
        return {"requests_logged": len(store._request_index),
                "judgments": len(judgments),
                "ranking": summary,
                "ajd": distances}

    return app


def serve(config: ServiceConfig) -> None:
    """Blocking entry point used by the CLI."""
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port,
                log_level="warning")
