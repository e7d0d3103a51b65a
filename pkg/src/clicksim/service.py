"""HTTP API for the companion UI: run assessments, browse results.

The app holds immutable artifacts (graph, model, embedding service) plus
one synchronized LRU store of recent reports keyed by request id. The
request id is a content hash of the resolved request, so repeating a
request returns the stored report and byte-identical bodies. Endpoint
schemas are documented in docs/api.md.
"""

from __future__ import annotations

import hashlib
import json
import threading
from collections import OrderedDict
from dataclasses import asdict, replace

from fastapi import Body, FastAPI, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import __version__
from .assess import AssessmentReport, CampaignSpec
from .assess import assess as run_assessment
from .embedding import EmbeddingService
from .errors import DuplicateNode, RemoteUnavailable, UnknownField
from .events import SESSION_END, SESSION_START
from .graph import EventTransitionGraph
from .predictor import HybridModel
from .simulate import SimulationConfig

__all__ = ["create_app", "ReportStore"]

MAX_SYNC_SESSIONS = 10_000
TOP_EVENTS = 10


class ReportStore:
    """Thread-safe LRU map of request id to report."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self._capacity = capacity
        self._lock = threading.Lock()
        self._entries: OrderedDict[str, AssessmentReport] = OrderedDict()

    def get(self, request_id: str) -> AssessmentReport | None:
        with self._lock:
            report = self._entries.get(request_id)
            if report is not None:
                self._entries.move_to_end(request_id)
            return report

    def put(self, request_id: str, report: AssessmentReport) -> None:
        with self._lock:
            self._entries[request_id] = report
            self._entries.move_to_end(request_id)
            while len(self._entries) > self._capacity:
                self._entries.popitem(last=False)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


def _fingerprint(doc) -> str:
    material = json.dumps(doc, ensure_ascii=False, sort_keys=True)
    return hashlib.sha256(material.encode("utf-8")).hexdigest()[:16]


def _error(status: int, exc_type: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"error": {"type": exc_type, "message": message}},
    )


def _not_loaded() -> JSONResponse:
    return _error(503, "NotLoaded", "server started without graph and model artifacts")


def graph_summary(graph: EventTransitionGraph) -> dict:
    """Node/edge counts, density over valid ordered pairs, busiest events."""
    possible = len(graph.valid_sources()) * len(graph.valid_destinations())
    incoming: dict[str, int] = {}
    for src in graph.out_edges:
        for edge in graph.out_edges[src]:
            incoming[edge.dst] = incoming.get(edge.dst, 0) + edge.count
    sentinels = {SESSION_START.id, SESSION_END.id}
    top = sorted(
        ((nid, count) for nid, count in incoming.items() if nid not in sentinels and count > 0),
        key=lambda item: (-item[1], item[0]),
    )[:TOP_EVENTS]
    return {
        "nodes": graph.n_nodes,
        "edges": graph.n_edges,
        "density": graph.n_edges / possible if possible else 0.0,
        "top_events": [
            {"id": nid, "text": graph.nodes[nid].canonical_text, "visits": count}
            for nid, count in top
        ],
    }


def _resolve_request(payload: dict, sim_defaults: SimulationConfig, paired: bool, n_samples: int):
    """Apply defaults and validate; returns (campaign, sim config, paired, samples)."""
    if not isinstance(payload, dict):
        raise ValueError("request body must be a JSON object")
    allowed = {"campaign", "n_sessions", "seed", "max_length", "paired", "samples"}
    unexpected = sorted(set(payload) - allowed)
    if unexpected:
        raise ValueError(f"unexpected request fields: {unexpected}")
    if "campaign" not in payload:
        raise ValueError("request must include a campaign")
    campaign = CampaignSpec.from_json_dict(payload["campaign"])

    def pick_int(name, default, minimum):
        value = payload.get(name, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError(f"{name} must be an integer")
        if value < minimum:
            raise ValueError(f"{name} must be at least {minimum}")
        return value

    n_sessions = pick_int("n_sessions", sim_defaults.n_sessions, 1)
    if n_sessions > MAX_SYNC_SESSIONS:
        raise ValueError(f"n_sessions is capped at {MAX_SYNC_SESSIONS} per request")
    seed = pick_int("seed", sim_defaults.seed, 0)
    max_length = pick_int("max_length", sim_defaults.max_length, 1)
    use_paired = payload.get("paired", paired)
    if not isinstance(use_paired, bool):
        raise ValueError("paired must be a boolean")
    samples = pick_int("samples", n_samples, 0)
    config = replace(sim_defaults, n_sessions=n_sessions, seed=seed, max_length=max_length)
    return campaign, config, use_paired, samples


def _request_id(campaign: CampaignSpec, config: SimulationConfig, paired: bool, samples: int) -> str:
    return _fingerprint(
        [
            campaign.to_json_dict(),
            config.n_sessions,
            config.seed,
            config.max_length,
            [config.conversion.field, config.conversion.value],
            paired,
            samples,
        ]
    )


def create_app(
    *,
    graph: EventTransitionGraph | None,
    model: HybridModel | None,
    embedder: EmbeddingService | None,
    sim_defaults: SimulationConfig | None = None,
    paired: bool = True,
    n_samples: int = 20,
    report_capacity: int = 32,
    cors_origins: list[str] | None = None,
    threads: int = 1,
) -> FastAPI:
    """Build the API app around loaded artifacts.

    Passing graph/model/embedder as None yields a server that answers
    healthz but returns 503 from the data endpoints.
    """
    sim_defaults = sim_defaults or SimulationConfig()
    store = ReportStore(report_capacity)
    app = FastAPI(title="clicksim service", version=__version__)
    if cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
            # browsers hide non-safelisted response headers cross-origin
            expose_headers=["X-Request-Id"],
        )

    loaded = graph is not None and model is not None and embedder is not None

    @app.get("/healthz")
    def healthz():
        artifacts = {}
        if graph is not None:
            artifacts["graph"] = _fingerprint(graph.to_json_dict())
        if model is not None:
            artifacts["model"] = _fingerprint(
                {"metadata": model.metadata, "config": asdict(model.config)}
            )
        if embedder is not None:
            artifacts["embedding"] = _fingerprint(
                [embedder.provider.name, embedder.provider.model, embedder.dimension]
            )
        return {"status": "ok", "version": __version__, "artifacts": artifacts}

    @app.get("/api/graph/summary")
    def summary():
        if graph is None:
            return _not_loaded()
        return graph_summary(graph)

    @app.post("/api/assess")
    def assess_endpoint(payload: dict = Body(...)):
        if not loaded:
            return _not_loaded()
        try:
            campaign, config, use_paired, samples = _resolve_request(
                payload, sim_defaults, paired, n_samples
            )
        except ValueError as exc:
            return _error(400, type(exc).__name__, str(exc))
        request_id = _request_id(campaign, config, use_paired, samples)
        report = store.get(request_id)
        if report is None:
            try:
                report = run_assessment(
                    graph,
                    campaign,
                    model,
                    embedder,
                    config,
                    paired=use_paired,
                    n_samples=samples,
                    threads=threads,
                )
            except DuplicateNode as exc:
                return _error(409, type(exc).__name__, str(exc))
            except RemoteUnavailable as exc:
                return _error(503, type(exc).__name__, str(exc))
            except (ValueError, UnknownField) as exc:
                return _error(400, type(exc).__name__, str(exc))
            store.put(request_id, report)
        return Response(
            content=report.to_json(),
            media_type="application/json",
            headers={"X-Request-Id": request_id},
        )

    @app.get("/api/sessions/sample")
    def sample_sessions(request_id: str, group: str, limit: int | None = None):
        report = store.get(request_id)
        if report is None:
            return _error(404, "UnknownRequestId", f"no stored report for {request_id!r}")
        if group not in ("control", "treatment"):
            return _error(400, "InvalidGroup", "group must be 'control' or 'treatment'")
        if limit is not None and limit < 0:
            return _error(400, "InvalidLimit", "limit must be non-negative")
        samples = (
            report.samples_control if group == "control" else report.samples_treatment
        )
        if limit is not None:
            samples = samples[:limit]
        body = "".join(json.dumps(s, ensure_ascii=False, sort_keys=True) + "\n" for s in samples)
        return Response(content=body, media_type="application/x-ndjson")

    return app
