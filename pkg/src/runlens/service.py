"""HTTP service: the analysis registry behind stable JSON endpoints.

Responses are the registry's canonical bytes passed through untouched, so
repeating a request (or asking the CLI for the same analysis) yields a
byte-identical body.  Error mapping: unknown things are 404, bad parameters
are 400, analyses that are impossible on this data are 409.
"""

from __future__ import annotations

from typing import Any, Mapping, Optional

from fastapi import FastAPI, Request, Response

from .analyses import RunRegistry
from .errors import (DegenerateInputError, InsufficientDataError, LoadError,
                     MergeError, NotFoundError, RunLensError,
                     UnsupportedPrimitiveError, UnsupportedTopologyError,
                     ValidationError)
from .exports import available_artifacts, export_artifact
from .serialize import canonical_bytes

_STATUS: list[tuple[type, int, str]] = [
    (NotFoundError, 404, "not-found"),
    (ValidationError, 400, "invalid-request"),
    (LoadError, 400, "invalid-run-file"),
    (UnsupportedPrimitiveError, 409, "unsupported-primitive"),
    (UnsupportedTopologyError, 409, "unsupported-topology"),
    (DegenerateInputError, 409, "degenerate-input"),
    (InsufficientDataError, 409, "insufficient-data"),
    (MergeError, 409, "merge-conflict"),
]


def _error_response(exc: RunLensError) -> Response:
    for cls, status, kind in _STATUS:
        if isinstance(exc, cls):
            body = canonical_bytes({"error": {"type": kind, "message": str(exc)}})
            return Response(content=body, status_code=status,
                            media_type="application/json")
    body = canonical_bytes({"error": {"type": "internal", "message": str(exc)}})
    return Response(content=body, status_code=500, media_type="application/json")


def _json(payload: bytes) -> Response:
    return Response(content=payload, media_type="application/json")


def create_app(registry: RunRegistry) -> FastAPI:
    app = FastAPI(title="runlens", docs_url=None, redoc_url=None,
                  openapi_url=None)

    @app.exception_handler(RunLensError)
    async def handle_runlens_error(request: Request, exc: RunLensError):
        return _error_response(exc)

    def render(run_id: str, operation: str, params: Mapping[str, Any]) -> Response:
        return _json(registry.render(run_id, operation, dict(params)))

    @app.get("/")
    def index() -> Response:
        from .analyses import available_operations
        return _json(canonical_bytes({
            "service": "runlens",
            "operations": sorted(available_operations()),
            "artifacts": sorted(available_artifacts()),
            "runs": list(registry.run_ids())}))

    @app.get("/runs")
    def runs() -> Response:
        return _json(canonical_bytes(registry.runs_doc()))

    @app.get("/runs/{run_id}/overview")
    def overview(run_id: str) -> Response:
        return render(run_id, "overview", {})

    @app.get("/runs/{run_id}/leaderboard")
    def leaderboard(run_id: str) -> Response:
        return render(run_id, "leaderboard", {})

    @app.get("/runs/{run_id}/candidates/{cid}/report")
    def report(run_id: str, cid: str) -> Response:
        return render(run_id, "report", {"candidate_id": cid})

    @app.get("/runs/{run_id}/candidates/{cid}/config")
    def config(run_id: str, cid: str) -> Response:
        return render(run_id, "config", {"candidate_id": cid})

    @app.get("/runs/{run_id}/candidates/{cid}/surrogate")
    def surrogate(run_id: str, cid: str,
                  max_leaf_nodes: Optional[str] = None) -> Response:
        return render(run_id, "surrogate",
                      {"candidate_id": cid, "max_leaf_nodes": max_leaf_nodes})

    @app.get("/runs/{run_id}/candidates/{cid}/local-surrogate")
    def local_surrogate(run_id: str, cid: str, row: Optional[str] = None,
                        n_samples: Optional[str] = None) -> Response:
        return render(run_id, "local-surrogate",
                      {"candidate_id": cid, "row": row, "n_samples": n_samples})

    @app.get("/runs/{run_id}/candidates/{cid}/effects")
    def effects(run_id: str, cid: str) -> Response:
        return render(run_id, "effects", {"candidate_id": cid})

    @app.get("/runs/{run_id}/candidates/{cid}/intermediate/{node}")
    def intermediate(run_id: str, cid: str, node: str,
                     limit: Optional[str] = None) -> Response:
        return render(run_id, "intermediate",
                      {"candidate_id": cid, "node": node, "limit": limit})

    @app.get("/runs/{run_id}/structure-graph")
    def structure_graph(run_id: str, at: Optional[str] = None) -> Response:
        return render(run_id, "structure-graph", {"at": at})

    @app.get("/runs/{run_id}/cpc")
    def cpc(run_id: str) -> Response:
        return render(run_id, "cpc", {})

    @app.get("/runs/{run_id}/sampling/{hp_name}")
    def sampling(run_id: str, hp_name: str, bins: Optional[str] = None) -> Response:
        return render(run_id, "sampling",
                      {"hyperparameter": hp_name, "bins": bins})

    @app.get("/runs/{run_id}/coverage")
    def coverage(run_id: str, at: Optional[str] = None) -> Response:
        return render(run_id, "coverage", {"at": at})

    @app.get("/runs/{run_id}/hp-importance")
    def importance(run_id: str, structure_of: Optional[str] = None) -> Response:
        return render(run_id, "hp-importance", {"structure_of": structure_of})

    @app.get("/runs/{run_id}/ensemble/overview")
    def ensemble_overview(run_id: str) -> Response:
        return render(run_id, "ensemble-overview", {})

    @app.get("/runs/{run_id}/ensemble/predictions")
    def ensemble_predictions(run_id: str) -> Response:
        return render(run_id, "ensemble-predictions", {})

    @app.get("/runs/{run_id}/ensemble/surfaces")
    def ensemble_surfaces(run_id: str) -> Response:
        return render(run_id, "ensemble-surfaces", {})

    @app.post("/export")
    async def export(request: Request) -> Response:
        try:
            body = await request.json()
        except Exception:
            raise ValidationError("export body must be a JSON object")
        if not isinstance(body, dict):
            raise ValidationError("export body must be a JSON object")
        run_id = body.get("run_id")
        artifact = body.get("artifact")
        if not isinstance(run_id, str) or not run_id:
            raise ValidationError("export body needs a 'run_id' string")
        if not isinstance(artifact, str) or not artifact:
            raise ValidationError("export body needs an 'artifact' string")
        params = body.get("params", {})
        if not isinstance(params, dict):
            raise ValidationError("'params' must be an object")
        result = export_artifact(registry.bundle(run_id), artifact, params)
        return Response(
            content=result.content, media_type=result.media_type,
            headers={"Content-Disposition":
                     f'attachment; filename="{result.filename}"'})

    return app


def serve(registry: RunRegistry, host: str = "127.0.0.1", port: int = 8300) -> None:
    """Run the service until interrupted.  A busy port fails startup."""
    import uvicorn

    uvicorn.run(create_app(registry), host=host, port=port, log_level="warning")
