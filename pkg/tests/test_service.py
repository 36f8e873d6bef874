"""HTTP endpoints: status mapping, the error envelope, and byte identity
between repeated requests."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from runlens import RunRegistry
from runlens.service import create_app


@pytest.fixture(scope="module")
def client(sim_history, tiny_history):
    registry = RunRegistry(seed=7)
    registry.add_history(sim_history)
    registry.add_history(tiny_history)
    with TestClient(create_app(registry)) as c:
        yield c


GET_ENDPOINTS = [
    "/",
    "/runs",
    "/runs/sim/overview",
    "/runs/sim/leaderboard",
    "/runs/sim/candidates/c001/report",
    "/runs/sim/candidates/c001/config",
    "/runs/sim/candidates/c001/surrogate",
    "/runs/sim/candidates/c001/local-surrogate",
    "/runs/sim/candidates/c001/effects",
    "/runs/sim/candidates/c001/intermediate/__source__",
    "/runs/sim/structure-graph",
    "/runs/sim/cpc",
    "/runs/sim/sampling/classifier:max_depth",
    "/runs/sim/coverage",
    "/runs/sim/hp-importance",
    "/runs/sim/ensemble/overview",
    "/runs/sim/ensemble/predictions",
    "/runs/sim/ensemble/surfaces",
]


@pytest.mark.parametrize("path", GET_ENDPOINTS)
def test_endpoint_answers_with_json(client, path):
    response = client.get(path)
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("application/json")
    assert isinstance(response.json(), dict)


def test_index_lists_runs_and_operations(client):
    doc = client.get("/").json()
    assert doc["service"] == "runlens"
    assert set(doc["runs"]) == {"sim", "tiny"}
    assert "coverage" in doc["operations"]
    assert "surrogate-tree" in doc["artifacts"]


def test_runs_doc(client):
    doc = client.get("/runs").json()
    assert {r["run_id"] for r in doc["runs"]} == {"sim", "tiny"}


def test_unknown_run_is_404_with_envelope(client):
    response = client.get("/runs/ghost/overview")
    assert response.status_code == 404
    doc = response.json()
    assert doc["error"]["type"] == "not-found"
    assert "ghost" in doc["error"]["message"]


def test_unknown_candidate_is_404(client):
    response = client.get("/runs/sim/candidates/ghost/report")
    assert response.status_code == 404
    assert response.json()["error"]["type"] == "not-found"


def test_bad_parameter_is_400(client):
    response = client.get("/runs/sim/structure-graph", params={"at": "-3"})
    assert response.status_code == 400
    assert response.json()["error"]["type"] == "invalid-request"
    response = client.get("/runs/sim/candidates/c001/surrogate",
                          params={"max_leaf_nodes": "1"})
    assert response.status_code == 400


def test_impossible_analysis_is_409(client):
    # three scored candidates are below the importance minimum
    response = client.get("/runs/tiny/hp-importance")
    assert response.status_code == 409
    assert response.json()["error"]["type"] == "insufficient-data"


def test_repeated_requests_are_byte_identical(client):
    for path in ("/runs/sim/coverage", "/runs/sim/cpc",
                 "/runs/sim/candidates/c001/surrogate"):
        first = client.get(path)
        second = client.get(path)
        assert second.content == first.content


def test_query_parameters_reach_the_handler(client):
    base = client.get("/runs/sim/structure-graph").json()
    early = client.get("/runs/sim/structure-graph", params={"at": "0"}).json()
    assert early["at"] == 0.0 and base["at"] is None
    assert len(early["nodes"]) <= len(base["nodes"])
    limited = client.get("/runs/sim/candidates/c001/intermediate/__source__",
                         params={"limit": "5"}).json()
    assert len(limited["rows"]) == 5


def test_export_returns_an_attachment(client):
    response = client.post("/export", json={
        "run_id": "sim", "artifact": "config",
        "params": {"candidate_id": "c001"}})
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("application/json")
    assert response.headers["content-disposition"] == \
        'attachment; filename="config-c001.json"'
    body = client.get("/runs/sim/candidates/c001/config").json()
    assert json.loads(response.content) == body["config"]


def test_export_csv_artifact(client):
    response = client.post("/export", json={
        "run_id": "sim", "artifact": "coverage-embedding", "params": {}})
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("text/csv")
    assert response.headers["content-disposition"].endswith(
        'filename="coverage-embedding.csv"')


def test_export_validation(client):
    assert client.post("/export", content=b"not json",
                       headers={"content-type": "application/json"}).status_code == 400
    assert client.post("/export", json=["list"]).status_code == 400
    assert client.post("/export", json={"artifact": "config"}).status_code == 400
    assert client.post("/export", json={"run_id": "sim"}).status_code == 400
    assert client.post("/export", json={
        "run_id": "sim", "artifact": "nope"}).status_code == 404
    response = client.post("/export", json={
        "run_id": "sim", "artifact": "config", "params": "x"})
    assert response.status_code == 400
    assert response.json()["error"]["type"] == "invalid-request"
