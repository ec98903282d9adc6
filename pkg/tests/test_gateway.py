import json

import pytest
from fastapi.testclient import TestClient

from vnetchat import fixtures
from vnetchat.gateway import create_app


@pytest.fixture
def client():
    return TestClient(create_app(static_dir=None), raise_server_exceptions=False)


SINGLE_USER = [{"id": 1, "router": 3, "traffic_gbps": 0.5,
                "initial_cpu_cores": 2.0, "initial_latency_bound_ms": 3.0}]


def _create(client, mode="paper-replay"):
    resp = client.post("/api/sessions", json={
        "fixture": "internet2-like", "users": SINGLE_USER,
        "config": {"mode": mode, "extractor": "keyword"}})
    assert resp.status_code == 201, resp.text
    return resp.json()


def test_health(client):
    assert client.get("/health").json() == {"status": "ok"}


class TestCreateSession:
    def test_fixture_session_created(self, client):
        body = _create(client)
        assert body["standing"]["status"] == "Optimal"
        assert body["standing"]["measurement"]["latency"] == {"1": 2.0}
        assert body["session_id"]

    def test_malformed_topology(self, client):
        resp = client.post("/api/sessions", json={
            "topology": {"routers": "oops"}, "users": SINGLE_USER})
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad-request"

    def test_over_capacity_infeasible(self, client):
        users = [dict(SINGLE_USER[0], traffic_gbps=5.0)]
        resp = client.post("/api/sessions", json={
            "fixture": "internet2-like", "users": users})
        assert resp.status_code == 409
        assert resp.json()["code"] == "infeasible"


class TestPrompts:
    def test_queue_position(self, client):
        sid = _create(client)["session_id"]
        r1 = client.post(f"/api/sessions/{sid}/prompts",
                         json={"user_id": 1, "text": "I want more CPU"})
        assert r1.status_code == 202 and r1.json()["position"] == 1
        r2 = client.post(f"/api/sessions/{sid}/prompts",
                         json={"user_id": 1, "text": "again"})
        assert r2.json()["position"] == 2

    def test_unknown_session(self, client):
        resp = client.post("/api/sessions/nope/prompts",
                           json={"user_id": 1, "text": "x"})
        assert resp.status_code == 404
        assert resp.json()["code"] == "not-found"

    def test_unknown_user(self, client):
        sid = _create(client)["session_id"]
        resp = client.post(f"/api/sessions/{sid}/prompts",
                           json={"user_id": 99, "text": "x"})
        assert resp.status_code == 400


class TestStep:
    def test_step_returns_result(self, client):
        sid = _create(client)["session_id"]
        client.post(f"/api/sessions/{sid}/prompts",
                    json={"user_id": 1, "text": "I no longer need such as plenty CPU"})
        resp = client.post(f"/api/sessions/{sid}/step")
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["step"] == 1
        assert doc["prompts"][0]["accepted"] is True
        assert doc["prompts"][0]["marker"] == {"cpu": -1, "latency_bound": 0}
        assert doc["params_after"]["1"][0] == 1.0

    def test_infeasible_step_serializes(self, client):
        # the infinite objective of an infeasible outcome must come back
        # as null, not break JSON serialization
        sid = _create(client)["session_id"]
        for text in ("I no longer need such as plenty CPU",
                     "I would like to have lower latency network",
                     "Get more CPUs, please."):
            client.post(f"/api/sessions/{sid}/prompts",
                        json={"user_id": 1, "text": text})
            resp = client.post(f"/api/sessions/{sid}/step")
            assert resp.status_code == 200, resp.text
        doc = resp.json()
        assert doc["status"] == "Infeasible"
        assert doc["objective"] is None
        assert doc["measurement"] is None

    def test_concurrent_step_conflicts(self, client):
        sid = _create(client)["session_id"]
        app_store = client.app.state.store
        lock = app_store.lock(sid)
        lock.acquire()
        try:
            resp = client.post(f"/api/sessions/{sid}/step")
        finally:
            lock.release()
        assert resp.status_code == 409
        assert resp.json()["code"] == "conflict"

    def test_unknown_session(self, client):
        assert client.post("/api/sessions/zzz/step").status_code == 404


class TestState:
    def test_fresh_state(self, client):
        sid = _create(client)["session_id"]
        doc = client.get(f"/api/sessions/{sid}/state").json()
        assert doc["k"] == 0
        assert doc["params"]["1"] == [2.0, 3.0]
        assert doc["allocation"]["placement"] == {"1": 2}

    def test_state_after_step(self, client):
        sid = _create(client)["session_id"]
        client.post(f"/api/sessions/{sid}/step")
        doc = client.get(f"/api/sessions/{sid}/state").json()
        assert doc["k"] == 1
        assert len(doc["history"]) == 1

    def test_topology_document(self, client):
        sid = _create(client)["session_id"]
        doc = client.get(f"/api/sessions/{sid}/topology").json()
        assert len(doc["links"]) == 26

    def test_unknown_session(self, client):
        assert client.get("/api/sessions/zzz/state").status_code == 404


class TestInterpret:
    def test_keyword(self, client):
        resp = client.post("/api/interpret",
                           json={"text": "I want more CPU", "extractor": "keyword"})
        assert resp.json()["marker"] == {"cpu": 1, "latency_bound": 0}

    def test_empty_text(self, client):
        resp = client.post("/api/interpret", json={"text": "  "})
        assert resp.status_code == 400

    def test_llm_without_endpoint_degrades(self, client, monkeypatch):
        monkeypatch.delenv("VNET_LLM_ENDPOINT", raising=False)
        resp = client.post("/api/interpret",
                           json={"text": "more CPU", "extractor": "llm"})
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["marker"] == {"cpu": 0, "latency_bound": 0}
        assert doc["diagnostics"]["unavailable"] is True


class TestEval:
    def test_keyword_rows(self, client):
        resp = client.post("/api/eval", json={
            "extractor": "keyword", "train_sizes": [5, 3]})
        assert resp.status_code == 200
        rows = resp.json()
        assert [r["train_size"] for r in rows] == [5, 3]
        assert all(r["syntax_error_pct"] == [0.0, 0.0] for r in rows)

    def test_bad_size(self, client):
        resp = client.post("/api/eval", json={
            "extractor": "keyword", "train_sizes": [99]})
        assert resp.status_code == 400

    def test_llm_without_endpoint_unavailable(self, client, monkeypatch):
        monkeypatch.delenv("VNET_LLM_ENDPOINT", raising=False)
        resp = client.post("/api/eval", json={
            "extractor": "llm", "train_sizes": [0]})
        assert resp.status_code == 503
        assert resp.json()["code"] == "upstream-unavailable"


def test_get_endpoints_are_side_effect_free(client):
    sid = _create(client)["session_id"]
    before = client.get(f"/api/sessions/{sid}/state").json()
    for _ in range(3):
        client.get(f"/api/sessions/{sid}/state")
        client.get(f"/api/sessions/{sid}/topology")
    assert client.get(f"/api/sessions/{sid}/state").json() == before
