"""The HTTP surface: request/response schemas and endpoint behavior."""

import json

import pytest
from fastapi.testclient import TestClient

from tierlang.corpus import load_source
from tierlang.service import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    r = client.get("/v1/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_parse_endpoint(client):
    r = client.post(
        "/v1/parse",
        json={"source": load_source("blist_loop.aoo"), "filename": "blist_loop.aoo"},
    )
    data = r.json()
    assert data["ok"]
    assert data["executable"] == "Exe"
    assert "BList" in data["classes"]
    assert "while" in data["pretty"]


def test_parse_error_reported_as_diagnostics(client):
    r = client.post("/v1/parse", json={"source": "Exe { void main() { ; } }"})
    data = r.json()
    assert not data["ok"]
    assert data["diagnostics"][0]["code"] == "E_PARSE"
    assert data["diagnostics"][0]["line"] >= 1


def test_flatten_endpoint_emits_temporaries(client):
    r = client.post("/v1/flatten", json={"source": load_source("blist_loop.aoo")})
    data = r.json()
    assert data["ok"]
    assert "$f" in data["pretty"]


def test_infer_endpoint_schema(client):
    r = client.post("/v1/infer", json={"source": load_source("blist_loop.aoo")})
    data = r.json()
    assert data["schema"] == "tierlang/1"
    assert data["satisfiable"] is True
    main = data["assignment"]["void main^Exe()"]
    assert main["b"] == {"type": "BList", "tier": 1}
    assert main["z"]["tier"] == 0


def test_infer_unsat(client):
    r = client.post("/v1/infer", json={"source": load_source("exp.aoo")})
    data = r.json()
    assert data["satisfiable"] is False
    assert data["diagnostics"]


def test_check_replays_inferred_assignment(client):
    src = load_source("blist_loop.aoo")
    inferred = client.post("/v1/infer", json={"source": src}).json()
    tiers = {"assignment": inferred["assignment"], "gamma": inferred["gamma"]}
    r = client.post("/v1/check", json={"source": src, "tiers": tiers})
    assert r.json()["accepted"] is True


def test_check_rejects_bad_assignment(client):
    src = load_source("blist_loop.aoo")
    tiers = {"assignment": {"void main^Exe()": {"b": {"type": "BList", "tier": 0}}}}
    r = client.post("/v1/check", json={"source": src, "tiers": tiers})
    data = r.json()
    assert data["accepted"] is False
    assert any(v["rule"] == "Wh" for v in data["violations"])


def test_safety_endpoint(client):
    r = client.post("/v1/safety", json={"source": load_source("blist_decrement.aoo")})
    data = r.json()
    assert data["typable"] is True
    assert data["safe"] is False
    item3 = data["recursive_methods"][0]["item3"]
    assert item3["ok"] is False


def test_bound_endpoint_schema_and_values(client):
    r = client.post("/v1/bound", json={"source": load_source("blist_loop.aoo")})
    data = r.json()
    assert data["schema"] == "tierlang/1"
    assert (data["n1"], data["nu"], data["lambda"]) == (1, 1, 0)
    assert data["time"] == "O(n^1)"
    assert data["heap"] == "O(n)"
    assert data["stack"] == "O(n^1)"
    assert data["safety"]["safe"] is True


def test_bound_endpoint_with_validation(client):
    r = client.post(
        "/v1/bound",
        json={"source": load_source("blist_loop.aoo"), "validate_sizes": [8, 16]},
    )
    data = r.json()
    assert data["validation"]["ok"] is True
    assert len(data["validation"]["rows"]) == 2


def test_run_endpoint_metrics(client):
    r = client.post(
        "/v1/run", json={"source": load_source("blist_loop.aoo"), "budget": 100000}
    )
    data = r.json()
    assert data["ok"] and data["outcome"] == "terminated"
    assert data["steps"] > 0
    assert data["max_heap_nodes"] == 9  # 8 list cells + &null
    assert data["final_vars"]["z"] == "7"


def test_run_endpoint_divergence(client):
    r = client.post(
        "/v1/run",
        json={"source": load_source("ring_all_true.aoo"), "budget": 100000},
    )
    assert r.json()["outcome"] == "divergence-detected"


def test_corpus_endpoints(client):
    listing = client.get("/v1/corpus").json()
    names = {e["name"] for e in listing["entries"]}
    assert {"blist_loop", "ring", "exp", "declassified"} <= names
    verify = client.post("/v1/corpus/verify").json()
    assert verify["ok"] is True
    assert verify["failures"] == {}


def test_json_outputs_stable_under_rerun(client):
    payload = {"source": load_source("ring.aoo")}
    a = client.post("/v1/bound", json=payload).json()
    b = client.post("/v1/bound", json=payload).json()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
