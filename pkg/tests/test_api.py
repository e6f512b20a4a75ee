import pytest
from fastapi.testclient import TestClient

from app import config
from app.api import app
from app.rate_limiter import limiter


@pytest.fixture
def client():
    limiter.enabled = False
    with TestClient(app) as client:
        yield client
    limiter.enabled = True


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_request_id_is_echoed(client):
    response = client.get("/health", headers={"X-Request-ID": "abc-123"})
    assert response.headers["X-Request-ID"] == "abc-123"


class TestTuples:
    def test_canonical(self, client):
        assert client.get("/tuples/pssp/canonical").json() == {"tuple": "pssp", "canonical": "sspp"}

    def test_orbit(self, client):
        assert client.get("/tuples/pssp/orbit").json()["size"] == 4

    def test_hash(self, client):
        assert client.get("/tuples/pssppssp/hash").json()["hash"] == [0, 2, 0, 2]

    def test_star(self, client):
        assert client.get("/tuples/pssp/star").json()["starred"] == "p2,s1,s2,p1"

    def test_apply(self, client):
        response = client.post("/tuples/apply", json={"tuple": "pssp", "shift": 1})
        assert response.json()["result"] == "ppss"

    def test_equivalent(self, client):
        response = client.post("/tuples/equivalent", json={"first": "pssppssp", "second": "spsspspp"})
        assert response.status_code == 200
        assert response.json()["equivalent"] is False

    def test_malformed_word(self, client):
        response = client.get("/tuples/psx/canonical")
        assert response.status_code == 400
        body = response.json()
        assert body["exit_code"] == 2
        assert body["request_id"]

    def test_malformed_body(self, client):
        response = client.post("/tuples/equivalent", json={"first": "sss", "second": "ss"})
        assert response.status_code == 400
        assert response.json()["error"] == "Validation error"


class TestHash:
    def test_feasibility(self, client):
        body = client.get("/hash/1,2,1,0/feasibility").json()
        assert body["feasible"] is True
        assert body["partial_sums"] == [2, -1, 1, 0]

    def test_declared_m(self, client):
        assert client.get("/hash/1,2,1,0/feasibility", params={"m": 6}).json()["cond_sum_ok"] is False

    def test_degree_fraction(self, client):
        assert client.get("/hash/1,0,0,0/degree").json()["abs_deg"] == "1/4"

    def test_cusp_parity_of_infeasible_tuple(self, client):
        response = client.get("/hash/4,0,0,0/cusp-parity")
        assert response.status_code == 422
        assert response.json()["exit_code"] == 1

    def test_unhash(self, client):
        assert client.get("/hash/2,0/unhash").json()["tuple"] == "ppss"


class TestTypes:
    def test_exists(self, client):
        body = client.get("/types/4/6/exists").json()
        assert body == {"n": 4, "m": 6, "exists": False, "reason": "mod4-obstruction"}

    def test_classes(self, client):
        body = client.get("/types/4/4/classes").json()
        assert body == {"n": 4, "m": 4, "count": 2, "classes": [[0, 1, 2, 1], [0, 2, 0, 2]]}

    def test_count(self, client):
        assert client.get("/types/4/28/count").json() == {"n": 4, "m": 28, "count": 80}

    def test_closed_form(self, client):
        assert client.get("/types/2/8/closed-form").json()["count"] == 3

    def test_capacity(self, client, monkeypatch):
        monkeypatch.setattr(config.settings, "ENUMERATION_NODE_LIMIT", 10)
        response = client.get("/types/4/8/classes")
        assert response.status_code == 413
        assert client.get("/types/4/8/classes", params={"force": True}).json()["count"] == 5

    def test_table(self, client):
        rows = client.get("/table", params={"n_max": 4, "m_max": 4}).json()["rows"]
        assert {"n": 4, "m": 4, "count": 2} in rows


class TestRealize:
    def test_realize(self, client):
        body = client.post("/realize", json={"hash": [0, 2]}).json()
        assert body["verified"] is True
        assert body["X"] == [1, 4]
        assert body["extracted"] in {"pssp", "sspp", "spps", "ppss"}

    def test_undersampling(self, client):
        response = client.post("/realize", json={"hash": "0,2", "samples": 10})
        assert response.status_code == 400


class TestGerms:
    def test_jacobian(self, client):
        response = client.post("/germs/jacobian", json={"f1": "x", "f2": "x*y + y^3"})
        assert response.json()["jacobian"] == "x + 3*y^2"

    def test_parse_error_position(self, client):
        response = client.post("/germs/jacobian", json={"f1": "x", "f2": "y + z"})
        assert response.status_code == 400
        assert response.json()["details"]["position"] == 4

    def test_fold_check(self, client):
        response = client.post("/germs/fold-check", json={"f1": "x", "f2": "y^2", "x": 0, "y": 0})
        assert response.json()["fold"] is True

    def test_trace(self, client):
        body = client.post("/germs/trace", params={"eps": 0.1}, json={"f1": "x", "f2": "y"}).json()
        assert body["closed"] is True
        assert len(body["points"]) == len(body["angles"])

    def test_catalog(self, client):
        forms = client.get("/catalog").json()["forms"]
        assert forms[2] == {
            "name": "cusp", "f1": "x", "f2": "x*y + y^3", "expected": "pssp",
            "representative": True, "stretch": False,
        }

    @pytest.mark.slow
    def test_recognize(self, client):
        body = client.post("/germs/recognize", json={"f1": "x", "f2": "x*y + y^3"}).json()
        assert body["ast"] == "sspp"
        assert body["cusp_parity"] == 1


def test_rate_limit():
    limiter.reset()
    with TestClient(app) as client:
        statuses = [client.get("/types/2/4/count").status_code for _ in range(config.settings.RATE_LIMIT_REQUESTS + 1)]
    limiter.reset()
    assert statuses[:-1] == [200] * config.settings.RATE_LIMIT_REQUESTS
    assert statuses[-1] == 429


def test_trusted_clients_bypass_the_limit(monkeypatch):
    monkeypatch.setattr(limiter, "trusted_ips", {"testclient"})
    limiter.reset()
    with TestClient(app) as client:
        statuses = {client.get("/types/2/4/count").status_code for _ in range(config.settings.RATE_LIMIT_REQUESTS + 2)}
    limiter.reset()
    assert statuses == {200}
