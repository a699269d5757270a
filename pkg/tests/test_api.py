"""Tests for the HTTP analysis endpoints."""

import pytest
from fastapi.testclient import TestClient

from app.main import create_app


@pytest.fixture
def client():
    with TestClient(create_app()) as test_client:
        yield test_client


SCHEME = {
    "case": 2,
    "num_databases": 4,
    "num_subpackets": 60,
    "num_segments": 3,
    "r": 0.05,
    "r_prime": 0.05,
    "seed": 7,
}


class TestLeakageEndpoint:
    def test_rows(self, client):
        response = client.get("/leakage", params={"P": 12, "Pr": 3, "B": "1,3"})
        assert response.status_code == 200
        body = response.json()
        assert [row["B"] for row in body["rows"]] == [1, 3]
        assert body["rows"][1]["H_tilde_bits"] == pytest.approx(1.147315, abs=2e-5)

    def test_non_dividing_b(self, client):
        response = client.get("/leakage", params={"P": 12, "Pr": 3, "B": "5"})
        assert response.status_code == 422
        assert response.json()["error"] == "InvalidB"

    def test_missing_query(self, client):
        response = client.get("/leakage", params={"P": 12})
        assert response.status_code == 422
        assert "detail" in response.json()


class TestCostsEndpoint:
    def test_report(self, client):
        response = client.post("/costs", json=SCHEME)
        assert response.status_code == 200
        body = response.json()
        assert body["matches"] is True
        assert body["read_cost"]["constant"] == "1/5"
        assert body["storage_formula"]["total"] == 60 + 3 * 20**2

    def test_inadmissible_n(self, client):
        response = client.post("/costs", json={**SCHEME, "num_databases": 6})
        assert response.status_code == 422
        body = response.json()
        assert body["error"] == "InadmissibleN"
        assert body["path"] == "/costs"

    def test_body_validation(self, client):
        response = client.post("/costs", json={**SCHEME, "users": 0})
        assert response.status_code == 422

    def test_negative_seed(self, client):
        response = client.post("/costs", json={**SCHEME, "seed": -1})
        assert response.status_code == 422
        assert response.json()["error"] == "Validation error"


class TestSimulateEndpoint:
    def test_verified_rounds(self, client):
        response = client.post("/simulate", json={**SCHEME, "case": 4, "num_databases": 6, "rounds": 2, "users": 2})
        assert response.status_code == 200
        body = response.json()
        assert body["verification"]["ok"] is True
        assert body["verification"]["rounds_completed"] == 2
        assert body["verification"]["subpackets_checked"] == 60
        assert len(body["costs"]["reports"]) == 2
        assert body["costs"]["matches"] is True

    def test_request_id_echoed(self, client):
        response = client.post(
            "/simulate", json={**SCHEME, "num_segments": 1}, headers={"X-Request-ID": "abc-123"}
        )
        assert response.headers["X-Request-ID"] == "abc-123"
        assert "X-Process-Time" in response.headers
