"""
Tests for the HTTP API
"""
import numpy as np
import pytest
from fastapi.testclient import TestClient

from app import app
from src.initial_data.generators import make_fixture
from src.potential.radial_potential import c_min

client = TestClient(app)


def test_health():
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_period_table_four_dimensions():
    response = client.post("/api/period/table", json={"d": 4, "m": 2.0, "samples": 10, "offset_max": 10.0})
    assert response.status_code == 200
    body = response.json()
    assert body["tau"] == pytest.approx(np.pi)
    assert len(body["points"]) == 10
    for point in body["points"]:
        assert point["T"] == pytest.approx(np.pi, abs=1e-8)


def test_period_table_normalized():
    response = client.post("/api/period/table", json={"d": 3, "normalized": True, "samples": 3})
    assert response.status_code == 200
    body = response.json()
    assert body["e_min"] == 0.0
    assert body["points"][0]["E"] == pytest.approx(1e-4)


def test_period_table_rejects_bad_range():
    response = client.post("/api/period/table", json={"d": 3, "offset_min": 1.0, "offset_max": 0.1})
    assert response.status_code == 400


def test_period_table_validates_dimension():
    response = client.post("/api/period/table", json={"d": 1})
    assert response.status_code == 422


def test_period_derivative():
    response = client.post("/api/period/derivative", json={"d": 4, "offset": 0.5})
    assert response.status_code == 200
    body = response.json()
    assert body["T"] == pytest.approx(np.pi, abs=1e-8)
    assert body["T_prime"] == pytest.approx(0.0, abs=1e-8)

    response = client.post("/api/period/derivative", json={"d": 3, "offset": 0.0})
    body = response.json()
    assert body["T_prime"] == pytest.approx(body["limit_at_minimum"])
    assert body["T_prime"] < 0


def test_data_check_compliant(tmp_path):
    path = make_fixture('compliant', 3).to_csv(str(tmp_path / 'compliant.csv'))
    with open(path, 'rb') as f:
        response = client.post("/api/data/check", files={"file": ("compliant.csv", f, "text/csv")},
                               data={"dim": "3"})
    assert response.status_code == 200
    body = response.json()
    assert body["exit_status"] == 0
    assert body["report"]["verdict"] == "GlobalSmooth"
    assert body["report"]["C0_mean"] == pytest.approx(c_min(3) + 0.5, rel=1e-6)


def test_data_check_malformed():
    response = client.post("/api/data/check", files={"file": ("bad.csv", b"r,P0\n0.1,1.0\n", "text/csv")},
                           data={"dim": "3"})
    assert response.status_code == 400
    assert "line 1" in response.json()["detail"]
