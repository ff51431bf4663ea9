import json

import numpy as np
import pytest


def load(data_dir, name):
    return json.loads((data_dir / name).read_text())


def test_health(test_client):
    response = test_client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_diagnose_endpoint(test_client, data_dir):
    response = test_client.post("/api/diagnose", json=load(data_dir, "example2.json"))
    assert response.status_code == 200
    body = response.json()
    assert body["A0_singular"] is True
    assert body["N_singular"] is True
    assert body["rank_RX"] == 1


def test_reduce_endpoint(test_client, data_dir):
    response = test_client.post("/api/reduce", json=load(data_dir, "example1.json"))
    assert response.status_code == 200
    terminal = response.json()["terminal"]
    assert terminal["kind"] == "Stein"
    assert terminal["A0"][0][0] == pytest.approx(-1.0)


def test_solve_endpoint(test_client, data_dir):
    response = test_client.post("/api/solve", json=load(data_dir, "example2.json"))
    assert response.status_code == 200
    families = response.json()["families"]
    assert len(families) == 1
    np.testing.assert_allclose(families[0]["base"], np.diag([3.0, 0.0, -2.0]), atol=1e-8)


def test_verify_endpoint(test_client, data_dir):
    payload = {"triple": load(data_dir, "example2.json"), "X": np.diag([3.0, 0.0, -2.0]).tolist()}
    response = test_client.post("/api/verify", json=payload)
    assert response.status_code == 200
    assert response.json()["accepted"] is True


def test_invalid_document_is_unprocessable(test_client):
    document = {"n": 1, "m": 1, "A": [[0]], "B": [[0]], "Q": [[-1]], "R": [[0]]}
    response = test_client.post("/api/solve", json=document)
    assert response.status_code == 422
    assert "positive semidefinite" in response.json()["detail"]


def test_shape_error_is_unprocessable(test_client):
    document = {"n": 2, "m": 1, "A": [[0]], "B": [[0]], "Q": [[1]], "R": [[0]]}
    response = test_client.post("/api/reduce", json=document)
    assert response.status_code == 422


def test_inconsistent_equation_is_a_conflict(test_client):
    document = {"n": 1, "m": 1, "A": [[1]], "B": [[0]], "Q": [[1]], "R": [[0]]}
    response = test_client.post("/api/solve", json=document)
    assert response.status_code == 409