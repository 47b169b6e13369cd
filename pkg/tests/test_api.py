import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from tifl.api import create_app
from tifl.geometry import SphereModel


@pytest.fixture(scope="module")
def client():
    app = create_app(SphereModel(), plan_timeout=60.0)
    with TestClient(app) as c:
        yield c


def envelope_request(client, montage, plane="xy", resolution=33):
    return client.post(
        "/api/v1/envelope",
        json={"montage": montage, "plane": plane, "resolution": resolution},
    )


def test_envelope_symmetric_payload(client):
    resp = envelope_request(client, {"phi": 70, "alpha": 20})
    assert resp.status_code == 200
    body = resp.json()
    assert body["schema_version"] == 1
    values = body["values"]
    n = body["resolution"]
    for row in values:
        for a, b in zip(row, row[::-1]):
            if a is not None and b is not None:
                assert abs(a - b) <= 1e-9 * max(abs(a), 1e-30)
    assert body["focal"]["region"] == "R22"


def test_envelope_rejects_phi_off_limits(client):
    resp = envelope_request(client, {"phi": 150, "alpha": 20})
    assert resp.status_code == 422
    assert resp.json()["error"] == "phi_off_limits"


def test_envelope_rejects_malformed_montage(client):
    assert envelope_request(client, {"alpha": 20}).status_code == 400
    assert envelope_request(client, {"phi": 70, "alpha": 20, "zap": 1}).status_code == 400
    resp = client.post("/api/v1/envelope", content=b"{not json",
                       headers={"content-type": "application/json"})
    assert resp.status_code == 400


def test_envelope_resolution_limits(client):
    assert envelope_request(client, {"phi": 70, "alpha": 20}, resolution=258).status_code == 413
    assert envelope_request(client, {"phi": 70, "alpha": 20}, resolution=8).status_code == 400


def test_envelope_scenario_c_center_value(client):
    resp = envelope_request(client, {"phi": 90, "alpha": 100}, resolution=101)
    body = resp.json()
    values = body["values"]
    center = values[50][50]
    peak = max(v for row in values for v in row if v is not None)
    # measured center suppression for the widest separation: ~0.79 of peak
    assert center / peak == pytest.approx(0.787, abs=0.01)


def test_envelope_deterministic_bytes(client):
    payload = {"montage": {"phi": 70, "alpha": 20}, "plane": "xz", "resolution": 33}
    a = client.post("/api/v1/envelope", json=payload)
    b = client.post("/api/v1/envelope", json=payload)
    assert a.content == b.content


def test_scenarios_presets_and_bounds(client):
    resp = client.get("/api/v1/scenarios")
    assert resp.status_code == 200
    body = resp.json()
    names = [p["name"] for p in body["presets"]]
    assert names == ["a", "b", "c"]
    a = body["presets"][0]
    assert a["swept_parameter"] == "phi"
    assert a["sweep_values"] == [30.0, 60.0, 90.0]
    bounds = body["bounds"]
    assert bounds["phi"]["max"] == 135.0
    assert bounds["resolution"]["max"] == 257
    assert bounds["depth_bands"]["lower"] == -0.80


def test_scenarios_cached_identical(client):
    a = client.get("/api/v1/scenarios")
    b = client.get("/api/v1/scenarios")
    assert a.content == b.content


def test_plan_center_ratio_near_one(client):
    resp = client.post(
        "/api/v1/plan",
        json={
            "target": [0.0, 0.0, 0.0],
            "effort": {
                "phi_grid": [60, 90],
                "alpha_grid": [40, 60],
                "psi_grid": [0, 90, 180, 270],
                "ratio_grid": [0.5, 1.0, 2.0],
                "refine_evals": 40,
                "raster_resolution": 11,
            },
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    params = body["montage"]["parameters"]
    assert abs(params["i_left"] / params["i_right"] - 1.0) <= 0.1
    assert body["safety"]["passed"] is True


def test_plan_infeasible_and_bad_requests(client):
    resp = client.post("/api/v1/plan", json={"target": [0, 0, -0.95]})
    assert resp.status_code == 422
    assert resp.json()["error"] == "infeasible_target"
    assert client.post("/api/v1/plan", json={}).status_code == 400
    assert client.post("/api/v1/plan", json={"target": [0, 0, 0], "x": 1}).status_code == 400


def test_plan_timeout_returns_504():
    app = create_app(SphereModel(), plan_timeout=1e-6)
    with TestClient(app) as c:
        resp = c.post("/api/v1/plan", json={"target": [0.0, 0.0, 0.0]})
        assert resp.status_code == 504


def test_guidelines_cached_bytes(client):
    # first call runs the full default sweep (a few seconds), the second
    # must come back from the cache byte-identical
    a = client.get("/api/v1/guidelines")
    b = client.get("/api/v1/guidelines")
    assert a.status_code == 200
    assert a.content == b.content
    body = a.json()
    assert len(body["regions"]) == 9
    assert len(body["depths"]) == 4
