# -*- coding: utf-8 -*-
"""测试 HTTP 接口（健康检查、系数、周期、h 曲线、残差摘要）"""

import sys
import os

# 添加项目根目录到路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
from fastapi.testclient import TestClient

from app.main import app
from app.routers.solution import jsonable
from config.presets import APPENDIX_PARAMS


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def body(**extra):
    return {"params": dict(APPENDIX_PARAMS), **extra}


def test_health(client):
    resp = client.get("/api/system/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"
    assert resp.json()["service"] == "ellipnls"


def test_settings(client):
    data = client.get("/api/system/settings").json()["data"]
    assert data["coefficient_reading"] in ("derived", "printed")
    assert data["threads"] >= 1


def test_coeffs(client):
    resp = client.post("/api/solution/coeffs", json=body(z=1.0))
    assert resp.status_code == 200
    data = resp.json()["data"]
    assert data["r1"]["alpha"] == pytest.approx(-16.0)
    assert data["invariants"]["derived"]["g2"] == pytest.approx(-0.64)
    assert data["invariants"]["derived"]["g3"] == pytest.approx(-1.4784)
    assert data["invariants"]["printed"]["g2"] != pytest.approx(-0.64)
    assert data["r2"]["beta"] == 0.0


def test_coeffs_unphysical_has_no_r2(client):
    params = {**APPENDIX_PARAMS, "c3": -0.13}
    data = client.post("/api/solution/coeffs", json={"params": params, "z": 1.0}).json()["data"]
    assert data["r2"] is None


def test_periods(client):
    data = client.post("/api/solution/periods", json=body(z=1.0)).json()["data"]
    assert 4.5 < data["Lz"] < 5.1
    assert data["Lt"] > 0
    assert data["form"] == "zero-root"


def test_periods_without_z(client):
    data = client.post("/api/solution/periods", json=body()).json()["data"]
    assert data["Lt"] is None


def test_h_profile(client):
    resp = client.post("/api/solution/h-profile", json=body(points=65, periods=1.0))
    assert resp.status_code == 200
    data = resp.json()["data"]
    assert data["case"] == "zero-root"
    assert len(data["z"]) == len(data["h"]) == 65
    assert max(data["h"]) == pytest.approx(data["h"][32], rel=1e-9)


def test_h_profile_rejects_unphysical(client):
    params = {**APPENDIX_PARAMS, "c3": -0.13}
    resp = client.post("/api/solution/h-profile", json={"params": params})
    assert resp.status_code == 400
    assert "not physical" in resp.json()["detail"]


def test_invalid_params_rejected(client):
    params = {**APPENDIX_PARAMS, "a": 0.0}
    assert client.post("/api/solution/periods", json={"params": params}).status_code == 422
    assert client.post("/api/solution/h-profile", json=body(points=2)).status_code == 422


def test_outside_positivity_interval_is_400(client):
    params = {**APPENDIX_PARAMS, "h0": 2.0}
    assert client.post("/api/solution/periods", json={"params": params}).status_code == 400


def test_residual_summary(client):
    resp = client.post("/api/residuals/summary", json=body(z_points=16, t_points=9))
    assert resp.status_code == 200
    data = resp.json()["data"]
    assert set(data["reports"]) == {"h", "f", "phase", "riccati"}
    assert data["reports"]["h"]["max_rel"] < 1e-8
    assert data["riccati_violated"] is True


def test_jsonable():
    value = {"x": np.array([1.0, np.inf]), "n": np.int64(3), "b": np.bool_(True), "t": (np.nan,)}
    assert jsonable(value) == {"x": [1.0, None], "n": 3, "b": True, "t": [None]}
