# -*- coding: utf-8 -*-
"""测试 CSV 产物、运行清单与报告格式"""

import json
import math
import sys
import os

# 添加项目根目录到路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pandas as pd
import pytest

from analyzers.physicality import AdmissibleRegion, BoundaryPoint
from core.solution_family import SampledField
from storage.artifact_store import ArtifactStore, format_value, read_field
from storage.state_manager import RunManifest
from utils.formatters import ReportFormatter

PARAMS = {"a": -1.0, "c1": -2.0, "h0": 0.0}


@pytest.mark.parametrize(
    "value,text",
    [
        (0.1, "0.1"),
        (-2.0, "-2.0"),
        (math.inf, "inf"),
        (-math.inf, "-inf"),
        (math.nan, "nan"),
        (True, "true"),
        (np.bool_(False), "false"),
        (np.int64(7), "7"),
        ((0.0, 0.8), "0.0 0.8"),
        ("zero-root", "zero-root"),
    ],
)
def test_format_value(value, text):
    assert format_value(value) == text


def test_format_value_round_trips_floats():
    x = 2.0 / 3.0
    assert float(format_value(x)) == x


def test_write_curve_header_and_manifest(tmp_path):
    store = ArtifactStore(tmp_path, "1.0.0", PARAMS)
    path = store.write_curve("h-profile", "h.csv", {"z": [0.0, 0.5], "h": [0.0, math.nan]}, {"Lz": 4.8})
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[:3] == ["# artifact_version=1.0.0", "# command=h-profile", "# a=-1.0"]
    assert "# Lz=4.8" in lines
    assert lines[-1] == "0.5,nan"

    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["artifacts"]["h-profile"] == ["h-profile/h.csv"]
    assert manifest["params"]["c1"] == "-2.0"


def test_identical_runs_give_identical_bytes(tmp_path):
    field = SampledField(np.linspace(0, 1, 4), np.linspace(0, 2, 3), np.arange(12.0).reshape(3, 4) / 7)
    paths = []
    for run in ("one", "two"):
        store = ArtifactStore(tmp_path / run, "1.0.0", PARAMS)
        paths.append(store.write_field("surface", "f.csv", field))
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_complex_field_round_trip(tmp_path):
    t = np.linspace(-1.0, 1.0, 5)
    z = np.linspace(0.0, 0.4, 3)
    values = np.exp(1j * (t[None, :] + z[:, None])) / 3
    store = ArtifactStore(tmp_path, "1.0.0", PARAMS)
    path = store.write_field("surface", "psi.csv", SampledField(t, z, values, meta={"quantity": "psi"}))
    loaded, meta = read_field(path)
    assert meta["quantity"] == "psi"
    assert meta["command"] == "surface"
    assert loaded.is_complex
    np.testing.assert_allclose(loaded.values, values, rtol=1e-15, atol=0)
    np.testing.assert_allclose(loaded.t_grid, t, rtol=1e-15, atol=0)


def test_region_and_boundary(tmp_path):
    region = AdmissibleRegion(
        f0_grid=np.array([0.0, 0.5]),
        z_grid=np.array([0.0, 1.0, 2.0]),
        mask=np.array([[True, False, True], [True, True, True]]),
        mask_r2=np.ones((2, 3), dtype=bool),
        mask_e1=np.array([[True, False, True], [True, True, True]]),
        e1_t=np.zeros(3),
        focusing=False,
        boundary=[BoundaryPoint(f0=0.2, z=1.0, constraint="plus", value=1e-9)],
    )
    store = ArtifactStore(tmp_path, "1.0.0", PARAMS)
    frame = pd.read_csv(store.write_region("region", "region.csv", region, region.mask), comment="#")
    assert list(frame.columns) == ["f0", "z", "flag"]
    assert frame["flag"].tolist() == [1, 0, 1, 1, 1, 1]
    boundary = pd.read_csv(store.write_boundary("region", "boundary.csv", region), comment="#")
    assert boundary["constraint"].tolist() == ["plus"]


def test_empty_boundary_keeps_columns(tmp_path):
    region = AdmissibleRegion(
        f0_grid=np.array([0.0, 1.0]),
        z_grid=np.array([0.0, 1.0]),
        mask=np.ones((2, 2), dtype=bool),
        mask_r2=np.ones((2, 2), dtype=bool),
        mask_e1=np.ones((2, 2), dtype=bool),
        e1_t=np.zeros(2),
        focusing=True,
    )
    path = ArtifactStore(tmp_path, "1.0.0", PARAMS).write_boundary("region", "boundary.csv", region)
    assert path.read_text(encoding="utf-8").splitlines()[-1] == "f0,z,constraint,value"


def test_report_files(tmp_path):
    store = ArtifactStore(tmp_path, "1.0.0", PARAMS)
    checks = [("residual_h", True, "max_rel 1e-12"), ("Lz", False, "4.8 vs 2.85")]
    text = ReportFormatter.format_report("h-profile", {"h": [("Lz", 4.8)]}, checks, ["Lz differs"], [])
    csv_path, txt_path = store.write_report("h-profile", [("h.Lz", 4.8), ("check.Lz", False)], text)
    frame = pd.read_csv(csv_path, comment="#", dtype=str)
    assert frame["value"].tolist() == ["4.8", "false"]
    report = txt_path.read_text(encoding="utf-8")
    assert "h-profile" in report
    assert "Lz differs" in report
    assert "[未通过] Lz" in report
    manifest = RunManifest(tmp_path / "manifest.json")
    assert manifest.artifacts("h-profile") == ["h-profile/report.csv", "h-profile/report.txt"]


def test_manifest_survives_corrupt_file(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text("{not json", encoding="utf-8")
    manifest = RunManifest(path)
    assert manifest.command is None
    assert manifest.artifacts("coeffs") == []
    manifest.add_artifact("coeffs", "coeffs/report.csv")
    manifest.add_artifact("coeffs", "coeffs/report.csv")
    manifest.record_command("coeffs")
    assert json.loads(path.read_text(encoding="utf-8")) == {
        "artifacts": {"coeffs": ["coeffs/report.csv"]},
        "command": "coeffs",
    }
