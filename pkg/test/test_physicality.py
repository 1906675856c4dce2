# -*- coding: utf-8 -*-
"""测试 h 的物理性判定与 {f0, z} 可行区域"""

import logging
import sys
import os

# 添加项目根目录到路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from analyzers.physicality import (
    admissible_region,
    check_h,
    classify_behavior,
    numerator_minimum,
    slice_bounded,
)
from config.presets import APPENDIX_PARAMS
from core.exceptions import ConstraintViolationError, InvalidInputError
from core.quartic import SolutionParams
from core.solution_family import build_f_solution, build_h_solution, h_eval
from core.weierstrass import EllipticInvariants

APPENDIX = SolutionParams(**APPENDIX_PARAMS)
FOCUSING = SolutionParams(a=1.0, c1=1.0, c2=-0.5, c3=0.2)


@pytest.mark.parametrize(
    "g2,g3,expected",
    [
        (-0.64, -1.4784, "periodic"),
        (4.0, 0.0, "periodic"),
        (12.0, 8.0, "periodic"),
        (12.0, -8.0, "solitary-like"),
        (0.0, 0.0, "solitary-like"),
    ],
)
def test_classify_behavior(g2, g3, expected):
    assert classify_behavior(EllipticInvariants(g2, g3)) == expected


def test_appendix_zero_root_case():
    report = check_h(APPENDIX)
    assert report.case == "zero-root"
    assert report.satisfied
    assert report.behavior == "periodic"
    assert report.details["e1"] > report.details["gamma_half"] == pytest.approx(-0.8)
    assert report.details["delta1"] == pytest.approx(0.26)


def test_zero_root_needs_positive_delta():
    report = check_h(APPENDIX.with_updates(c3=-0.13))
    assert report.case == "zero-root"
    assert not report.satisfied


def test_interior_case_satisfied():
    report = check_h(APPENDIX.with_updates(h0=0.5))
    assert report.case == "interior"
    assert report.satisfied
    assert report.details["numerator_min"] >= -1e-10


def test_numerator_minimum_logs_failed_refinement(monkeypatch, caplog):
    """细化失败时保留采样最小值，并记录 debug 日志"""
    import analyzers.physicality as physicality

    hs = build_h_solution(APPENDIX.with_updates(h0=0.5))
    sampled = numerator_minimum(hs)

    def no_bracket(*args, **kwargs):
        raise ValueError("not a bracketing interval")

    monkeypatch.setattr(physicality, "minimize_scalar", no_bracket)
    with caplog.at_level(logging.DEBUG, logger="analyzers.physicality"):
        z_min, n_min = numerator_minimum(hs)
    assert n_min >= sampled[1]
    assert any("no strict bracket" in r.getMessage() for r in caplog.records)


def test_interior_case_outside_interval():
    report = check_h(APPENDIX.with_updates(h0=2.0))
    assert report.case == "interior"
    assert not report.satisfied
    assert report.details["R1_h0"] < 0


def test_simple_root_case():
    hs = build_h_solution(APPENDIX)
    top = float(h_eval(0.5 * hs.Lz, hs))
    report = check_h(APPENDIX.with_updates(h0=top))
    assert report.case == "simple-root"
    assert report.details["e1"] > report.details["s"]
    # h touches zero once per period
    assert report.details.get("numerator_min", 0.0) > -1e-6


def test_focusing_example_physical():
    assert check_h(FOCUSING).satisfied


@pytest.fixture(scope="module")
def appendix_region():
    hs = build_h_solution(APPENDIX)
    return hs, admissible_region(
        APPENDIX,
        f0_range=(0.0, 1.0),
        z_range=(0.0, 3 * hs.Lz),
        resolution=(41, 60),
        threads=2,
        hs=hs,
    )


def test_region_masks_combine(appendix_region):
    _, region = appendix_region
    assert region.mask.shape == (41, 60)
    np.testing.assert_array_equal(region.mask, region.mask_r2 & region.mask_e1)
    assert not region.focusing
    np.testing.assert_array_equal(region.mask_e1, region.mask_plus & region.mask_minus)
    assert region.e1_t.shape == (60,)


def test_region_row_helpers(appendix_region):
    _, region = appendix_region
    i = region.row_index(0.8)
    assert region.f0_grid[i] == pytest.approx(0.8, abs=0.0125)
    row = region.mask[i]
    assert region.row_crossings(0.8) == int(np.count_nonzero(np.diff(row.astype(int))))
    assert region.row_admissible(0.8) == bool(row.all())


def test_region_boundary_points_refined(appendix_region):
    _, region = appendix_region
    if not region.boundary:
        pytest.skip("no boundary inside this window")
    values = np.array([abs(p.value) for p in region.boundary])
    assert np.min(values) <= 1e-4
    assert {p.constraint for p in region.boundary} <= {"r2", "plus", "minus", "e1"}


def test_region_is_deterministic_across_threads(appendix_region):
    hs, region = appendix_region
    again = admissible_region(
        APPENDIX,
        f0_range=(0.0, 1.0),
        z_range=(0.0, 3 * hs.Lz),
        resolution=(41, 60),
        threads=1,
        hs=hs,
    )
    np.testing.assert_array_equal(again.mask, region.mask)
    assert [(p.f0, p.z) for p in again.boundary] == [(p.f0, p.z) for p in region.boundary]


def test_focusing_region_has_single_mask():
    hs = build_h_solution(FOCUSING)
    region = admissible_region(FOCUSING, (-1.0, 1.0), (0.0, hs.Lz), resolution=(21, 20), hs=hs)
    assert region.focusing
    assert region.mask_plus is None and region.mask_minus is None


def test_region_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        admissible_region(APPENDIX, (0.0, 1.0), (0.0, 1.0), resolution=(1, 10))
    with pytest.raises(InvalidInputError):
        admissible_region(APPENDIX, (1.0, 0.0), (0.0, 1.0), resolution=(10, 10))
    with pytest.raises(ConstraintViolationError):
        admissible_region(APPENDIX.with_updates(c3=-0.13), (0.0, 1.0), (0.0, 1.0), resolution=(10, 10))


def test_slice_bounded_agrees_with_region(appendix_region):
    hs, region = appendix_region
    fs = build_f_solution(hs, f0=float(region.f0_grid[0]))
    j = 7
    sl = fs.at(float(region.z_grid[j]))
    assert slice_bounded(sl) == bool(region.mask[0, j])
